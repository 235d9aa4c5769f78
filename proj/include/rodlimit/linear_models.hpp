// Linear limit models (kappa > 2): bending-torsion, extensional and coupled.
//
// Bending-torsion: minimize over P1 rotation vectors Rc with Rc(0) = 0
//   (1/2) int Rc'^T Q Rc' - int phi . Rc,   phi = t ^ T + sum_alpha n_alpha ^ G_alpha,
// obtained from F_L after eliminating U through int F.U = int T.(Rc ^ t).
// The displacement follows from dU/ds = Rc ^ t, U(0) = 0.
//
// Extensional: dU_E/ds = (ftilde / E) t pointwise, m = -(|omega| / (2E)) int ftilde^2.
//
// Coupled: the bending-torsion form gains |omega| int ftilde |Rc ^ t|^2 / 2 and
//   dU_E/ds . t = ftilde / E - |Rc ^ t|^2 / 2,
//   m = (bending-torsion value) - (|omega| / (2E)) int ftilde^2.
#pragma once

#include "rodlimit/loads.hpp"
#include "rodlimit/nonlinear_model.hpp"

#include <string>
#include <vector>

namespace rodlimit {

struct LinearSolution {
    std::vector<double> grid;
    std::vector<Vec3> rotation;     // Rc at the nodes (P1)
    std::vector<Vec3> displacement; // U at the nodes
    std::vector<Vec3> extensional;  // U_E at the nodes (empty when absent)
    std::vector<Vec3> stretching;   // V_S at the nodes (zero)
    double energy = 0.0;            // m_kappa
    double gradientNorm = 0.0;      // max-norm of the discrete gradient at the solution
    std::vector<std::string> warnings;

    // Rc(s) by linear interpolation and its constant slope on interval k.
    Vec3 rotationAt(double s) const;
    Vec3 rotationSlope(int k) const;
    int intervalOf(double s) const;
};

// Bending-torsion model. Throws ValidationError when the system is singular.
LinearSolution solveLinear(const RodProblem &problem, const LoadMatrix &loads);

// Extensional model; requires loads.ftilde. When f is not identically zero,
// int_s^L f = ftilde t is checked at the nodes (1e-8). With kappa = 3 a
// negative ftilde only adds a warning.
LinearSolution solveExtensional(const RodProblem &problem, const LoadProfile &loads);

// Coupled model with bending loads from `loads` (f, g) and the extensional
// load ftilde. Throws ValidationError when the coupled form is not positive
// definite.
LinearSolution solveCoupled(const RodProblem &problem, const LoadProfile &loads, const LoadMatrix &bendingLoads);

// U(s) = U(s_k) + int_{s_k}^s Rc ^ t (8-point Gauss).
Vec3 evaluateDisplacement(const FrameField &frame, const LinearSolution &sol, double s);

} // namespace rodlimit
