// Closed-form correctors of the limit models: section warping, stretching
// field and the limit strain tensor at the minimum.
//
// Both the nonlinear model (axial vector a of A = R^T dR/ds) and the linear
// model (c = dRc/ds) reduce to three strain components
//   kappa1 = c.n2,  kappa2 = -c.n1,  tau = c.t,
// i.e. A t.n1, A t.n2 and A n1.n2 in the nonlinear case. In the local basis
// (n1, n2, t) the warping is
//   w.n1 = nu [ ((S1^2 - S2^2)/2 - m1) kappa1 + (S1 S2 - m12) kappa2 ]
//   w.n2 = nu [ (S1 S2 - m12) kappa1 + ((S2^2 - S1^2)/2 + m1) kappa2 ]
//   w.t  = chi tau
// where m1 = (I1 - I2) / (2 |omega|) and m12 = int S1 S2 / |omega| make the
// section mean zero, and the strain tensor is
//   E = [[-nu E33, 0, (chi_1 - S2) tau / 2],
//        [0, -nu E33, (chi_2 + S1) tau / 2],
//        [sym, sym, E33]],   E33 = -S1 kappa1 - S2 kappa2.
// The stretching field V_S vanishes.
#pragma once

#include "rodlimit/cross_section.hpp"
#include "rodlimit/geometry.hpp"
#include "rodlimit/linear_models.hpp"
#include "rodlimit/nonlinear_model.hpp"

#include <vector>

namespace rodlimit {

struct StrainComponents {
    double kappa1 = 0.0, kappa2 = 0.0, tau = 0.0;
};

StrainComponents strainComponents(const Vec3 &c, const FramePoint &p);

// Warping components (w.n1, w.n2, w.t) at a section point.
Vec3 warpingComponents(const StrainComponents &k, const SectionPoint &S, double nu, const SectionConstants &constants);
// Their derivatives: column alpha holds d/dS_alpha of the three components.
Eigen::Matrix<double, 3, 2> warpingGradient(const StrainComponents &k, const SectionPoint &S, double nu);
// Limit strain tensor in the (n1, n2, t) basis.
Mat3 correctorStrain(const StrainComponents &k, const SectionPoint &S, double nu);

// Per-interval strain components of a solution plus the material data
// needed to evaluate the correctors anywhere.
struct CorrectorField {
    std::vector<double> grid;
    std::vector<StrainComponents> strain; // per interval, at the interval midpoint frame
    std::vector<Vec3> curvature;          // c per interval (a or dRc/ds)
    std::vector<Vec3> stretching;         // V_S at the nodes (zero)
    double nu = 0.0;
    SectionConstants constants;

    // Components at s, evaluated with the frame at s.
    StrainComponents at(const FrameField &frame, double s) const;
    // Integral over omega x (0,L) of (lambda/2) tr(E)^2 + mu |E|^2.
    double energy(const FrameField &frame, const std::vector<SectionPoint> &section, const Material &material) const;
};

CorrectorField nonlinearCorrectors(const RodProblem &problem, const NonlinearSolution &solution);
CorrectorField linearCorrectors(const RodProblem &problem, const LinearSolution &solution);

} // namespace rodlimit
