// Nonlinear inextensible rod model (kappa = 2).
//
// With R' = R A, A = hat(a) and a piecewise constant on the axial grid, the
// reduced functional is
//   G(A) = (E/2) int sum_alpha I_alpha (A t.n_alpha)^2 + (mu K/4) int (A n1.n2)^2
//          - int <G, R_A - I>,
// whose elastic part equals (1/2) int a^T Q a with
//   Q = E I1 n2 n2^T + E I2 n1 n1^T + (mu K/2) t t^T,
// because A t.n1 = a.n2, A t.n2 = -a.n1 and A n1.n2 = a.t.
#pragma once

#include "rodlimit/cross_section.hpp"
#include "rodlimit/geometry.hpp"
#include "rodlimit/loads.hpp"
#include "rodlimit/so3.hpp"

#include <array>
#include <memory>
#include <optional>
#include <vector>

namespace rodlimit {

// Geometry, section, material and axial grid shared by every 1D model.
struct RodProblem {
    std::shared_ptr<const FrameField> frame;
    SectionData section;
    Material material;
    std::vector<double> grid;

    double length() const { return grid.back(); }
    int intervals() const { return static_cast<int>(grid.size()) - 1; }
    // Q(s) above.
    Mat3 stiffness(const FramePoint &p) const;
    // min(E I1, E I2, mu K / 2).
    double coercivityConstant() const;
    // Throws unless the grid ends at the rod length and the constants are positive.
    void validate() const;
};

RodProblem makeRodProblem(std::shared_ptr<const FrameField> frame, SectionData section, Material material,
                          int intervals);

struct GateReport {
    double loadNorm = 0.0;  // ||G|| in L2(0,L)
    double threshold = 0.0; // L^(-3/2) min(E I1, E I2, mu K/2)
    bool passed = true;     // loadNorm < threshold (strict, with a 1e-12 relative guard)
};

GateReport checkUniquenessGate(const RodProblem &problem, const LoadMatrix &loads);

// Discrete reduced functional on piecewise-constant generators. Quadratic
// terms use 2-point Gauss rules, load terms 4-point Gauss rules with the
// exact rotation R_k exp(tau hat(a_k)) inside each interval.
class ReducedFunctional {
public:
    ReducedFunctional(const RodProblem &problem, const LoadMatrix &loads);

    int intervals() const { return static_cast<int>(m_intervals.size()); }
    const std::vector<double> &grid() const { return m_grid; }

    double elasticEnergy(const std::vector<Vec3> &a) const;
    // int <G, R_A - I>
    double loadWork(const std::vector<Vec3> &a) const;
    double energy(const std::vector<Vec3> &a) const { return elasticEnergy(a) - loadWork(a); }

    // Partial derivatives d G / d a_j, so that G'(A)(B) = sum_j g_j . b_j.
    std::vector<Vec3> gradient(const std::vector<Vec3> &a) const;
    double derivative(const std::vector<Vec3> &a, const std::vector<Vec3> &b) const;
    // G''(A)(B,B).
    double secondDerivative(const std::vector<Vec3> &a, const std::vector<Vec3> &b) const;

    // Fixed-point map of the Euler system: a~_j = Q_j^-1 (-(load part of g_j)).
    std::vector<Vec3> fixedPointMap(const std::vector<Vec3> &a) const;
    // L2 norm of A - A~ (the Euler-system residual).
    double residual(const std::vector<Vec3> &a) const;
    // ||B||_L2 with |||hat(b)|||^2 = 2 |b|^2.
    double norm(const std::vector<Vec3> &b) const;

    // Integrated stiffness of interval k.
    const Mat3 &intervalStiffness(int k) const { return m_intervals[k].Q; }

private:
    struct Interval {
        double a = 0.0, h = 0.0;
        Mat3 Q = Mat3::Zero();            // int_k Q(s) ds
        std::array<double, 4> tau{};       // Gauss offsets from the left node
        std::array<double, 4> weight{};    // Gauss weights times h
        std::array<Mat3, 4> G{};           // load matrix at the Gauss points
    };
    std::vector<Mat3> nodeRotations(const std::vector<Vec3> &a) const;
    std::vector<Vec3> loadGradient(const std::vector<Vec3> &a) const;
    void checkSize(const std::vector<Vec3> &a) const;

    std::vector<double> m_grid;
    std::vector<Interval> m_intervals;
    bool m_zeroLoads = true;
};

struct NonlinearOptions {
    double damping = 0.5;
    double tolerance = 1e-10;
    int maxIterations = 500;
    std::optional<std::vector<Vec3>> initialGenerator;
};

struct NonlinearSolution {
    std::vector<Vec3> generator;  // A_0 per interval
    RotationField rotation;       // R_0, R_0(0) = I
    std::vector<Vec3> centerline; // V_0 at the grid nodes
    std::vector<Vec3> stretching; // V_S at the grid nodes (zero)
    double energy = 0.0;          // m_2
    double residual = 0.0;
    int iterations = 0;
    GateReport gate;
};

// Damped fixed-point iteration A <- (1 - rho) A + rho A~. Throws
// NonConvergenceError with the last residual after maxIterations.
NonlinearSolution solveNonlinear(const RodProblem &problem, const LoadMatrix &loads,
                                 const NonlinearOptions &options = {});

// V(s_k) = M(0) + int_0^s_k R t by 8-point Gauss rules per interval.
std::vector<Vec3> integrateCenterline(const FrameField &frame, const RotationField &R);
// V(s) from the nodal values.
Vec3 evaluateCenterline(const FrameField &frame, const RotationField &R, const std::vector<Vec3> &nodes, double s);

struct NonlinearEnergy {
    double value = 0.0;   // F_NL(V, R)
    double reduced = 0.0; // G(generator of R)
};

// F_NL(V, R) evaluated from dR/ds and V directly:
//   (E I1/2) int (R' t.R n1)^2 + (E I2/2) int (R' t.R n2)^2 + (mu K/4) int (R' n1.R n2)^2
//   - int F.(V - M) - sum_alpha int G_alpha.(R - I) n_alpha.
// Rejects inadmissible pairs and throws when the value differs from the
// reduced functional by more than 1e-10 (relative to 1 + |value|).
NonlinearEnergy energyFNL(const RodProblem &problem, const LoadMatrix &loads, const std::vector<Vec3> &centerline,
                          const RotationField &R);

} // namespace rodlimit
