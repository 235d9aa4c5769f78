// Three-dimensional St Venant-Kirchhoff energy of the thin rod, recovery
// deformations built from limit solutions, limit Green-St Venant tensors and
// the numerical Gamma-convergence check.
//
// The rod of thickness delta carries forces f_delta = delta^kappa f +
// delta^(kappa-1) g(s1/delta, s2/delta, s3) and its energy relative to the
// identity is
//   J(v) - J(Id) = int W(grad v) - f_delta.(v - Phi)  over Omega_delta,
// W(F) = (lambda/8) tr(F^T F - I)^2 + (mu/4) tr((F^T F - I)^2), +inf if det F <= 0.
//
// Recovery deformations (kappa = 2, data (V, R, V_S, w) with dV/ds3 = R t):
//   v = V + R (delta S1 n1 + delta S2 n2) + delta V_S + delta^2 R w(S, s3),
// and for kappa > 2 (data (Rc, V_S, w)):
//   v = V_delta + R_delta (delta S1 n1 + delta S2 n2) + delta^(kappa-1) V_S + delta^kappa w(S, s3),
// with dR_delta/ds3 = delta^(kappa-2) R_delta hat(dRc/ds3), V_delta = M(0) + int R_delta t.
// The warping w is the corrector built from P1-in-s3 strain coefficients that
// vanish at s3 = 0, so v = Phi on the clamped end.
//
// The rescaled strain (1/(2 delta^(kappa-1))) (grad v^T grad v - I) tends to
// E = P Ehat P^T, P = (n1|n2|t), where Ehat = sym(P^T Z),
//   Z = [d w/dS1, d w/dS2, c ^ (S1 n1 + S2 n2) + dV_S/ds3 (rotated back by R^T when kappa = 2)],
// c = R^T dR/ds3 (kappa = 2) or dRc/ds3 (kappa > 2).
#pragma once

#include "rodlimit/correctors.hpp"
#include "rodlimit/deformation.hpp"
#include "rodlimit/linear_models.hpp"
#include "rodlimit/loads.hpp"
#include "rodlimit/nonlinear_model.hpp"

#include <limits>
#include <string>
#include <vector>

namespace rodlimit {

// W(F); +infinity when det F <= 0.
double svkDensity(const Mat3 &F, const Material &material);
// (lambda/2) tr(E)^2 + mu |E|^2, the density as a function of the strain.
double svkStrainDensity(const Mat3 &E, const Material &material);
// Green-St Venant tensor (F^T F - I) / 2.
Mat3 greenStVenant(const Mat3 &F);

// Limit tensor in the (n1, n2, t) basis from its ingredients:
// dw1, dw2 = d w/dS_alpha, c the strain vector, stretch = dV_S/ds3 expressed
// in the reference frame.
Mat3 limitTensor(const FramePoint &p, double S1, double S2, const Vec3 &dw1, const Vec3 &dw2, const Vec3 &c,
                 const Vec3 &stretch);
// kappa = 2: stretch given in the deformed frame and rotated back by R^T.
Mat3 limitTensorNonlinear(const FramePoint &p, double S1, double S2, const Vec3 &dw1, const Vec3 &dw2,
                          const Vec3 &a, const Mat3 &R, const Vec3 &dVS);
// kappa > 2.
Mat3 limitTensorLinear(const FramePoint &p, double S1, double S2, const Vec3 &dw1, const Vec3 &dw2,
                       const Vec3 &dRc, const Vec3 &dVS);
// E = P Ehat P^T.
Mat3 toPhysicalFrame(const Mat3 &Ehat, const FramePoint &p);

struct EnergyResult {
    double value = 0.0; // J(v) - J(Id), +infinity when some det <= 0
    bool finite = true;
    Vec3 offendingPoint = Vec3::Zero(); // (S1, S2, s3) of the first cell with det <= 0
};

// J(v) - J(Id) for a sampled field with finite-difference gradients, one
// point per cell (centroid x axial node, volume-weighted).
EnergyResult totalEnergy(const DeformationField3D &field, const LoadProfile &loads, const Material &material,
                         int threads = 1);

// Smooth recovery data on an axial grid.
struct RecoveryData {
    std::shared_ptr<const FrameField> frame;
    std::vector<double> grid;
    double kappa = 2.0;
    std::vector<Vec3> generator;      // c on each interval (a, or dRc/ds3)
    std::vector<Vec3> warpingNodes;   // P1 strain coefficients of the warping; zero at s3 = 0
    std::vector<Vec3> stretching;     // V_S at the nodes (P1); zero at s3 = 0
    std::vector<Vec3> rotationVector; // Rc at the nodes (kappa > 2)
    double nu = 0.0;
    SectionConstants constants;
    std::vector<double> chiNodes;     // torsion function at the section mesh nodes

    void validate() const;
    int intervalOf(double s) const;
    Vec3 warpingCoefficient(double s) const;
    Vec3 warpingSlope(int k) const;
    Vec3 stretchingAt(double s) const;
    Vec3 stretchingSlope(int k) const;
    Vec3 rotationVectorAt(double s) const;
};

// Recovery data from the limit solutions (stretching zero, warping from the
// closed-form correctors).
RecoveryData nonlinearRecoveryData(const RodProblem &problem, const NonlinearSolution &solution);
RecoveryData linearRecoveryData(const RodProblem &problem, const LinearSolution &solution, double kappa);

// Value, gradient and limit data of a recovery deformation at one point.
struct RecoveryPoint {
    Vec3 value = Vec3::Zero();        // v
    Vec3 displacement = Vec3::Zero(); // v - Phi
    Mat3 F = Mat3::Identity();        // grad_x v (analytic)
    Mat3 limit = Mat3::Zero();        // Ehat
    double jac = 1.0;                 // det grad Phi
};

// The recovery deformation at one thickness delta.
class RecoveryField {
public:
    RecoveryField(const RecoveryData &data, double delta);

    double delta() const { return m_delta; }
    const RotationField &rotation() const { return m_rotation; }
    const std::vector<Vec3> &centerlineNodes() const { return m_centerline; }
    Vec3 centerline(double s) const;

    // Everything that depends only on the axial position.
    struct AxialState {
        FramePoint frame;
        int interval = 0;
        Mat3 R = Mat3::Identity();
        Vec3 V = Vec3::Zero();
        StrainComponents strain, strainSlope; // warping coefficients and their s3-derivatives
    };
    AxialState axialState(const FramePoint &p, int interval) const;

    RecoveryPoint evaluate(const AxialState &state, const SectionPoint &S) const;
    RecoveryPoint evaluate(const FramePoint &p, int interval, const SectionPoint &S) const {
        return evaluate(axialState(p, interval), S);
    }
    RecoveryPoint evaluate(double S1, double S2, double s3, double chi = 0.0, double chi1 = 0.0,
                           double chi2 = 0.0) const;
    // Samples the deformation at the section mesh nodes x axial nodes.
    DeformationField3D sample(std::shared_ptr<const RodChart> chart, std::vector<double> axial) const;

private:
    const RecoveryData *m_data;
    double m_delta;
    RotationField m_rotation; // R (kappa = 2) or R_delta
    std::vector<Vec3> m_centerline;
};

struct GammaReport {
    double kappa = 2.0;
    std::vector<double> deltas;      // surviving thicknesses, strictly decreasing
    std::vector<double> quotients;   // (J(v_delta) - J(Id)) / delta^(2 kappa)
    std::vector<double> gaps;        // |quotient - limit|
    std::vector<double> tensorGaps;  // ||rescaled strain - E||_L2(Omega)
    std::vector<double> distanceBounds; // ||dist(grad v, SO(3))||_L2(Omega_delta) / delta^kappa
    double limitEnergy = 0.0;        // J computed from the limit tensor of the recovery data
    double limitTensorNorm = 0.0;    // ||Ehat||_L2(Omega)
    double modelEnergy = 0.0;        // minimum of the one-dimensional model
    double slope = 0.0;              // least-squares log-log slope of the gaps
    double tensorSlope = 0.0;
    bool monotone = true;            // gaps strictly decreasing
    bool tensorMonotone = true;
    std::vector<double> dropped;     // thicknesses dropped for infinite energy
    std::vector<std::string> warnings;
};

struct GammaOptions {
    std::vector<double> deltas{0.2, 0.1, 0.05, 0.025};
    int sectionOrder = 3; // triangle rule order per section triangle
    int axialPoints = 2;  // Gauss points per axial interval
    int threads = 1;
};

// Limit energy int_Omega (lambda/2) tr(Ehat)^2 + mu |Ehat|^2 - limit load work,
// evaluated with the same quadrature as the quotients.
double limitEnergy(const RecoveryData &data, const SectionData &section, const Material &material,
                   const LoadMatrix &G, const GammaOptions &options = {});

GammaReport gammaCheck(const RecoveryData &data, const SectionData &section, const Material &material,
                       const LoadProfile &loads, const LoadMatrix &G, double modelEnergy,
                       const GammaOptions &options = {});

// Least-squares slope of log(y) against log(x); NaN when fewer than two
// positive pairs.
double logLogSlope(const std::vector<double> &x, const std::vector<double> &y);

} // namespace rodlimit
