// Rotation-group primitives: Rodrigues construction, logarithm, geodesic
// paths, exact integration of dR/ds = R A for piecewise-constant generators,
// and H1 interpolation of rotation samples.
//
// Antisymmetric matrices are represented by their axial vector a, with
// A x = a ^ x (cross product). All functions are pure.
#pragma once

#include <Eigen/Dense>
#include <vector>

namespace rodlimit {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Antisymmetric matrix of the axial vector a: hat(a) x = a ^ x.
Mat3 hat(const Vec3 &a);
// Axial vector of the antisymmetric part of M, i.e. vee((M - M^T)/2).
Vec3 vee(const Mat3 &M);

// Rotation of angle theta about the unit axis a:
// R x = cos(theta) x + (1 - cos(theta)) <x,a> a + sin(theta) a ^ x.
// Throws ValidationError when |a| differs from 1 by more than 1e-10.
Mat3 rodrigues(const Vec3 &axis, double theta);

// exp(hat(w)); accurate for arbitrarily small |w|.
Mat3 expSO3(const Vec3 &w);

// Left Jacobian of the exponential: d/de exp(hat(x + e y)) at e=0 equals
// hat(leftJacobian(x) y) exp(hat(x)).
Mat3 leftJacobian(const Vec3 &x);

struct AxisAngle {
    Vec3 axis = Vec3::UnitX(); // unit; e1 by convention when theta = 0
    double theta = 0.0;        // in [0, pi]
    bool projected = false;    // input was re-orthogonalized first
};

// Inverse of rodrigues. For theta = pi the axis is extracted from the
// dominant diagonal entry of (R + I)/2 and signed so that its first nonzero
// component is positive. Inputs that are not orthogonal within 1e-10 are
// replaced by their special-orthogonal polar factor and flagged.
AxisAngle logRotation(const Mat3 &R);
// axis * theta of logRotation(R).
Vec3 logVector(const Mat3 &R);

// Special-orthogonal polar factor U diag(1,1,det(U V^T)) V^T of F.
Mat3 projectToRotation(const Mat3 &F);

// Max of |||R^T R - I||| and |det R - 1|.
double orthogonalityDefect(const Mat3 &R);

// Geodesic U(t) = U0 exp(t log(U0^T U1)), t in [0,1].
Mat3 geodesicPath(const Mat3 &U0, const Mat3 &U1, double t);
// |||dU/dt||| along the geodesic, equal to sqrt(2) * theta.
double geodesicSpeed(const Mat3 &U0, const Mat3 &U1);

// SO(3)-valued field on a grid 0 = s_0 < ... < s_M = L with a piecewise
// constant generator: values[k+1] = values[k] exp(h_k hat(generator[k])).
class RotationField {
public:
    RotationField() = default;

    const std::vector<double> &grid() const { return m_grid; }
    const std::vector<Mat3> &values() const { return m_values; }
    const std::vector<Vec3> &generator() const { return m_generator; }
    bool clamped() const { return m_clamped; }
    int intervals() const { return static_cast<int>(m_generator.size()); }
    double length() const { return m_grid.back(); }

    // Interval containing s (the last interval owns s = L).
    int intervalOf(double s) const;
    // R(s) = values[k] exp((s - s_k) hat(generator[k])).
    Mat3 evaluate(double s) const;
    // dR/ds = R(s) hat(generator[k]).
    Mat3 derivative(double s) const;
    // Exact value of the integral of |||dR/ds|||^2 = sum 2 |a_k|^2 h_k.
    double h1SeminormSquared() const;

    friend RotationField integrateGenerator(const std::vector<double> &, const std::vector<Vec3> &,
                                            const Mat3 &);
    friend RotationField interpolateRotationSamples(const std::vector<Mat3> &, double);
    friend RotationField rotationFieldFromNodes(const std::vector<double> &, const std::vector<Mat3> &);

private:
    std::vector<double> m_grid;
    std::vector<Mat3> m_values;
    std::vector<Vec3> m_generator;
    bool m_clamped = false;
};

// Throws ValidationError unless the grid starts at 0, has at least one
// interval and is strictly increasing.
void validateGrid(const std::vector<double> &grid);
std::vector<double> uniformGrid(double length, int intervals);

// Exact per-interval propagation of dR/ds = R hat(a) from R(0) = R0
// (the identity by default, which sets the clamped flag).
RotationField integrateGenerator(const std::vector<double> &grid, const std::vector<Vec3> &generator,
                                 const Mat3 &R0 = Mat3::Identity());

// Piecewise-geodesic field through samples placed uniformly on [0, L].
RotationField interpolateRotationSamples(const std::vector<Mat3> &samples, double length);

// Generator extraction: the piecewise-geodesic field through nodal values.
RotationField rotationFieldFromNodes(const std::vector<double> &grid, const std::vector<Mat3> &values);

} // namespace rodlimit
