#include "rodlimit/so3.hpp"

#include "rodlimit/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rodlimit {

Mat3 hat(const Vec3 &a) {
    Mat3 A;
    A << 0.0, -a.z(), a.y(),
         a.z(), 0.0, -a.x(),
         -a.y(), a.x(), 0.0;
    return A;
}

Vec3 vee(const Mat3 &M) {
    return 0.5 * Vec3(M(2, 1) - M(1, 2), M(0, 2) - M(2, 0), M(1, 0) - M(0, 1));
}

Mat3 rodrigues(const Vec3 &axis, double theta) {
    require(std::isfinite(theta), "rodrigues: angle must be finite");
    require(std::abs(axis.norm() - 1.0) <= 1e-10, "rodrigues: axis must be a unit vector");
    const double c = std::cos(theta), s = std::sin(theta);
    return c * Mat3::Identity() + (1.0 - c) * axis * axis.transpose() + s * hat(axis);
}

Mat3 expSO3(const Vec3 &w) {
    const double t2 = w.squaredNorm();
    const double t = std::sqrt(t2);
    double A, B;
    if (t < 1e-4) {
        A = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
        B = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
    } else {
        A = std::sin(t) / t;
        B = (1.0 - std::cos(t)) / t2;
    }
    const Mat3 W = hat(w);
    return Mat3::Identity() + A * W + B * W * W;
}

Mat3 leftJacobian(const Vec3 &x) {
    const double t2 = x.squaredNorm();
    const double t = std::sqrt(t2);
    double C1, C2;
    if (t < 1e-4) {
        C1 = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
        C2 = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
    } else {
        C1 = (1.0 - std::cos(t)) / t2;
        C2 = (t - std::sin(t)) / (t2 * t);
    }
    const Mat3 X = hat(x);
    return Mat3::Identity() + C1 * X + C2 * X * X;
}

Mat3 projectToRotation(const Mat3 &F) {
    Eigen::JacobiSVD<Mat3> svd(F, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Mat3 U = svd.matrixU(), V = svd.matrixV();
    Mat3 D = Mat3::Identity();
    D(2, 2) = (U * V.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
    return U * D * V.transpose();
}

double orthogonalityDefect(const Mat3 &R) {
    return std::max((R.transpose() * R - Mat3::Identity()).norm(), std::abs(R.determinant() - 1.0));
}

namespace {

// Deterministic sign convention for an axis defined up to sign.
Vec3 canonicalSign(Vec3 a) {
    for (int i = 0; i < 3; ++i) {
        if (std::abs(a[i]) > 1e-12) {
            if (a[i] < 0.0) a = -a;
            break;
        }
    }
    return a;
}

} // namespace

AxisAngle logRotation(const Mat3 &Rin) {
    AxisAngle out;
    Mat3 R = Rin;
    require(R.allFinite(), "logRotation: matrix must be finite");
    if (orthogonalityDefect(R) > 1e-10) {
        R = projectToRotation(R);
        out.projected = true;
    }
    const Vec3 v = vee(R); // sin(theta) * axis
    const double c = std::clamp(0.5 * (R.trace() - 1.0), -1.0, 1.0);
    const double s = v.norm();
    out.theta = std::atan2(s, c);
    if (out.theta == 0.0) return out;
    if (c > -0.5) {
        out.axis = v / s;
        return out;
    }
    // Near pi the antisymmetric part loses precision; use the symmetric
    // part (1 - cos theta) a a^T = (R + R^T)/2 - cos(theta) I.
    const Mat3 B = 0.5 * (R + R.transpose()) - c * Mat3::Identity();
    int j = 0;
    B.diagonal().maxCoeff(&j);
    Vec3 a = B.col(j) / std::sqrt(std::max(B(j, j), 1e-300));
    a.normalize();
    if (s > 1e-12) {
        if (a.dot(v) < 0.0) a = -a;
    } else {
        a = canonicalSign(a);
    }
    out.axis = a;
    return out;
}

Vec3 logVector(const Mat3 &R) {
    const AxisAngle aa = logRotation(R);
    return aa.theta * aa.axis;
}

Mat3 geodesicPath(const Mat3 &U0, const Mat3 &U1, double t) {
    return U0 * expSO3(t * logVector(U0.transpose() * U1));
}

double geodesicSpeed(const Mat3 &U0, const Mat3 &U1) {
    return std::numbers::sqrt2 * logRotation(U0.transpose() * U1).theta;
}

void validateGrid(const std::vector<double> &grid) {
    require(grid.size() >= 2, "grid: at least one interval is required");
    require(grid.front() == 0.0, "grid: must start at 0");
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        require(std::isfinite(grid[k + 1]), "grid: nodes must be finite");
        require(grid[k + 1] > grid[k], "grid: zero-length or decreasing interval");
    }
}

std::vector<double> uniformGrid(double length, int intervals) {
    require(length > 0.0 && std::isfinite(length), "grid: length must be positive");
    require(intervals >= 1, "grid: at least one interval is required");
    std::vector<double> g(intervals + 1);
    for (int k = 0; k <= intervals; ++k) g[k] = length * k / intervals;
    g.back() = length;
    return g;
}

int RotationField::intervalOf(double s) const {
    const double L = m_grid.back();
    require(s >= -1e-12 * L && s <= L * (1.0 + 1e-12), "RotationField: abscissa outside [0, L]");
    auto it = std::upper_bound(m_grid.begin(), m_grid.end(), s);
    int k = static_cast<int>(it - m_grid.begin()) - 1;
    return std::clamp(k, 0, intervals() - 1);
}

Mat3 RotationField::evaluate(double s) const {
    const int k = intervalOf(s);
    return m_values[k] * expSO3((s - m_grid[k]) * m_generator[k]);
}

Mat3 RotationField::derivative(double s) const {
    const int k = intervalOf(s);
    return evaluate(s) * hat(m_generator[k]);
}

double RotationField::h1SeminormSquared() const {
    double e = 0.0;
    for (int k = 0; k < intervals(); ++k)
        e += 2.0 * m_generator[k].squaredNorm() * (m_grid[k + 1] - m_grid[k]);
    return e;
}

RotationField integrateGenerator(const std::vector<double> &grid, const std::vector<Vec3> &generator,
                                 const Mat3 &R0) {
    validateGrid(grid);
    require(generator.size() + 1 == grid.size(), "integrateGenerator: one generator per interval");
    for (const Vec3 &a : generator) require(a.allFinite(), "integrateGenerator: generator must be finite");
    require(orthogonalityDefect(R0) <= 1e-12, "integrateGenerator: initial value must be a rotation");
    RotationField f;
    f.m_grid = grid;
    f.m_generator = generator;
    f.m_values.resize(grid.size());
    f.m_values[0] = R0;
    f.m_clamped = R0 == Mat3::Identity();
    for (std::size_t k = 0; k < generator.size(); ++k)
        f.m_values[k + 1] = f.m_values[k] * expSO3((grid[k + 1] - grid[k]) * generator[k]);
    return f;
}

RotationField rotationFieldFromNodes(const std::vector<double> &grid, const std::vector<Mat3> &values) {
    validateGrid(grid);
    require(values.size() == grid.size(), "rotationFieldFromNodes: one value per node");
    RotationField f;
    f.m_grid = grid;
    f.m_values.resize(values.size());
    f.m_generator.resize(values.size() - 1);
    f.m_values[0] = values[0];
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
        const double h = grid[k + 1] - grid[k];
        f.m_generator[k] = logVector(values[k].transpose() * values[k + 1]) / h;
        f.m_values[k + 1] = f.m_values[k] * expSO3(h * f.m_generator[k]);
    }
    f.m_clamped = f.m_values[0] == Mat3::Identity();
    return f;
}

RotationField interpolateRotationSamples(const std::vector<Mat3> &samples, double length) {
    require(!samples.empty(), "interpolateRotationSamples: at least one sample is required");
    for (const Mat3 &R : samples)
        require(orthogonalityDefect(R) <= 1e-10, "interpolateRotationSamples: samples must be rotations");
    if (samples.size() == 1) return rotationFieldFromNodes(uniformGrid(length, 1), {samples[0], samples[0]});
    return rotationFieldFromNodes(uniformGrid(length, static_cast<int>(samples.size()) - 1), samples);
}

} // namespace rodlimit
