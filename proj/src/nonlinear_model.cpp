#include "rodlimit/nonlinear_model.hpp"

#include "rodlimit/error.hpp"
#include "rodlimit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rodlimit {

namespace {

// <M, hat(v)> = v . axial(M) with axial(M) = (M32 - M23, M13 - M31, M21 - M12).
Vec3 axial(const Mat3 &M) { return Vec3(M(2, 1) - M(1, 2), M(0, 2) - M(2, 0), M(1, 0) - M(0, 1)); }

double inner(const Mat3 &A, const Mat3 &B) { return (A.array() * B.array()).sum(); }

// c(x, y) = int int_{0 < v1 < v2 < 1} y(v1) ^ y(v2), y(v) = exp(v hat(x)) y. It
// carries the second-order term of exp(hat(x + e y)) = (I + e P + e^2 Q2) exp(hat(x)),
// Q2 = P^2/2 + hat(c)/2, P = hat(J_l(x) y).
Vec3 secondOrderTerm(const Vec3 &x, const Vec3 &y) {
    const auto &rule = gaussLegendre(8);
    std::array<Vec3, 8> outer;
    Vec3 c = Vec3::Zero();
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double v2 = rule.nodes[i];
        const Vec3 y2 = expSO3(v2 * x) * y;
        Vec3 inner = Vec3::Zero();
        for (std::size_t l = 0; l < rule.nodes.size(); ++l)
            inner += rule.weights[l] * (expSO3(v2 * rule.nodes[l] * x) * y);
        c += rule.weights[i] * v2 * inner.cross(y2);
    }
    return c;
}

} // namespace

Mat3 RodProblem::stiffness(const FramePoint &p) const {
    const double E = material.young();
    const auto &c = section.constants;
    return E * c.I1 * p.n2 * p.n2.transpose() + E * c.I2 * p.n1 * p.n1.transpose() +
           0.5 * material.mu * c.K * p.t * p.t.transpose();
}

double RodProblem::coercivityConstant() const {
    const double E = material.young();
    const auto &c = section.constants;
    return std::min({E * c.I1, E * c.I2, 0.5 * material.mu * c.K});
}

void RodProblem::validate() const {
    require(frame != nullptr, "rod problem: frame field required");
    require(section.section != nullptr, "rod problem: cross-section required");
    validateGrid(grid);
    require(std::abs(grid.back() - frame->line().length()) <= 1e-12 * std::max(1.0, grid.back()),
            "rod problem: grid must end at the rod length");
    require(material.mu > 0.0 && material.lambda >= 0.0, "rod problem: invalid material");
    require(coercivityConstant() > 0.0, "rod problem: degenerate section constants");
}

RodProblem makeRodProblem(std::shared_ptr<const FrameField> frame, SectionData section, Material material,
                          int intervals) {
    RodProblem problem;
    const double L = frame->line().length();
    problem.frame = std::move(frame);
    problem.section = std::move(section);
    problem.material = material;
    problem.grid = uniformGrid(L, intervals);
    problem.validate();
    return problem;
}

GateReport checkUniquenessGate(const RodProblem &problem, const LoadMatrix &loads) {
    GateReport report;
    report.loadNorm = loads.l2Norm();
    report.threshold = problem.coercivityConstant() / std::pow(problem.length(), 1.5);
    report.passed = report.loadNorm < report.threshold * (1.0 - 1e-12);
    return report;
}

ReducedFunctional::ReducedFunctional(const RodProblem &problem, const LoadMatrix &loads) : m_grid(problem.grid) {
    problem.validate();
    require(loads.grid() == problem.grid, "reduced functional: load matrix grid differs from the rod grid");
    m_zeroLoads = loads.isZero();
    const auto &g2 = gaussLegendre(2);
    const auto &g4 = gaussLegendre(4);
    m_intervals.resize(m_grid.size() - 1);
    for (std::size_t k = 0; k + 1 < m_grid.size(); ++k) {
        Interval &iv = m_intervals[k];
        iv.a = m_grid[k];
        iv.h = m_grid[k + 1] - iv.a;
        for (std::size_t q = 0; q < g2.nodes.size(); ++q)
            iv.Q += g2.weights[q] * iv.h * problem.stiffness(problem.frame->at(iv.a + g2.nodes[q] * iv.h));
        for (std::size_t q = 0; q < 4; ++q) {
            iv.tau[q] = g4.nodes[q] * iv.h;
            iv.weight[q] = g4.weights[q] * iv.h;
            iv.G[q] = m_zeroLoads ? Mat3::Zero() : loads.at(iv.a + iv.tau[q]).G;
        }
    }
}

void ReducedFunctional::checkSize(const std::vector<Vec3> &a) const {
    require(a.size() == m_intervals.size(), "reduced functional: generator size differs from the interval count");
}

std::vector<Mat3> ReducedFunctional::nodeRotations(const std::vector<Vec3> &a) const {
    std::vector<Mat3> R(m_intervals.size() + 1);
    R[0] = Mat3::Identity();
    for (std::size_t k = 0; k < m_intervals.size(); ++k) R[k + 1] = R[k] * expSO3(m_intervals[k].h * a[k]);
    return R;
}

double ReducedFunctional::elasticEnergy(const std::vector<Vec3> &a) const {
    checkSize(a);
    double e = 0.0;
    for (std::size_t k = 0; k < m_intervals.size(); ++k) e += 0.5 * a[k].dot(m_intervals[k].Q * a[k]);
    return e;
}

double ReducedFunctional::loadWork(const std::vector<Vec3> &a) const {
    checkSize(a);
    if (m_zeroLoads) return 0.0;
    const auto R = nodeRotations(a);
    double w = 0.0;
    for (std::size_t k = 0; k < m_intervals.size(); ++k) {
        const Interval &iv = m_intervals[k];
        for (int q = 0; q < 4; ++q) {
            const Mat3 Rq = R[k] * expSO3(iv.tau[q] * a[k]);
            w += iv.weight[q] * inner(iv.G[q], Rq - Mat3::Identity());
        }
    }
    return w;
}

std::vector<Vec3> ReducedFunctional::loadGradient(const std::vector<Vec3> &a) const {
    const int M = intervals();
    std::vector<Vec3> g(M, Vec3::Zero());
    if (m_zeroLoads) return g;
    const auto R = nodeRotations(a);
    // y_kq = w_kq axial(G_kq R_kq^T); a perturbation hat(c) R_kq of R_kq
    // changes the work by c . y_kq.
    std::vector<std::array<Vec3, 4>> y(M);
    for (int k = 0; k < M; ++k) {
        const Interval &iv = m_intervals[k];
        for (int q = 0; q < 4; ++q) {
            const Mat3 Rq = R[k] * expSO3(iv.tau[q] * a[k]);
            y[k][q] = iv.weight[q] * axial(iv.G[q] * Rq.transpose());
        }
    }
    Vec3 tail = Vec3::Zero(); // sum over k > j of all y_kq
    for (int j = M - 1; j >= 0; --j) {
        const Interval &iv = m_intervals[j];
        Vec3 gj = iv.h * leftJacobian(iv.h * a[j]).transpose() * (R[j].transpose() * tail);
        for (int q = 0; q < 4; ++q)
            gj += iv.tau[q] * leftJacobian(iv.tau[q] * a[j]).transpose() * (R[j].transpose() * y[j][q]);
        g[j] = -gj;
        for (int q = 0; q < 4; ++q) tail += y[j][q];
    }
    return g;
}

std::vector<Vec3> ReducedFunctional::gradient(const std::vector<Vec3> &a) const {
    checkSize(a);
    std::vector<Vec3> g = loadGradient(a);
    for (std::size_t k = 0; k < m_intervals.size(); ++k) g[k] += m_intervals[k].Q * a[k];
    return g;
}

double ReducedFunctional::derivative(const std::vector<Vec3> &a, const std::vector<Vec3> &b) const {
    checkSize(b);
    const auto g = gradient(a);
    double d = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) d += g[k].dot(b[k]);
    return d;
}

double ReducedFunctional::secondDerivative(const std::vector<Vec3> &a, const std::vector<Vec3> &b) const {
    checkSize(a);
    checkSize(b);
    double value = 0.0;
    for (std::size_t k = 0; k < m_intervals.size(); ++k) value += b[k].dot(m_intervals[k].Q * b[k]);
    if (m_zeroLoads) return value;
    // R_kq(e) = (I + e X_kq + e^2 Y_kq + O(e^3)) R_kq, accumulated left to right
    // with the first- and second-order factors of every exponential
    // transported to the left of the product.
    const auto R = nodeRotations(a);
    Mat3 X = Mat3::Zero(), Y = Mat3::Zero();
    double load = 0.0;
    auto factors = [&](int k, double tau, Mat3 &P, Mat3 &Q) {
        const Vec3 x = tau * a[k], y = tau * b[k];
        P = hat(R[k] * (leftJacobian(x) * y));
        Q = 0.5 * P * P + 0.5 * hat(R[k] * secondOrderTerm(x, y));
    };
    for (int k = 0; k < intervals(); ++k) {
        const Interval &iv = m_intervals[k];
        Mat3 P, Q;
        for (int q = 0; q < 4; ++q) {
            factors(k, iv.tau[q], P, Q);
            const Mat3 Yq = Y + Q + X * P;
            const Mat3 Rq = R[k] * expSO3(iv.tau[q] * a[k]);
            load += iv.weight[q] * inner(iv.G[q] * Rq.transpose(), Yq);
        }
        factors(k, iv.h, P, Q);
        Y += Q + X * P;
        X += P;
    }
    return value - 2.0 * load;
}

std::vector<Vec3> ReducedFunctional::fixedPointMap(const std::vector<Vec3> &a) const {
    checkSize(a);
    auto g = loadGradient(a);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = m_intervals[k].Q.ldlt().solve(-g[k]);
    return g;
}

double ReducedFunctional::residual(const std::vector<Vec3> &a) const {
    const auto target = fixedPointMap(a);
    std::vector<Vec3> diff(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) diff[k] = a[k] - target[k];
    return norm(diff);
}

double ReducedFunctional::norm(const std::vector<Vec3> &b) const {
    checkSize(b);
    double sum = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) sum += 2.0 * m_intervals[k].h * b[k].squaredNorm();
    return std::sqrt(sum);
}

std::vector<Vec3> integrateCenterline(const FrameField &frame, const RotationField &R) {
    const auto &grid = R.grid();
    const auto &rule = gaussLegendre(8);
    std::vector<Vec3> V(grid.size());
    V[0] = frame.at(0.0).M;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double a = grid[k], h = grid[k + 1] - a;
        Vec3 inc = Vec3::Zero();
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double s = a + rule.nodes[q] * h;
            inc += rule.weights[q] * h * (R.evaluate(s) * frame.at(s).t);
        }
        V[k + 1] = V[k] + inc;
    }
    return V;
}

Vec3 evaluateCenterline(const FrameField &frame, const RotationField &R, const std::vector<Vec3> &nodes, double s) {
    const int k = R.intervalOf(s);
    const double a = R.grid()[k], h = s - a;
    Vec3 V = nodes[k];
    if (h == 0.0) return V;
    const auto &rule = gaussLegendre(8);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double x = a + rule.nodes[q] * h;
        V += rule.weights[q] * h * (R.evaluate(x) * frame.at(x).t);
    }
    return V;
}

NonlinearSolution solveNonlinear(const RodProblem &problem, const LoadMatrix &loads, const NonlinearOptions &options) {
    require(options.damping > 0.0 && options.damping <= 1.0, "solve_nonlinear: damping must lie in (0, 1]");
    require(options.tolerance > 0.0, "solve_nonlinear: tolerance must be positive");
    require(options.maxIterations >= 1, "solve_nonlinear: max iterations must be positive");
    const ReducedFunctional functional(problem, loads);
    const int M = functional.intervals();
    std::vector<Vec3> a(M, Vec3::Zero());
    if (options.initialGenerator) {
        require(static_cast<int>(options.initialGenerator->size()) == M,
                "solve_nonlinear: initial generator size differs from the interval count");
        a = *options.initialGenerator;
    }

    NonlinearSolution sol;
    sol.gate = checkUniquenessGate(problem, loads);
    const double rho = options.damping;
    double step = std::numeric_limits<double>::infinity();
    int it = 0;
    while (true) {
        ++it;
        const auto target = functional.fixedPointMap(a);
        std::vector<Vec3> next(M), diff(M);
        for (int k = 0; k < M; ++k) {
            next[k] = (1.0 - rho) * a[k] + rho * target[k];
            diff[k] = next[k] - a[k];
        }
        step = functional.norm(diff);
        const double scale = 1.0 + functional.norm(a);
        a = std::move(next);
        if (!std::isfinite(step)) break;
        if (step <= options.tolerance * scale) break;
        if (it >= options.maxIterations) break;
    }
    const double res = functional.residual(a);
    if (!std::isfinite(step) || step > options.tolerance * (1.0 + functional.norm(a)) || res > 1e-8) {
        std::ostringstream msg;
        msg << "solve_nonlinear: fixed-point iteration did not converge after " << it
            << " iterations (residual " << res << "); retry with smaller damping";
        throw NonConvergenceError(msg.str(), res, it);
    }
    sol.generator = a;
    sol.rotation = integrateGenerator(problem.grid, a);
    sol.centerline = integrateCenterline(*problem.frame, sol.rotation);
    sol.stretching.assign(problem.grid.size(), Vec3::Zero());
    sol.energy = functional.energy(a);
    sol.residual = res;
    sol.iterations = it;
    return sol;
}

NonlinearEnergy energyFNL(const RodProblem &problem, const LoadMatrix &loads, const std::vector<Vec3> &centerline,
                          const RotationField &R) {
    problem.validate();
    require(R.grid() == problem.grid, "energy_F_NL: rotation field grid differs from the rod grid");
    require(centerline.size() == problem.grid.size(), "energy_F_NL: centerline needs one value per grid node");
    require((R.values()[0] - Mat3::Identity()).norm() <= 1e-12, "energy_F_NL: R(0) must be the identity");
    const FrameField &frame = *problem.frame;
    const auto expected = integrateCenterline(frame, R);
    double scale = 0.0;
    for (const auto &v : expected) scale = std::max(scale, v.norm());
    for (std::size_t k = 0; k < expected.size(); ++k)
        require((centerline[k] - expected[k]).norm() <= 1e-10 * (1.0 + scale),
                "energy_F_NL: centerline must satisfy V(0) = M(0) and dV/ds = R t");

    const double E = problem.material.young();
    const auto &c = problem.section.constants;
    const double mu = problem.material.mu;
    const auto &g2 = gaussLegendre(2);
    const auto &g4 = gaussLegendre(4);
    double elastic = 0.0, work = 0.0;
    const auto &grid = problem.grid;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double a = grid[k], h = grid[k + 1] - a;
        for (std::size_t q = 0; q < g2.nodes.size(); ++q) {
            const double s = a + g2.nodes[q] * h;
            const FramePoint p = frame.at(s);
            const Mat3 Rs = R.evaluate(s), dR = R.derivative(s);
            const double b1 = (dR * p.t).dot(Rs * p.n1);
            const double b2 = (dR * p.t).dot(Rs * p.n2);
            const double tw = (dR * p.n1).dot(Rs * p.n2);
            elastic += g2.weights[q] * h * (0.5 * E * c.I1 * b1 * b1 + 0.5 * E * c.I2 * b2 * b2 + 0.25 * mu * c.K * tw * tw);
        }
        if (loads.isZero()) continue;
        for (std::size_t q = 0; q < g4.nodes.size(); ++q) {
            const double s = a + g4.nodes[q] * h;
            const FramePoint p = frame.at(s);
            const LoadPoint lp = loads.local(p);
            const Mat3 RmI = R.evaluate(s) - Mat3::Identity();
            const Vec3 V = evaluateCenterline(frame, R, centerline, s);
            work += g4.weights[q] * h * (lp.F.dot(V - p.M) + lp.G1.dot(RmI * p.n1) + lp.G2.dot(RmI * p.n2));
        }
    }
    NonlinearEnergy out;
    out.value = elastic - work;
    out.reduced = ReducedFunctional(problem, loads).energy(R.generator());
    if (std::abs(out.value - out.reduced) > 1e-10 * (1.0 + std::abs(out.value))) {
        std::ostringstream msg;
        msg << "energy_F_NL: direct value " << out.value << " differs from the reduced functional " << out.reduced;
        throw ValidationError(msg.str());
    }
    return out;
}

} // namespace rodlimit
