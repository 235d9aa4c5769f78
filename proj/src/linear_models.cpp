#include "rodlimit/linear_models.hpp"

#include "rodlimit/error.hpp"
#include "rodlimit/quadrature.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rodlimit {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

void addBlock(std::vector<Triplet> &triplets, int i, int j, const Mat3 &B) {
    if (i < 0 || j < 0) return; // node 0 is clamped
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            if (B(r, c) != 0.0) triplets.emplace_back(3 * i + r, 3 * j + c, B(r, c));
}

// Assembles and solves the P1 system; `ftilde` adds the coupling term.
LinearSolution solveBendingTorsion(const RodProblem &problem, const LoadMatrix &loads, const ScalarProfile *ftilde,
                                   const char *context) {
    problem.validate();
    require(loads.grid() == problem.grid, std::string(context) + ": load matrix grid differs from the rod grid");
    const FrameField &frame = *problem.frame;
    const auto &grid = problem.grid;
    const int M = problem.intervals();
    const int n = 3 * M;
    const double area = problem.section.constants.area;
    const auto &g2 = gaussLegendre(2);
    const auto &g4 = gaussLegendre(4);

    std::vector<Triplet> triplets;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    // Unknown index of node i is i - 1.
    for (int k = 0; k < M; ++k) {
        const double a = grid[k], h = grid[k + 1] - a;
        Mat3 Q = Mat3::Zero();
        for (std::size_t q = 0; q < g2.nodes.size(); ++q)
            Q += g2.weights[q] * h * problem.stiffness(frame.at(a + g2.nodes[q] * h));
        const Mat3 S = Q / (h * h);
        std::array<std::array<Mat3, 2>, 2> blocks{{{S, -S}, {-S, S}}};
        for (std::size_t q = 0; q < g4.nodes.size(); ++q) {
            const double xi = g4.nodes[q], s = a + xi * h, w = g4.weights[q] * h;
            const FramePoint p = frame.at(s);
            const double N[2] = {1.0 - xi, xi};
            if (!loads.isZero()) {
                const LoadPoint lp = loads.at(p);
                const Vec3 phi = p.t.cross(lp.T) + p.n1.cross(lp.G1) + p.n2.cross(lp.G2);
                for (int i = 0; i < 2; ++i)
                    if (k + i > 0) b.segment<3>(3 * (k + i - 1)) += w * N[i] * phi;
            }
            if (ftilde) {
                // |Rc ^ t|^2 = Rc^T (I - t t^T) Rc
                const Mat3 C = area * (*ftilde)(s) * (Mat3::Identity() - p.t * p.t.transpose());
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) blocks[i][j] += w * N[i] * N[j] * C;
            }
        }
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) addBlock(triplets, k + i - 1, k + j - 1, blocks[i][j]);
    }
    SparseMatrix K(n, n);
    K.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SimplicialLLT<SparseMatrix> llt(K);
    if (llt.info() != Eigen::Success) {
        throw ValidationError(std::string(context) +
                              ": the quadratic form is not positive definite (singular or indefinite system)");
    }
    const Eigen::VectorXd x = llt.solve(b);
    require(llt.info() == Eigen::Success && x.allFinite(), std::string(context) + ": factorization failed");

    LinearSolution sol;
    sol.grid = grid;
    sol.rotation.assign(M + 1, Vec3::Zero());
    for (int i = 1; i <= M; ++i) sol.rotation[i] = x.segment<3>(3 * (i - 1));
    sol.gradientNorm = (K * x - b).lpNorm<Eigen::Infinity>();
    sol.energy = -0.5 * b.dot(x);
    sol.stretching.assign(M + 1, Vec3::Zero());
    sol.displacement.assign(M + 1, Vec3::Zero());
    const auto &g8 = gaussLegendre(8);
    for (int k = 0; k < M; ++k) {
        const double a = grid[k], h = grid[k + 1] - a;
        Vec3 inc = Vec3::Zero();
        for (std::size_t q = 0; q < g8.nodes.size(); ++q) {
            const double xi = g8.nodes[q];
            const Vec3 r = (1.0 - xi) * sol.rotation[k] + xi * sol.rotation[k + 1];
            inc += g8.weights[q] * h * r.cross(frame.at(a + xi * h).t);
        }
        sol.displacement[k + 1] = sol.displacement[k] + inc;
    }
    return sol;
}

// int_0^L ftilde^2, exact for polynomial profiles.
double ftildeSquaredIntegral(const ScalarProfile &ftilde, const std::vector<double> &grid) {
    const int n = std::max(4, ftilde.degree() + 1);
    const auto &rule = gaussLegendre(n);
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double a = grid[k], h = grid[k + 1] - a;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double v = ftilde(a + rule.nodes[q] * h);
            sum += rule.weights[q] * h * v * v;
        }
    }
    return sum;
}

// U_E at the nodes from its axial strain e(s): dU_E/ds = e(s) t(s).
template <class Strain>
std::vector<Vec3> integrateExtensional(const FrameField &frame, const std::vector<double> &grid, Strain strain) {
    const auto &g8 = gaussLegendre(8);
    std::vector<Vec3> U(grid.size(), Vec3::Zero());
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double a = grid[k], h = grid[k + 1] - a;
        Vec3 inc = Vec3::Zero();
        for (std::size_t q = 0; q < g8.nodes.size(); ++q) {
            const double xi = g8.nodes[q], s = a + xi * h;
            inc += g8.weights[q] * h * strain(static_cast<int>(k), xi, s) * frame.at(s).t;
        }
        U[k + 1] = U[k] + inc;
    }
    return U;
}

} // namespace

int LinearSolution::intervalOf(double s) const {
    const auto it = std::upper_bound(grid.begin(), grid.end(), s);
    int k = it == grid.begin() ? 0 : static_cast<int>(it - grid.begin()) - 1;
    return std::min(k, static_cast<int>(grid.size()) - 2);
}

Vec3 LinearSolution::rotationAt(double s) const {
    const int k = intervalOf(s);
    const double xi = (s - grid[k]) / (grid[k + 1] - grid[k]);
    return (1.0 - xi) * rotation[k] + xi * rotation[k + 1];
}

Vec3 LinearSolution::rotationSlope(int k) const {
    return (rotation[k + 1] - rotation[k]) / (grid[k + 1] - grid[k]);
}

Vec3 evaluateDisplacement(const FrameField &frame, const LinearSolution &sol, double s) {
    const int k = sol.intervalOf(s);
    const double a = sol.grid[k], h = s - a;
    Vec3 U = sol.displacement[k];
    if (h == 0.0) return U;
    const auto &g8 = gaussLegendre(8);
    for (std::size_t q = 0; q < g8.nodes.size(); ++q) {
        const double x = a + g8.nodes[q] * h;
        U += g8.weights[q] * h * sol.rotationAt(x).cross(frame.at(x).t);
    }
    return U;
}

LinearSolution solveLinear(const RodProblem &problem, const LoadMatrix &loads) {
    return solveBendingTorsion(problem, loads, nullptr, "solve_linear");
}

LinearSolution solveExtensional(const RodProblem &problem, const LoadProfile &loads) {
    problem.validate();
    require(loads.ftilde.has_value(), "solve_extensional: the extensional load ftilde is required");
    const ScalarProfile &ft = *loads.ftilde;
    const FrameField &frame = *problem.frame;
    const auto &grid = problem.grid;
    const double L = problem.length();
    ft.requireCovers(L, "solve_extensional: ftilde");
    LinearSolution sol;
    sol.grid = grid;

    if (!loads.f.isZero()) {
        // int_s^L f = ftilde(s) t(s) at every node.
        loads.f.requireCovers(L, "solve_extensional: f");
        const auto &g8 = gaussLegendre(8);
        Vec3 tail = Vec3::Zero();
        double scale = 0.0;
        std::vector<Vec3> tails(grid.size(), Vec3::Zero());
        for (int k = static_cast<int>(grid.size()) - 2; k >= 0; --k) {
            const double a = grid[k], h = grid[k + 1] - a;
            for (std::size_t q = 0; q < g8.nodes.size(); ++q) tail += g8.weights[q] * h * loads.f(a + g8.nodes[q] * h);
            tails[k] = tail;
            scale = std::max(scale, tail.norm());
        }
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const FramePoint p = frame.at(grid[k]);
            if ((tails[k] - ft(grid[k]) * p.t).norm() > 1e-8 * std::max(1.0, scale)) {
                std::ostringstream msg;
                msg << "solve_extensional: int_s^L f differs from ftilde t at s3 = " << grid[k];
                throw ValidationError(msg.str());
            }
        }
    }
    if (std::abs(loads.kappa - 3.0) < 1e-12) {
        for (double s : grid)
            if (ft(s) < 0.0) {
                std::ostringstream msg;
                msg << "ftilde is negative at s3 = " << s << "; the kappa = 3 sign condition fails";
                sol.warnings.push_back(msg.str());
                break;
            }
    }
    const double E = problem.material.young();
    const double area = problem.section.constants.area;
    const std::size_t n = grid.size();
    sol.rotation.assign(n, Vec3::Zero());
    sol.displacement.assign(n, Vec3::Zero());
    sol.stretching.assign(n, Vec3::Zero());
    sol.extensional = integrateExtensional(frame, grid, [&](int, double, double s) { return ft(s) / E; });
    sol.energy = -area / (2.0 * E) * ftildeSquaredIntegral(ft, grid);
    return sol;
}

LinearSolution solveCoupled(const RodProblem &problem, const LoadProfile &loads, const LoadMatrix &bendingLoads) {
    require(loads.ftilde.has_value(), "solve_coupled: the extensional load ftilde is required");
    const ScalarProfile &ft = *loads.ftilde;
    ft.requireCovers(problem.length(), "solve_coupled: ftilde");
    LinearSolution sol = solveBendingTorsion(problem, bendingLoads, &ft, "solve_coupled");
    const double E = problem.material.young();
    const double area = problem.section.constants.area;
    const FrameField &frame = *problem.frame;
    sol.extensional = integrateExtensional(frame, problem.grid, [&](int k, double xi, double s) {
        const Vec3 r = (1.0 - xi) * sol.rotation[k] + xi * sol.rotation[k + 1];
        return ft(s) / E - 0.5 * r.cross(frame.at(s).t).squaredNorm();
    });
    sol.energy -= area / (2.0 * E) * ftildeSquaredIntegral(ft, problem.grid);
    return sol;
}

} // namespace rodlimit
