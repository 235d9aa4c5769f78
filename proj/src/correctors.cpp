#include "rodlimit/correctors.hpp"

#include "rodlimit/error.hpp"
#include "rodlimit/quadrature.hpp"

#include <algorithm>

namespace rodlimit {

StrainComponents strainComponents(const Vec3 &c, const FramePoint &p) {
    return {c.dot(p.n2), -c.dot(p.n1), c.dot(p.t)};
}

Vec3 warpingComponents(const StrainComponents &k, const SectionPoint &S, double nu, const SectionConstants &constants) {
    const double m1 = (constants.I1 - constants.I2) / (2.0 * constants.area);
    const double m12 = constants.productMoment / constants.area;
    const double a = 0.5 * (S.S1 * S.S1 - S.S2 * S.S2) - m1;
    const double b = S.S1 * S.S2 - m12;
    return Vec3(nu * (a * k.kappa1 + b * k.kappa2), nu * (b * k.kappa1 - a * k.kappa2), S.chi * k.tau);
}

Eigen::Matrix<double, 3, 2> warpingGradient(const StrainComponents &k, const SectionPoint &S, double nu) {
    Eigen::Matrix<double, 3, 2> D;
    D(0, 0) = nu * (S.S1 * k.kappa1 + S.S2 * k.kappa2);
    D(0, 1) = nu * (-S.S2 * k.kappa1 + S.S1 * k.kappa2);
    D(1, 0) = nu * (S.S2 * k.kappa1 - S.S1 * k.kappa2);
    D(1, 1) = nu * (S.S1 * k.kappa1 + S.S2 * k.kappa2);
    D(2, 0) = S.chi1 * k.tau;
    D(2, 1) = S.chi2 * k.tau;
    return D;
}

Mat3 correctorStrain(const StrainComponents &k, const SectionPoint &S, double nu) {
    const double E33 = -S.S1 * k.kappa1 - S.S2 * k.kappa2;
    Mat3 E = Mat3::Zero();
    E(0, 0) = E(1, 1) = -nu * E33;
    E(2, 2) = E33;
    E(0, 2) = E(2, 0) = 0.5 * (S.chi1 - S.S2) * k.tau;
    E(1, 2) = E(2, 1) = 0.5 * (S.chi2 + S.S1) * k.tau;
    return E;
}

StrainComponents CorrectorField::at(const FrameField &frame, double s) const {
    const auto it = std::upper_bound(grid.begin(), grid.end(), s);
    int k = it == grid.begin() ? 0 : static_cast<int>(it - grid.begin()) - 1;
    k = std::min(k, static_cast<int>(grid.size()) - 2);
    return strainComponents(curvature[k], frame.at(s));
}

double CorrectorField::energy(const FrameField &frame, const std::vector<SectionPoint> &section,
                              const Material &material) const {
    const auto &g2 = gaussLegendre(2);
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double a = grid[k], h = grid[k + 1] - a;
        for (std::size_t q = 0; q < g2.nodes.size(); ++q) {
            const StrainComponents sc = strainComponents(curvature[k], frame.at(a + g2.nodes[q] * h));
            double local = 0.0;
            for (const auto &S : section) {
                const Mat3 E = correctorStrain(sc, S, nu);
                const double tr = E.trace();
                local += S.weight * (0.5 * material.lambda * tr * tr + material.mu * E.squaredNorm());
            }
            sum += g2.weights[q] * h * local;
        }
    }
    return sum;
}

namespace {

CorrectorField buildField(const RodProblem &problem, std::vector<Vec3> curvature) {
    CorrectorField field;
    field.grid = problem.grid;
    field.nu = problem.material.poisson();
    field.constants = problem.section.constants;
    field.stretching.assign(problem.grid.size(), Vec3::Zero());
    for (std::size_t k = 0; k + 1 < problem.grid.size(); ++k) {
        const double mid = 0.5 * (problem.grid[k] + problem.grid[k + 1]);
        field.strain.push_back(strainComponents(curvature[k], problem.frame->at(mid)));
    }
    field.curvature = std::move(curvature);
    return field;
}

} // namespace

CorrectorField nonlinearCorrectors(const RodProblem &problem, const NonlinearSolution &solution) {
    require(solution.generator.size() + 1 == problem.grid.size(),
            "nonlinear correctors: solution does not match the rod grid");
    return buildField(problem, solution.generator);
}

CorrectorField linearCorrectors(const RodProblem &problem, const LinearSolution &solution) {
    require(solution.grid == problem.grid, "linear correctors: solution does not match the rod grid");
    std::vector<Vec3> slopes;
    for (int k = 0; k + 1 < static_cast<int>(problem.grid.size()); ++k) slopes.push_back(solution.rotationSlope(k));
    return buildField(problem, std::move(slopes));
}

} // namespace rodlimit
