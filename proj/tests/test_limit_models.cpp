#include "doctest.h"
#include "test_fixtures.hpp"
#include "test_support.hpp"

#include "rodlimit/correctors.hpp"
#include "rodlimit/error.hpp"
#include "rodlimit/linear_models.hpp"
#include "rodlimit/loads.hpp"
#include "rodlimit/nonlinear_model.hpp"
#include "rodlimit/quadrature.hpp"

#include <numbers>

using namespace rodlimit;
using namespace rodlimit::testing;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<Vec3> randomField(int M, double scale) {
    std::vector<Vec3> a(M);
    for (auto &v : a) v = randomVec(scale);
    return a;
}

// Loads with both a line force and a zero-mean section force.
LoadProfile mixedLoads(double size) {
    LoadProfile l;
    l.f = VectorProfile::polynomial({Vec3(0.3, -0.2, 0.1) * size, Vec3(-0.1, 0.25, 0.05) * size});
    l.g.push_back({1, 0, VectorProfile::polynomial({Vec3(0.0, 0.4, -0.2) * size, Vec3(0.1, 0.0, 0.3) * size})});
    l.g.push_back({0, 1, VectorProfile::polynomial({Vec3(0.2, 0.1, 0.0) * size})});
    return l;
}

struct Setup {
    RodProblem problem;
    LoadProfile profile;
    std::shared_ptr<LoadMatrix> loads;
};

Setup makeSetup(std::shared_ptr<const FrameField> frame, const SectionData &section, const LoadProfile &profile,
                int M, Material material = Material{1.0, 1.0}) {
    Setup s;
    s.problem = makeRodProblem(frame, section, material, M);
    s.profile = profile;
    s.loads = std::make_shared<LoadMatrix>(assembleLoadMatrix(profile, frame, *section.section, s.problem.grid));
    return s;
}

std::vector<Vec3> axpy(const std::vector<Vec3> &a, double e, const std::vector<Vec3> &b) {
    std::vector<Vec3> out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] + e * b[k];
    return out;
}

} // namespace

TEST_SUITE("limit_models") {

TEST_CASE("material constants and load profiles") {
    const Material m{1.0, 1.0};
    CHECK(m.young() == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(m.poisson() == doctest::Approx(0.25).epsilon(1e-15));
    const Material back = Material::fromYoungPoisson(m.young(), m.poisson());
    CHECK(back.lambda == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(back.mu == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(Material::fromLame(1.0, 0.0), ValidationError);
    CHECK_THROWS_AS(Material::fromYoungPoisson(1.0, 0.5), ValidationError);

    const auto p = ScalarProfile::polynomial({1.0, -2.0, 3.0});
    CHECK(p(2.0) == doctest::Approx(9.0));
    CHECK(p.degree() == 2);
    const auto t = VectorProfile::table({0.0, 1.0, 2.0}, {Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(2, 4, 0)});
    CHECK((t(0.5) - Vec3(1, 0, 0)).norm() < 1e-15);
    CHECK((t(1.5) - Vec3(2, 2, 0)).norm() < 1e-15);
    CHECK_THROWS_AS(t.requireCovers(3.0, "t"), ValidationError);
    CHECK_THROWS_AS(ScalarProfile::table({0.0, 0.0}, {1.0, 2.0}), ValidationError);
    CHECK(VectorProfile().isZero());
}

TEST_CASE("load matrix closed forms") {
    const auto frame = straightFrame(2.0);
    const auto &sec = discSection();
    const auto grid = uniformGrid(2.0, 20);

    SUBCASE("zero loads give a zero matrix") {
        const LoadMatrix G(LoadProfile{}, frame, *sec.section, grid);
        CHECK(G.isZero());
        CHECK(G.l2Norm() == 0.0);
        CHECK(G.at(0.7).G.norm() == 0.0);
    }
    SUBCASE("constant line force on a straight rod") {
        LoadProfile l;
        const double f0 = 0.7;
        l.f = constantVec(f0 * Vec3::UnitX());
        const LoadMatrix G = assembleLoadMatrix(l, frame, *sec.section, grid);
        for (double s : {0.0, 0.33, 1.0, 1.71, 2.0}) {
            const Mat3 expected = sec.constants.area * (2.0 - s) * f0 * Vec3::UnitX() * Vec3::UnitZ().transpose();
            CHECK((G.at(s).G - expected).norm() < 1e-12);
        }
    }
    SUBCASE("linear section force on the disc") {
        LoadProfile l;
        l.g.push_back({1, 0, VectorProfile::polynomial({Vec3(0, 1, 0), Vec3(0, 0.5, 0)})});
        const LoadMatrix G = assembleLoadMatrix(l, frame, *sec.section, grid);
        for (double s : {0.1, 0.9, 1.6}) {
            const double c = 1.0 + 0.5 * s;
            const FramePoint p = frame->at(s);
            const Mat3 exact = sec.constants.I1 * c * Vec3::UnitY() * p.n1.transpose();
            CHECK((G.at(s).G - exact).norm() < 1e-13);
            // The mesh moment approximates the disc value pi/4.
            const Mat3 disc = pi / 4.0 * c * Vec3::UnitY() * p.n1.transpose();
            CHECK((G.at(s).G - disc).norm() < 5e-3 * disc.norm());
        }
    }
    SUBCASE("section forces with nonzero mean are rejected") {
        LoadProfile l;
        l.g.push_back({2, 0, constantVec(Vec3::UnitX())});
        CHECK_THROWS_AS(LoadMatrix(l, frame, *sec.section, grid), ValidationError);
        // Subtracting the mean makes it admissible.
        l.g.push_back({0, 0, constantVec(-sec.constants.I1 / sec.constants.area * Vec3::UnitX())});
        CHECK_NOTHROW(LoadMatrix(l, frame, *sec.section, grid));
    }
    SUBCASE("kappa below two is rejected") {
        LoadProfile l;
        l.kappa = 1.5;
        CHECK_THROWS_AS(LoadMatrix(l, frame, *sec.section, grid), ValidationError);
    }
}

TEST_CASE("load matrix defining identity on curved rods") {
    const auto &sec = rectangleSection();
    for (const auto &frame : {arcFrame(1.5, 2.0), helixFrame(1.0, 0.4, 2.5)}) {
        const double L = frame->line().length();
        const auto grid = uniformGrid(L, 12);
        const LoadProfile l = mixedLoads(1.0);
        const LoadMatrix G(l, frame, *sec.section, grid);
        for (int trial = 0; trial < 5; ++trial) {
            const RotationField R = integrateGenerator(uniformGrid(L, 9), randomField(9, 1.2));
            const auto [direct, viaG] = loadWorkBothWays(G, l, *frame, *sec.section, R);
            CHECK(std::abs(direct - viaG) <= 1e-10 * std::max(1.0, std::abs(direct)));
            CHECK(std::abs(direct) > 1e-4);
        }
        CHECK_NOTHROW(verifyLoadIdentity(G, l, *frame, *sec.section));
    }
}

TEST_CASE("reduced functional closed forms") {
    const auto frame = straightFrame(1.5);
    const auto &sec = discSection();
    const Material mat{1.0, 1.0};
    SUBCASE("pure torsion on a straight rod") {
        const Setup s = makeSetup(frame, sec, LoadProfile{}, 10, mat);
        const ReducedFunctional G(s.problem, *s.loads);
        const double c = 0.8;
        const std::vector<Vec3> a(10, Vec3(0, 0, c));
        CHECK(G.energy(a) == doctest::Approx(mat.mu * sec.constants.K / 4.0 * 1.5 * c * c).epsilon(1e-13));
    }
    SUBCASE("zero generator and nonnegativity without loads") {
        const Setup loaded = makeSetup(arcFrame(1.0, 1.0), sec, mixedLoads(1.0), 10, mat);
        const ReducedFunctional GL(loaded.problem, *loaded.loads);
        CHECK(GL.energy(std::vector<Vec3>(10, Vec3::Zero())) == 0.0);
        const Setup free = makeSetup(arcFrame(1.0, 1.0), sec, LoadProfile{}, 10, mat);
        const ReducedFunctional G(free.problem, *free.loads);
        for (int i = 0; i < 100; ++i) CHECK(G.energy(randomField(10, 3.0)) >= 0.0);
        for (const Vec3 &g : G.gradient(std::vector<Vec3>(10, Vec3::Zero()))) CHECK(g.norm() == 0.0);
    }
    SUBCASE("frame components of an antisymmetric matrix are complete") {
        for (int i = 0; i < 50; ++i) {
            const Vec3 a = randomVec(2.0);
            const FramePoint p = helixFrame(1.0, 0.3, 2.0)->at(uniform(0.0, 2.0));
            const Mat3 A = hat(a);
            const double sum = std::pow((A * p.t).dot(p.n1), 2) + std::pow((A * p.t).dot(p.n2), 2) +
                               std::pow((A * p.n1).dot(p.n2), 2);
            CHECK(A.squaredNorm() == doctest::Approx(2.0 * sum).epsilon(1e-13));
        }
    }
    SUBCASE("zero-load Hessian is the elastic form") {
        const auto helix = helixFrame(1.0, 0.3, 2.0);
        const Setup s = makeSetup(helix, rectangleSection(), LoadProfile{}, 8, mat);
        const ReducedFunctional G(s.problem, *s.loads);
        const auto &c = s.problem.section.constants;
        const double E = mat.young();
        const auto b = randomField(8, 1.0);
        double expected = 0.0;
        const auto &g2 = gaussLegendre(2);
        for (int k = 0; k < 8; ++k) {
            const double a0 = s.problem.grid[k], h = s.problem.grid[k + 1] - a0;
            for (int q = 0; q < 2; ++q) {
                const FramePoint p = helix->at(a0 + g2.nodes[q] * h);
                const Mat3 B = hat(b[k]);
                expected += g2.weights[q] * h *
                            (E * c.I1 * std::pow((B * p.t).dot(p.n1), 2) + E * c.I2 * std::pow((B * p.t).dot(p.n2), 2) +
                             0.5 * mat.mu * c.K * std::pow((B * p.n1).dot(p.n2), 2));
            }
        }
        CHECK(G.secondDerivative(randomField(8, 2.0), b) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("gradient and Hessian agree with finite differences at order two") {
    const auto &sec = rectangleSection();
    const std::vector<double> eps = {1e-3, 1e-4, 1e-5};
    int cases = 0;
    for (const auto &frame : {straightFrame(1.5), arcFrame(1.0, 2.0), helixFrame(1.0, 0.4, 2.0)}) {
        const Setup s = makeSetup(frame, sec, mixedLoads(2.0), 12);
        const ReducedFunctional G(s.problem, *s.loads);
        for (int trial = 0; trial < 4; ++trial) {
            const auto a = randomField(12, 1.5), b = randomField(12, 1.0);
            const double g0 = G.energy(a), d1 = G.derivative(a, b), d2 = G.secondDerivative(a, b);
            std::vector<double> rg, rh;
            for (double e : eps) {
                const auto ae = axpy(a, e, b);
                rg.push_back(std::abs(G.energy(ae) - g0 - e * d1));
                rh.push_back(std::abs(G.derivative(ae, b) - d1 - e * d2));
            }
            CHECK(logLogSlope(eps, rg) >= 1.9);
            CHECK(logLogSlope(eps, rh) >= 1.9);
            ++cases;
        }
    }
    CHECK(cases >= 10);
}

TEST_CASE("uniqueness gate") {
    const auto frame = arcFrame(1.0, 1.0);
    const auto &sec = discSection();
    SUBCASE("zero loads pass") {
        const Setup s = makeSetup(frame, sec, LoadProfile{}, 10);
        const GateReport r = checkUniquenessGate(s.problem, *s.loads);
        CHECK(r.passed);
        CHECK(r.loadNorm == 0.0);
    }
    SUBCASE("loads scaled to the threshold fail") {
        const Setup s = makeSetup(frame, sec, mixedLoads(1.0), 10);
        const GateReport r = checkUniquenessGate(s.problem, *s.loads);
        const LoadMatrix boundary = s.loads->scaled(r.threshold / r.loadNorm);
        CHECK_FALSE(checkUniquenessGate(s.problem, boundary).passed);
        CHECK(checkUniquenessGate(s.problem, s.loads->scaled(0.99 * r.threshold / r.loadNorm)).passed);
    }
    SUBCASE("flag matches a direct norm computation") {
        for (double size : {0.05, 0.3, 1.0, 3.0}) {
            const Setup s = makeSetup(frame, sec, mixedLoads(size), 10);
            const GateReport r = checkUniquenessGate(s.problem, *s.loads);
            // Direct quadrature with a different rule.
            const auto &g6 = gaussLegendre(6);
            double sum = 0.0;
            for (int k = 0; k < 10; ++k)
                for (int q = 0; q < 6; ++q) sum += g6.weights[q] * 0.1 * s.loads->at(0.1 * (k + g6.nodes[q])).G.squaredNorm();
            CHECK(r.loadNorm == doctest::Approx(std::sqrt(sum)).epsilon(1e-10));
            const double threshold = s.problem.coercivityConstant();
            CHECK(r.threshold == doctest::Approx(threshold));
            CHECK(r.passed == (std::sqrt(sum) < threshold));
        }
    }
}

TEST_CASE("nonlinear solver") {
    const auto frame = arcFrame(1.0, 1.0);
    const auto &sec = discSection();
    SUBCASE("zero loads") {
        const Setup s = makeSetup(frame, sec, LoadProfile{}, 16);
        const NonlinearSolution sol = solveNonlinear(s.problem, *s.loads);
        CHECK(sol.iterations == 1);
        CHECK(sol.energy == 0.0);
        for (const Vec3 &a : sol.generator) CHECK(a.norm() == 0.0);
        for (const Mat3 &R : sol.rotation.values()) CHECK(R == Mat3::Identity());
        for (int k = 0; k <= 16; ++k) CHECK((sol.centerline[k] - frame->at(s.problem.grid[k]).M).norm() < 1e-13);
    }
    SUBCASE("converged solution is stationary and unique under the gate") {
        Setup s = makeSetup(frame, sec, mixedLoads(1.0), 24);
        GateReport r = checkUniquenessGate(s.problem, *s.loads);
        // Scale to 60% of the threshold.
        const LoadMatrix loads = s.loads->scaled(0.6 * r.threshold / r.loadNorm);
        REQUIRE(checkUniquenessGate(s.problem, loads).passed);
        const NonlinearSolution sol = solveNonlinear(s.problem, loads);
        const ReducedFunctional G(s.problem, loads);
        CHECK(sol.residual <= 1e-8);
        CHECK(G.norm(sol.generator) > 1e-2);
        for (int i = 0; i < 20; ++i) {
            const auto b = randomField(24, 1.0);
            CHECK(std::abs(G.derivative(sol.generator, b)) <= 1e-8 * G.norm(b));
        }
        for (int i = 0; i < 10; ++i) {
            NonlinearOptions opt;
            opt.initialGenerator = randomField(24, 2.0);
            const NonlinearSolution other = solveNonlinear(s.problem, loads, opt);
            CHECK(G.norm(axpy(other.generator, -1.0, sol.generator)) < 1e-6);
        }
        // d V / ds = R t: compare a nodal increment with the rotation.
        CHECK((sol.rotation.values()[0] - Mat3::Identity()).norm() == 0.0);
        CHECK((sol.centerline[0] - frame->at(0.0).M).norm() == 0.0);
    }
    SUBCASE("non-convergence is reported") {
        const Setup s = makeSetup(frame, sec, mixedLoads(50.0), 16);
        NonlinearOptions opt;
        opt.damping = 1.0;
        opt.maxIterations = 3;
        CHECK_THROWS_AS(solveNonlinear(s.problem, *s.loads, opt), NonConvergenceError);
        opt.damping = 0.0;
        CHECK_THROWS_AS(solveNonlinear(s.problem, *s.loads, opt), ValidationError);
    }
}

TEST_CASE("sampled convexity bound under the gate") {
    const auto frame = helixFrame(1.0, 0.4, 1.5);
    const Setup s = makeSetup(frame, rectangleSection(), mixedLoads(1.0), 12);
    const GateReport r0 = checkUniquenessGate(s.problem, *s.loads);
    const LoadMatrix loads = s.loads->scaled(0.8 * r0.threshold / r0.loadNorm);
    const GateReport r = checkUniquenessGate(s.problem, loads);
    REQUIRE(r.passed);
    const ReducedFunctional G(s.problem, loads);
    const double L = s.problem.length();
    const double bound = 0.5 * (s.problem.coercivityConstant() - std::pow(L, 1.5) * r.loadNorm);
    for (int i = 0; i < 100; ++i) {
        const auto a = randomField(12, 3.0), b = randomField(12, 1.0);
        const double nb = G.norm(b);
        CHECK(G.secondDerivative(a, b) >= bound * nb * nb);
    }
}

TEST_CASE("F_NL equals the reduced functional") {
    const auto &sec = rectangleSection();
    for (const auto &frame : {arcFrame(1.0, 1.5), helixFrame(1.0, 0.4, 2.0)}) {
        const Setup s = makeSetup(frame, sec, mixedLoads(1.0), 16);
        const ReducedFunctional G(s.problem, *s.loads);
        for (int i = 0; i < 10; ++i) {
            const auto a = randomField(16, 2.0);
            const RotationField R = integrateGenerator(s.problem.grid, a);
            const auto V = integrateCenterline(*frame, R);
            const NonlinearEnergy e = energyFNL(s.problem, *s.loads, V, R);
            CHECK(std::abs(e.value - G.energy(a)) <= 1e-10 * (1.0 + std::abs(e.value)));
        }
        // Inadmissible pairs are rejected.
        const RotationField R = integrateGenerator(s.problem.grid, randomField(16, 1.0));
        auto V = integrateCenterline(*frame, R);
        V[5] += Vec3(1e-3, 0, 0);
        CHECK_THROWS_AS(energyFNL(s.problem, *s.loads, V, R), ValidationError);
        const RotationField shifted = integrateGenerator(s.problem.grid, randomField(16, 1.0), randomRotation());
        CHECK_THROWS_AS(energyFNL(s.problem, *s.loads, integrateCenterline(*frame, shifted), shifted),
                        ValidationError);
    }
    SUBCASE("identity and pure torsion") {
        const auto frame = straightFrame(1.0);
        const Setup s = makeSetup(frame, discSection(), LoadProfile{}, 8);
        const RotationField I = integrateGenerator(s.problem.grid, std::vector<Vec3>(8, Vec3::Zero()));
        CHECK(energyFNL(s.problem, *s.loads, integrateCenterline(*frame, I), I).value == 0.0);
        const double c = 1.3;
        const RotationField T = integrateGenerator(s.problem.grid, std::vector<Vec3>(8, Vec3(0, 0, c)));
        CHECK(energyFNL(s.problem, *s.loads, integrateCenterline(*frame, T), T).value ==
              doctest::Approx(s.problem.material.mu * s.problem.section.constants.K / 4.0 * c * c).epsilon(1e-12));
    }
}

TEST_CASE("linear solver") {
    const auto &sec = discSection();
    SUBCASE("zero loads") {
        const Setup s = makeSetup(arcFrame(1.0, 1.0), sec, LoadProfile{}, 10);
        const LinearSolution sol = solveLinear(s.problem, *s.loads);
        CHECK(sol.energy == 0.0);
        for (const auto &r : sol.rotation) CHECK(r.norm() == 0.0);
        for (const auto &u : sol.displacement) CHECK(u.norm() == 0.0);
    }
    SUBCASE("cantilever under a uniform transverse load") {
        const double L = 1.0, f0 = 0.4;
        const int M = 64;
        LoadProfile l;
        l.f = constantVec(f0 * Vec3::UnitX());
        const Setup s = makeSetup(straightFrame(L), sec, l, M);
        const LinearSolution sol = solveLinear(s.problem, *s.loads);
        const double EI = s.problem.material.young() * sec.constants.I1;
        const double q = sec.constants.area * f0;
        for (int k = 0; k <= M; ++k) {
            const double x = s.problem.grid[k];
            const double exact = q / (2.0 * EI) * (L * L * L - std::pow(L - x, 3)) / 3.0;
            CHECK(sol.rotation[k].y() == doctest::Approx(exact).epsilon(1e-10));
            CHECK(std::abs(sol.rotation[k].x()) + std::abs(sol.rotation[k].z()) < 1e-14);
        }
        // U = int of the P1 rotation; the trapezoid defect of a cubic is exact.
        const double h = L / M;
        const double tipExact = q * std::pow(L, 4) / (8.0 * EI) - h * h * q * L * L / (24.0 * EI);
        CHECK(sol.displacement[M].x() == doctest::Approx(tipExact).epsilon(1e-12));
        CHECK(sol.displacement[M].x() == doctest::Approx(q * std::pow(L, 4) / (8.0 * EI)).epsilon(1e-4));
        CHECK(sol.gradientNorm <= 1e-10 * q);
    }
    SUBCASE("displacement derivative and grid refinement") {
        const auto frame = arcFrame(1.0, 1.5);
        LoadProfile l = mixedLoads(1.0);
        std::vector<double> energies;
        for (int M : {8, 16, 32, 64}) {
            const Setup s = makeSetup(frame, sec, l, M);
            const LinearSolution sol = solveLinear(s.problem, *s.loads);
            energies.push_back(sol.energy);
            // dU/ds = Rc ^ t at every node (one-sided finite difference of the exact U).
            for (int k = 0; k < M; k += M / 4) {
                const double x = s.problem.grid[k], e = 1e-6;
                const Vec3 d = (evaluateDisplacement(*frame, sol, x + e) - evaluateDisplacement(*frame, sol, x)) / e;
                const Vec3 exact = sol.rotation[k].cross(frame->at(x).t);
                CHECK((d - exact).norm() <= 1e-5 * (1.0 + exact.norm()));
            }
            CHECK(sol.rotation[0].norm() == 0.0);
            CHECK(sol.displacement[0].norm() == 0.0);
        }
        for (std::size_t i = 1; i < energies.size(); ++i) CHECK(energies[i] <= energies[i - 1] + 1e-14);
        const double order = std::log2((energies[1] - energies[2]) / (energies[2] - energies[3]));
        CHECK(order >= 1.9);

        // Ten-times finer grid as a self-oracle.
        const Setup coarse = makeSetup(frame, sec, l, 100);
        const Setup fine = makeSetup(frame, sec, l, 1000);
        const auto a = solveLinear(coarse.problem, *coarse.loads), b = solveLinear(fine.problem, *fine.loads);
        double gap = 0.0, ref = 0.0;
        for (int k = 0; k <= 100; ++k) {
            gap = std::max(gap, (a.rotation[k] - b.rotation[10 * k]).norm());
            ref = std::max(ref, b.rotation[10 * k].norm());
        }
        CHECK(gap <= 1e-4 * ref);
    }
}

TEST_CASE("small loads: nonlinear generator approaches the linear slope") {
    const auto frame = arcFrame(1.0, 1.0);
    const Setup s = makeSetup(frame, discSection(), mixedLoads(1.0), 20);
    const LinearSolution lin = solveLinear(s.problem, *s.loads);
    const ReducedFunctional G(s.problem, *s.loads);
    std::vector<Vec3> slope(20);
    for (int k = 0; k < 20; ++k) slope[k] = lin.rotationSlope(k);
    std::vector<double> gaps;
    for (double eta : {0.2, 0.1, 0.05, 0.025}) {
        const NonlinearSolution sol = solveNonlinear(s.problem, s.loads->scaled(eta));
        std::vector<Vec3> scaled(20);
        for (int k = 0; k < 20; ++k) scaled[k] = sol.generator[k] / eta;
        gaps.push_back(G.norm(axpy(scaled, -1.0, slope)) / G.norm(slope));
    }
    for (std::size_t i = 1; i < gaps.size(); ++i) CHECK(gaps[i - 1] / gaps[i] >= 1.8);
}

TEST_CASE("extensional model") {
    const auto &sec = discSection();
    const auto frame = straightFrame(1.0);
    auto problem = makeRodProblem(frame, sec, Material{1.0, 1.0}, 10);
    const double E = problem.material.young(), area = sec.constants.area;
    CHECK(area == doctest::Approx(pi).epsilon(1e-13));
    LoadProfile l;
    SUBCASE("missing ftilde is rejected") { CHECK_THROWS_AS(solveExtensional(problem, l), ValidationError); }
    SUBCASE("constant, linear and cubic ftilde") {
        l.ftilde = ScalarProfile::polynomial({0.0});
        CHECK(solveExtensional(problem, l).energy == 0.0);
        const double c = 0.7;
        l.ftilde = ScalarProfile::polynomial({c});
        LinearSolution sol = solveExtensional(problem, l);
        CHECK(sol.energy == doctest::Approx(-area * c * c / (2.0 * E)).epsilon(1e-13));
        CHECK((sol.extensional.back() - c / E * Vec3::UnitZ()).norm() < 1e-14);
        l.ftilde = ScalarProfile::polynomial({0.0, 1.0});
        CHECK(solveExtensional(problem, l).energy == doctest::Approx(-area / (6.0 * E)).epsilon(1e-13));
        l.ftilde = ScalarProfile::polynomial({0.5, -1.0, 0.0, 2.0});
        // int (0.5 - s + 2 s^3)^2 over [0,1] by exact polynomial arithmetic.
        const double integral = 0.25 - 0.5 + 1.0 / 3.0 + 2.0 * 2.0 * 0.5 / 4.0 - 2.0 * 2.0 / 5.0 + 4.0 / 7.0;
        CHECK(solveExtensional(problem, l).energy == doctest::Approx(-area / (2.0 * E) * integral).epsilon(1e-12));
    }
    SUBCASE("consistency with an explicit line force and membership in D_Ex") {
        const double c = 0.3;
        l.f = constantVec(c * Vec3::UnitZ());
        l.ftilde = ScalarProfile::polynomial({c, -c}); // int_s^1 c e3 = c (1 - s) t
        const LinearSolution sol = solveExtensional(problem, l);
        for (std::size_t k = 1; k < sol.extensional.size(); ++k) {
            const Vec3 d = sol.extensional[k] - sol.extensional[k - 1];
            CHECK(d.cross(Vec3::UnitZ()).norm() < 1e-15);
        }
        l.ftilde = ScalarProfile::polynomial({c});
        CHECK_THROWS_AS(solveExtensional(problem, l), ValidationError);
    }
    SUBCASE("negative ftilde at kappa three warns") {
        l.kappa = 3.0;
        l.ftilde = ScalarProfile::polynomial({-0.1, 0.3});
        const LinearSolution sol = solveExtensional(problem, l);
        CHECK(sol.warnings.size() == 1);
        l.ftilde = ScalarProfile::polynomial({0.1, 0.3});
        CHECK(solveExtensional(problem, l).warnings.empty());
    }
}

TEST_CASE("coupled model") {
    const auto frame = arcFrame(1.0, 1.0);
    const auto &sec = discSection();
    const Setup s = makeSetup(frame, sec, mixedLoads(1.0), 20);
    const double E = s.problem.material.young();
    SUBCASE("zero extensional load reproduces the linear model") {
        LoadProfile l = s.profile;
        l.ftilde = ScalarProfile::polynomial({0.0});
        const LinearSolution lin = solveLinear(s.problem, *s.loads);
        const LinearSolution cpl = solveCoupled(s.problem, l, *s.loads);
        for (int k = 0; k <= 20; ++k) {
            CHECK((lin.rotation[k] - cpl.rotation[k]).norm() <= 1e-12);
            CHECK((lin.displacement[k] - cpl.displacement[k]).norm() <= 1e-12);
        }
        CHECK(cpl.energy == doctest::Approx(lin.energy).epsilon(1e-12));
    }
    SUBCASE("no bending loads decouple") {
        const Setup free = makeSetup(frame, sec, LoadProfile{}, 20);
        LoadProfile l;
        l.ftilde = ScalarProfile::polynomial({0.4, 0.2});
        const LinearSolution cpl = solveCoupled(free.problem, l, *free.loads);
        const LinearSolution ext = solveExtensional(free.problem, l);
        for (int k = 0; k <= 20; ++k) {
            CHECK(cpl.rotation[k].norm() == 0.0);
            CHECK((cpl.extensional[k] - ext.extensional[k]).norm() <= 1e-14);
        }
        CHECK(cpl.energy == doctest::Approx(ext.energy).epsilon(1e-14));
    }
    SUBCASE("continuous dependence on ftilde and the stationarity relation") {
        const LinearSolution lin = solveLinear(s.problem, *s.loads);
        std::vector<double> gaps;
        for (double e : {0.1, 0.05, 0.025}) {
            LoadProfile l = s.profile;
            l.ftilde = ScalarProfile::polynomial({e, e});
            const LinearSolution cpl = solveCoupled(s.problem, l, *s.loads);
            double gap = 0.0;
            for (int k = 0; k <= 20; ++k) gap = std::max(gap, (cpl.rotation[k] - lin.rotation[k]).norm());
            gaps.push_back(gap);
            CHECK(cpl.extensional[0].norm() == 0.0);
        }
        CHECK(gaps[0] / gaps[1] == doctest::Approx(2.0).epsilon(0.05));
        CHECK(gaps[1] / gaps[2] == doctest::Approx(2.0).epsilon(0.05));
    }
    SUBCASE("extensional field of the coupled model on a straight rod") {
        // dU_E/ds = (ftilde / E - |Rc ^ t|^2 / 2) t; with t = e3 the tip value
        // is a polynomial integral, evaluated here with a 3-point rule per
        // half interval (exact for the quartic integrand).
        const auto line = straightFrame(1.0);
        LoadProfile l;
        l.f = constantVec(Vec3(0.5, -0.3, 0.0));
        l.ftilde = ScalarProfile::polynomial({0.2, 0.1});
        const Setup st = makeSetup(line, sec, l, 10);
        const LinearSolution cpl = solveCoupled(st.problem, l, *st.loads);
        const auto &g3 = gaussLegendre(3);
        double tip = 0.0;
        for (int k = 0; k < 20; ++k)
            for (int q = 0; q < 3; ++q) {
                const double x = (k + g3.nodes[q]) / 20.0;
                const Vec3 r = cpl.rotationAt(x);
                tip += g3.weights[q] / 20.0 * ((0.2 + 0.1 * x) / E - 0.5 * r.cross(Vec3::UnitZ()).squaredNorm());
            }
        CHECK(cpl.extensional.back().z() == doctest::Approx(tip).epsilon(1e-13));
        for (const auto &u : cpl.extensional) CHECK(std::hypot(u.x(), u.y()) < 1e-15);
        CHECK(cpl.rotation.back().norm() > 1e-3);
    }
    SUBCASE("strongly negative ftilde makes the form indefinite") {
        LoadProfile l = s.profile;
        l.ftilde = ScalarProfile::polynomial({-1e4});
        CHECK_THROWS_AS(solveCoupled(s.problem, l, *s.loads), ValidationError);
    }
}

TEST_CASE("correctors") {
    const auto &sec = rectangleSection();
    const auto pts = sectionQuadrature(*sec.section, sec.torsion);
    const Material mat{1.0, 1.0};
    const double nu = mat.poisson();
    SUBCASE("zero strain gives zero correctors") {
        for (const auto &S : pts) {
            CHECK(correctorStrain({}, S, nu).norm() == 0.0);
            CHECK(warpingComponents({}, S, nu, sec.constants).norm() == 0.0);
        }
    }
    SUBCASE("pure torsion shear slots") {
        const double c = 0.9;
        const StrainComponents k = strainComponents(Vec3(0, 0, c), straightFrame(1.0)->at(0.3));
        CHECK(k.tau == c);
        for (std::size_t i = 0; i < pts.size(); i += 37) {
            const auto &S = pts[i];
            const Mat3 E = correctorStrain(k, S, nu);
            CHECK(E(0, 2) == doctest::Approx(0.5 * (S.chi1 - S.S2) * c));
            CHECK(E(1, 2) == doctest::Approx(0.5 * (S.chi2 + S.S1) * c));
            CHECK(E(2, 2) == 0.0);
        }
    }
    SUBCASE("transcription, trace identity and zero mean") {
        for (int trial = 0; trial < 10; ++trial) {
            const StrainComponents k{uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)};
            Vec3 mean = Vec3::Zero();
            for (const auto &S : pts) {
                const Vec3 w = warpingComponents(k, S, nu, sec.constants);
                mean += S.weight * w;
                const Mat3 E = correctorStrain(k, S, nu);
                const auto D = warpingGradient(k, S, nu);
                CHECK(E.trace() == doctest::Approx((1.0 - 2.0 * nu) * E(2, 2)).epsilon(1e-14));
                CHECK(E(0, 0) == doctest::Approx(D(0, 0)));
                CHECK(E(1, 1) == doctest::Approx(D(1, 1)));
                CHECK(std::abs(0.5 * (D(0, 1) + D(1, 0))) < 1e-14);
                // Direct formula at the point.
                const double m1 = (sec.constants.I1 - sec.constants.I2) / (2.0 * sec.constants.area);
                const double w1 = nu * ((0.5 * (S.S1 * S.S1 - S.S2 * S.S2) - m1) * k.kappa1 +
                                        (S.S1 * S.S2 - sec.constants.productMoment / sec.constants.area) * k.kappa2);
                CHECK(w.x() == doctest::Approx(w1));
            }
            CHECK(mean.norm() < 1e-12);
        }
    }
    SUBCASE("strain energy of the correctors") {
        // The energy of E integrates to (E/2) int (I1 kappa1^2 + I2 kappa2^2)
        // + (mu K / 2) int tau^2: twice the torsion coefficient of G.
        const auto frame = helixFrame(1.0, 0.3, 1.0);
        const Setup s = makeSetup(frame, sec, mixedLoads(0.5), 8, mat);
        const NonlinearSolution sol = solveNonlinear(s.problem, *s.loads);
        const CorrectorField field = nonlinearCorrectors(s.problem, sol);
        const auto &g2 = gaussLegendre(2);
        double expected = 0.0;
        const double E = mat.young();
        for (int j = 0; j < 8; ++j) {
            const double a = s.problem.grid[j], h = s.problem.grid[j + 1] - a;
            for (int q = 0; q < 2; ++q) {
                const auto k = strainComponents(sol.generator[j], frame->at(a + g2.nodes[q] * h));
                expected += g2.weights[q] * h *
                            (0.5 * E * (sec.constants.I1 * k.kappa1 * k.kappa1 + sec.constants.I2 * k.kappa2 * k.kappa2) +
                             0.5 * mat.mu * sec.constants.K * k.tau * k.tau);
            }
        }
        CHECK(field.energy(*frame, pts, mat) == doctest::Approx(expected).epsilon(1e-10));
        for (const auto &v : field.stretching) CHECK(v.norm() == 0.0);

        const LinearSolution lin = solveLinear(s.problem, *s.loads);
        const CorrectorField lf = linearCorrectors(s.problem, lin);
        for (int j = 0; j < 8; ++j) CHECK((lf.curvature[j] - lin.rotationSlope(j)).norm() == 0.0);
    }
}

} // TEST_SUITE
