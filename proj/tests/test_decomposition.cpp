#include "doctest.h"
#include "test_fixtures.hpp"
#include "test_support.hpp"

#include "rodlimit/decomposition.hpp"
#include "rodlimit/error.hpp"

#include <algorithm>

using namespace rodlimit;
using namespace rodlimit::testing;

namespace {

std::shared_ptr<const RodChart> makeChart(std::shared_ptr<const FrameField> frame, double delta,
                                          const SectionData &section = discSection()) {
    return std::make_shared<RodChart>(frame, section.section, delta);
}

std::vector<double> axialNodes(double L, int M) { return uniformGrid(L, M); }

double maxNorm(const std::vector<Vec3> &v) {
    double m = 0.0;
    for (const auto &x : v) m = std::max(m, x.norm());
    return m;
}

// Rigid motion x -> Q x + b of the physical rod, sampled on the reference grid.
DeformationField3D rigidField(std::shared_ptr<const RodChart> chart, const std::vector<double> &axial, const Mat3 &Q,
                              const Vec3 &b) {
    const double delta = chart->delta();
    const FrameField &frame = chart->frame();
    return DeformationField3D::sample(chart, axial, [&](double S1, double S2, double s3) {
        return Vec3(Q * RodChart::phi(frame.at(s3), delta * S1, delta * S2) + b);
    });
}

// Synthetic family: bending R = exp(s3 hat(b)), stretching delta V_S, warping
// delta^2 R wbar with zero section mean.
DeformationField3D syntheticField(std::shared_ptr<const RodChart> chart, const std::vector<double> &axial) {
    const double delta = chart->delta();
    const FrameField &frame = chart->frame();
    const Vec3 b(0.4, -0.3, 0.5);
    const double ratio = discSection().constants.I1 / discSection().constants.area;
    // On a straight rod t is constant, so int_0^s exp(x hat b) t dx has the
    // closed form J_l(s b) s t.
    return DeformationField3D::sample(chart, axial, [&, ratio](double S1, double S2, double s3) {
        const FramePoint p = frame.at(s3);
        const Mat3 R = expSO3(s3 * b);
        const Vec3 bend = frame.at(0.0).M + leftJacobian(s3 * b) * (s3 * p.t);
        const Vec3 stretch = delta * Vec3(0.3 * s3 * s3, -0.2 * s3, 0.25 * s3);
        const Vec3 c1(0.2, 0.1 * s3, -0.3), c2(-0.1, 0.3, 0.2 * s3), c3(0.15, -0.2, 0.1);
        const Vec3 w = S1 * c1 + S2 * c2 + (S1 * S1 - ratio) * c3;
        return Vec3(bend + stretch + R * (delta * (S1 * p.n1 + S2 * p.n2)) + delta * delta * (R * w));
    });
}

} // namespace

TEST_SUITE("decomposition") {

TEST_CASE("distance to rotations") {
    CHECK(distanceToRotations(Mat3::Identity()) == doctest::Approx(0.0));
    for (double e : {0.3, -0.2, 1e-4}) {
        Mat3 F = Mat3::Identity();
        F(0, 0) += e;
        CHECK(distanceToRotations(F) == doctest::Approx(std::abs(e)).epsilon(1e-12));
    }
    for (int i = 0; i < 20; ++i) {
        const Mat3 Q = randomRotation();
        CHECK(distanceToRotations(Q) <= 1e-12);
        Mat3 D = Mat3::Identity();
        D(0, 0) = -1.0;
        // Reflections sit at distance 2 from SO(3).
        CHECK(distanceToRotations(Q * D) == doctest::Approx(2.0).epsilon(1e-12));
        // Frame indifference and isotropy.
        const Mat3 F = Mat3::Identity() + 0.3 * Mat3::Random();
        CHECK(distanceToRotations(Q * F) == doctest::Approx(distanceToRotations(F)).epsilon(1e-12));
        CHECK(distanceToRotations(F * Q) == doctest::Approx(distanceToRotations(F)).epsilon(1e-12));
    }
}

TEST_CASE("rescaling is a pure relabeling") {
    auto chart = makeChart(arcFrame(1.0, 1.0), 0.1);
    const auto axial = axialNodes(1.0, 8);
    const auto field = DeformationField3D::sample(chart, axial, [](double S1, double S2, double s3) {
        return Vec3(std::sin(3 * S1) + s3, S2 * S2 - s3, S1 * S2 * s3);
    });
    const auto samples = toPhysical(field);
    const auto back = toReference(chart, axial, samples);
    CHECK(back.values() == field.values());
    // (Pi_delta phi)(S) = phi(delta S): phi(s) = s1 becomes delta S1.
    const auto scaled = rescale([](double s1, double, double) { return Vec3(s1, 0.0, 0.0); }, 0.1);
    CHECK(scaled(0.7, -0.3, 0.5).x() == doctest::Approx(0.07).epsilon(1e-15));
    const auto constant = rescale([](double, double, double) { return Vec3(1.0, 2.0, 3.0); }, 0.1);
    CHECK(constant(0.7, -0.3, 0.5) == Vec3(1.0, 2.0, 3.0));
    // Coordinates that do not match the grid are rejected.
    auto bad = samples;
    bad.points[3].x() += 1e-6;
    CHECK_THROWS_AS(toReference(chart, axial, bad), ValidationError);
}

TEST_CASE("cell gradients are exact for affine maps of the physical rod") {
    for (auto frame : {straightFrame(1.0), arcFrame(1.0, 1.0), helixFrame(1.0, 0.3, 1.0)}) {
        auto chart = makeChart(frame, 0.1);
        const auto axial = axialNodes(1.0, 20);
        const Mat3 A = Mat3::Identity() + 0.2 * Mat3::Random();
        const auto field = rigidField(chart, axial, A, Vec3(1, 2, 3));
        for (const auto &c : cellGradients(field)) CHECK((c.gradX - A).norm() <= 1e-10);
    }
}

TEST_CASE("section means of an affine field") {
    auto chart = makeChart(straightFrame(2.0), 0.2);
    const auto axial = axialNodes(2.0, 4);
    const auto field = DeformationField3D::sample(
        chart, axial, [](double S1, double S2, double s3) { return Vec3(3 * S1 + s3, 1.0 - 2 * S2, S1 + S2 + 5); });
    const auto means = sectionMeans(field);
    for (std::size_t j = 0; j < axial.size(); ++j)
        CHECK((means[j] - Vec3(axial[j], 1.0, 5.0)).norm() <= 1e-13);
}

TEST_CASE("identity and rigid fields decompose exactly") {
    const Mat3 Q = rodrigues(Vec3(1, 2, 2).normalized(), 0.8);
    const Vec3 b(0.5, -1.0, 2.0);
    for (auto frame : {straightFrame(1.0), arcFrame(1.0, 1.0), helixFrame(0.8, 0.3, 1.0)}) {
        auto chart = makeChart(frame, 0.1);
        const auto axial = axialNodes(1.0, 60);
        for (bool identity : {true, false}) {
            const auto field = identity ? DeformationField3D::identity(chart, axial) : rigidField(chart, axial, Q, b);
            const Mat3 expected = identity ? Mat3::Identity() : Q;
            const auto dec = decompose(field);
            CHECK(dec.slices == 8);
            for (const auto &R : dec.samples) CHECK((R - expected).norm() <= 1e-12);
            for (const auto &a : dec.rotation.generator()) CHECK(a.norm() <= 1e-11);
            CHECK(maxNorm(dec.warping) <= 1e-12);
            CHECK(maxNorm(dec.stretching) <= 1e-12);
            CHECK(dec.estimates.distance <= 1e-12);
            const auto rebuilt = reconstruct(dec, field);
            for (std::size_t i = 0; i < field.values().size(); ++i)
                CHECK((rebuilt.values()[i] - field.values()[i]).norm() <= 1e-13);
        }
    }
}

TEST_CASE("left clamping replaces the first sample only") {
    auto chart = makeChart(straightFrame(1.0), 0.1);
    const auto axial = axialNodes(1.0, 60);
    const Mat3 Q = rodrigues(Vec3::UnitX(), 0.3);
    DecompositionOptions opt;
    opt.clampLeft = true;
    const auto dec = decompose(rigidField(chart, axial, Q, Vec3::Zero()), opt);
    CHECK((dec.rotation.evaluate(0.0) - Mat3::Identity()).norm() <= 1e-14);
    CHECK((dec.rotation.evaluate(1.0) - Q).norm() <= 1e-12);
    CHECK((dec.samples[0] - Q).norm() <= 1e-12);
}

TEST_CASE("slice fitting rejects unusable slices") {
    auto chart = makeChart(straightFrame(1.0), 0.1);
    // Too few axial nodes per slice.
    const auto coarse = DeformationField3D::identity(chart, axialNodes(1.0, 6));
    CHECK_THROWS_AS(fitSliceRotations(coarse, 8), ValidationError);
    // A field collapsed onto a line has a rank-one averaged gradient.
    const auto axial = axialNodes(1.0, 60);
    const auto line = DeformationField3D::sample(chart, axial, [](double, double, double s3) {
        return Vec3(s3, 0.0, 0.0);
    });
    CHECK_THROWS_AS(fitSliceRotations(line, 8), ValidationError);
    CHECK_THROWS_AS(fitSliceRotations(line, 0), ValidationError);
    // Partial axial ranges are rejected.
    const auto partial = DeformationField3D::identity(chart, std::vector<double>{0.0, 0.5});
    CHECK_THROWS_AS(decompose(partial), ValidationError);
}

TEST_CASE("bending/stretching split recovers the stretching part") {
    auto frame = arcFrame(1.0, 1.0);
    const auto axial = axialNodes(1.0, 40);
    const auto R = integrateGenerator(uniformGrid(1.0, 7), std::vector<Vec3>(7, Vec3(0.3, -0.1, 0.2)));
    const auto Vb = integrateCenterline(*frame, integrateGenerator(uniformGrid(1.0, 7),
                                                                  std::vector<Vec3>(7, Vec3(0.3, -0.1, 0.2))));
    std::vector<Vec3> V(axial.size()), VS(axial.size());
    for (std::size_t j = 0; j < axial.size(); ++j) {
        VS[j] = Vec3(axial[j] * axial[j], 0.0, -axial[j]);
        V[j] = evaluateCenterline(*frame, R, Vb, axial[j]) + VS[j];
    }
    const auto [bending, stretching] = splitBendingStretching(*frame, R, axial, V);
    for (std::size_t j = 0; j < axial.size(); ++j) CHECK((stretching[j] - VS[j]).norm() <= 1e-13);
    CHECK(h1Norm(axial, stretching) > 0.0);
}

TEST_CASE("estimate ratios stay bounded on a synthetic family") {
    std::vector<std::array<double, 5>> ratios;
    for (double delta : {0.1, 0.05, 0.025}) {
        auto chart = makeChart(straightFrame(1.0), delta);
        const auto axial = axialNodes(1.0, 100);
        const auto dec = decompose(syntheticField(chart, axial));
        MESSAGE("delta " << delta << " D " << dec.estimates.distance << " ratios " << dec.estimates.ratios[0] << " "
                         << dec.estimates.ratios[1] << " " << dec.estimates.ratios[2] << " "
                         << dec.estimates.ratios[3] << " " << dec.estimates.ratios[4]);
        CHECK(dec.estimates.distance > 0.0);
        ratios.push_back(dec.estimates.ratios);
    }
    for (int i = 0; i < 5; ++i) {
        double lo = ratios[0][i], hi = ratios[0][i];
        for (const auto &r : ratios) {
            lo = std::min(lo, r[i]);
            hi = std::max(hi, r[i]);
        }
        CHECK(lo > 0.0);
        CHECK(hi <= 1.5 * lo);
    }
}

TEST_CASE("decomposition is independent of the thread count") {
    const auto field = syntheticField(makeChart(straightFrame(1.0), 0.05), axialNodes(1.0, 60));
    const auto one = decompose(field, {0, false, 1});
    const auto four = decompose(field, {0, false, 4});
    CHECK(one.warping == four.warping);
    CHECK(one.estimates.ratios == four.estimates.ratios);
}

} // TEST_SUITE
