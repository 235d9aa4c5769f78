#include "rodlimit/decomposition.hpp"

#include "rodlimit/error.hpp"
#include "rodlimit/parallel.hpp"
#include "rodlimit/quadrature.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rodlimit {

namespace {

// Offsets of the rotated section points R (delta S . n) at axial node j.
Vec3 sectionOffset(const FramePoint &p, const Mat3 &R, double delta, const Vec2 &S) {
    return R * (delta * (S.x() * p.n1 + S.y() * p.n2));
}

void requireFullAxis(const DeformationField3D &field) {
    const double L = field.chart().length();
    require(std::abs(field.axial().front()) <= 1e-12 * L && std::abs(field.axial().back() - L) <= 1e-12 * L,
            "decomposition: axial nodes must span [0, L]");
}

} // namespace

std::vector<Vec3> sectionMeans(const DeformationField3D &field) {
    const CrossSection &section = field.chart().section();
    const auto &tris = section.triangles();
    std::vector<Vec3> means(field.axial().size(), Vec3::Zero());
    for (std::size_t j = 0; j < field.axial().size(); ++j) {
        Vec3 sum = Vec3::Zero();
        for (std::size_t t = 0; t < tris.size(); ++t) {
            const auto &tri = tris[t];
            const int jj = static_cast<int>(j);
            sum += section.triangleArea(static_cast<int>(t)) / 3.0 *
                   (field.value(tri[0], jj) + field.value(tri[1], jj) + field.value(tri[2], jj));
        }
        means[j] = sum / section.area();
    }
    return means;
}

int defaultSliceCount(double length, double delta) {
    return std::max(1, static_cast<int>(std::lround(3.0 * length / (4.0 * delta))));
}

std::vector<Mat3> fitSliceRotations(const DeformationField3D &field, int slices, int threads) {
    require(slices >= 1, "fit_slice_rotations: slice count must be positive");
    requireFullAxis(field);
    const auto cells = cellGradients(field, nullptr, threads);
    const auto &axial = field.axial();
    const double L = field.chart().length();
    const int T = static_cast<int>(field.chart().section().triangles().size());
    const double halfWidth = 0.5 * L / slices;
    const double tol = 1e-12 * L;

    std::vector<Mat3> samples(slices + 1);
    parallelFor(slices + 1, threads, [&](int k) {
        const double alpha = L * k / slices;
        Mat3 sum = Mat3::Zero();
        double volume = 0.0;
        int count = 0;
        for (std::size_t j = 0; j < axial.size(); ++j) {
            if (std::abs(axial[j] - alpha) > halfWidth + tol) continue;
            ++count;
            for (int t = 0; t < T; ++t) {
                const CellGradient &c = cells[j * T + t];
                sum += c.volume * c.gradX;
                volume += c.volume;
            }
        }
        if (count < 2) {
            std::ostringstream msg;
            msg << "fit_slice_rotations: slice " << k << " contains " << count
                << " axial nodes (at least 2 required); refine the axial grid or use fewer slices";
            throw ValidationError(msg.str());
        }
        const Mat3 G = sum / volume;
        Eigen::JacobiSVD<Mat3> svd(G);
        const Vec3 sigma = svd.singularValues();
        if (!(sigma(1) > 1e-10 * sigma(0))) {
            std::ostringstream msg;
            msg << "fit_slice_rotations: degenerate slice " << k << " (averaged gradient has rank < 2)";
            throw ValidationError(msg.str());
        }
        samples[k] = projectToRotation(G);
    });
    return samples;
}

std::pair<std::vector<Vec3>, std::vector<Vec3>> splitBendingStretching(const FrameField &frame,
                                                                      const RotationField &R,
                                                                      const std::vector<double> &axial,
                                                                      const std::vector<Vec3> &centerline) {
    require(axial.size() == centerline.size() && !axial.empty(), "split: one centerline value per axial node");
    require(std::abs(axial.front()) <= 1e-12 * std::max(1.0, axial.back()), "split: axial nodes must start at 0");
    const auto &g8 = gaussLegendre(8);
    // Breakpoints of R between consecutive axial nodes.
    const auto &rgrid = R.grid();
    std::vector<Vec3> VB(axial.size()), VS(axial.size());
    VB[0] = centerline[0];
    auto piece = [&](double a, double b) {
        Vec3 sum = Vec3::Zero();
        const double h = b - a;
        for (std::size_t q = 0; q < g8.nodes.size(); ++q) {
            const double s = a + g8.nodes[q] * h;
            sum += g8.weights[q] * h * (R.evaluate(s) * frame.at(s).t);
        }
        return sum;
    };
    for (std::size_t j = 0; j + 1 < axial.size(); ++j) {
        double a = axial[j];
        Vec3 inc = Vec3::Zero();
        for (double x : rgrid) {
            if (x <= a || x >= axial[j + 1]) continue;
            inc += piece(a, x);
            a = x;
        }
        inc += piece(a, axial[j + 1]);
        VB[j + 1] = VB[j] + inc;
    }
    for (std::size_t j = 0; j < axial.size(); ++j) VS[j] = centerline[j] - VB[j];
    return {VB, VS};
}

EstimateReport estimateReport(const ElementaryDecomposition &dec, const DeformationField3D &field, int threads) {
    const auto cells = cellGradients(field, nullptr, threads);
    const auto warpCells = cellGradients(field, &dec.warping, threads);
    const double delta = field.delta();
    const auto &axial = field.axial();
    std::vector<Mat3> Rj(axial.size());
    for (std::size_t j = 0; j < axial.size(); ++j) Rj[j] = dec.rotation.evaluate(axial[j]);

    EstimateReport r;
    double D2 = 0.0, w2 = 0.0, gw2 = 0.0, gap2 = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const CellGradient &c = cells[i];
        const double d = distanceToRotations(c.gradX);
        D2 += c.volume * d * d;
        w2 += c.volume * warpCells[i].value.squaredNorm();
        gw2 += c.volume * warpCells[i].gradX.squaredNorm();
        gap2 += c.volume * (c.gradX - Rj[c.axialIndex]).squaredNorm();
    }
    r.distance = std::sqrt(D2);
    r.warping = std::sqrt(w2);
    r.warpingGradient = std::sqrt(gw2);
    r.gradientGap = std::sqrt(gap2);
    r.rotationDerivative = std::sqrt(dec.rotation.h1SeminormSquared());
    double st2 = 0.0;
    const FrameField &frame = field.chart().frame();
    for (std::size_t j = 0; j + 1 < axial.size(); ++j) {
        const double h = axial[j + 1] - axial[j], mid = 0.5 * (axial[j] + axial[j + 1]);
        const Vec3 slope = (dec.centerline[j + 1] - dec.centerline[j]) / h;
        st2 += h * (slope - dec.rotation.evaluate(mid) * frame.at(mid).t).squaredNorm();
    }
    r.stretch = std::sqrt(st2);
    if (r.distance > 0.0) {
        const double D = r.distance;
        r.ratios = {r.warping / (delta * D), r.warpingGradient / D, r.rotationDerivative * delta * delta / D,
                    r.stretch * delta / D, r.gradientGap / D};
    }
    return r;
}

ElementaryDecomposition decompose(const DeformationField3D &field, const DecompositionOptions &options) {
    requireFullAxis(field);
    const double L = field.chart().length();
    ElementaryDecomposition dec;
    dec.axial = field.axial();
    dec.slices = options.slices > 0 ? options.slices : defaultSliceCount(L, field.delta());
    dec.centerline = sectionMeans(field);
    dec.samples = fitSliceRotations(field, dec.slices, options.threads);
    std::vector<Mat3> samples = dec.samples;
    if (options.clampLeft) samples[0] = Mat3::Identity();
    dec.rotation = interpolateRotationSamples(samples, L);

    const auto &nodes = field.chart().section().nodes();
    const int N = field.sectionNodes();
    const double delta = field.delta();
    dec.warping.resize(field.values().size());
    for (std::size_t j = 0; j < dec.axial.size(); ++j) {
        const FramePoint p = field.chart().frame().at(dec.axial[j]);
        const Mat3 R = dec.rotation.evaluate(dec.axial[j]);
        for (int n = 0; n < N; ++n)
            dec.warping[j * N + n] =
                field.value(n, static_cast<int>(j)) - dec.centerline[j] - sectionOffset(p, R, delta, nodes[n]);
    }
    std::tie(dec.bending, dec.stretching) =
        splitBendingStretching(field.chart().frame(), dec.rotation, dec.axial, dec.centerline);
    dec.estimates = estimateReport(dec, field, options.threads);
    return dec;
}

DeformationField3D reconstruct(const ElementaryDecomposition &dec, const DeformationField3D &layout) {
    const auto &nodes = layout.chart().section().nodes();
    const int N = layout.sectionNodes();
    const double delta = layout.delta();
    require(dec.warping.size() == layout.values().size(), "reconstruct: decomposition does not match the layout");
    std::vector<Vec3> values(layout.values().size());
    for (std::size_t j = 0; j < dec.axial.size(); ++j) {
        const FramePoint p = layout.chart().frame().at(dec.axial[j]);
        const Mat3 R = dec.rotation.evaluate(dec.axial[j]);
        for (int n = 0; n < N; ++n)
            values[j * N + n] = dec.centerline[j] + sectionOffset(p, R, delta, nodes[n]) + dec.warping[j * N + n];
    }
    return layout.withValues(std::move(values));
}

double h1Norm(const std::vector<double> &axial, const std::vector<Vec3> &values) {
    double sum = 0.0;
    for (std::size_t j = 0; j + 1 < axial.size(); ++j) {
        const double h = axial[j + 1] - axial[j];
        sum += 0.5 * h * (values[j].squaredNorm() + values[j + 1].squaredNorm());
        sum += (values[j + 1] - values[j]).squaredNorm() / h;
    }
    return std::sqrt(sum);
}

} // namespace rodlimit
