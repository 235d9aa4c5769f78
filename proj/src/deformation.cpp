#include "rodlimit/deformation.hpp"

#include "rodlimit/error.hpp"
#include "rodlimit/parallel.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace rodlimit {

DeformationField3D::DeformationField3D(std::shared_ptr<const RodChart> chart, std::vector<double> axial,
                                       std::vector<Vec3> values)
    : m_chart(std::move(chart)), m_axial(std::move(axial)), m_values(std::move(values)) {
    require(m_chart != nullptr, "deformation field: chart required");
    require(m_axial.size() >= 2, "deformation field: at least two axial nodes required");
    for (std::size_t j = 1; j < m_axial.size(); ++j)
        require(m_axial[j] > m_axial[j - 1], "deformation field: axial nodes must be strictly increasing");
    const double L = m_chart->length();
    require(m_axial.front() >= -1e-12 * L && m_axial.back() <= L * (1.0 + 1e-12),
            "deformation field: axial nodes must lie in [0, L]");
    m_sectionNodes = static_cast<int>(m_chart->section().nodes().size());
    require(m_values.size() == m_axial.size() * static_cast<std::size_t>(m_sectionNodes),
            "deformation field: one value per section node and axial node required");
    for (const auto &v : m_values) require(v.allFinite(), "deformation field: values must be finite");
}

DeformationField3D DeformationField3D::sample(std::shared_ptr<const RodChart> chart, std::vector<double> axial,
                                              const Generator &v) {
    const auto &nodes = chart->section().nodes();
    std::vector<Vec3> values;
    values.reserve(axial.size() * nodes.size());
    for (double s3 : axial)
        for (const auto &S : nodes) values.push_back(v(S.x(), S.y(), s3));
    return DeformationField3D(std::move(chart), std::move(axial), std::move(values));
}

DeformationField3D DeformationField3D::identity(std::shared_ptr<const RodChart> chart, std::vector<double> axial) {
    const auto &nodes = chart->section().nodes();
    const double delta = chart->delta();
    std::vector<Vec3> values;
    values.reserve(axial.size() * nodes.size());
    for (double s3 : axial) {
        const FramePoint p = chart->frame().at(s3);
        for (const auto &S : nodes) values.push_back(RodChart::phi(p, delta * S.x(), delta * S.y()));
    }
    return DeformationField3D(std::move(chart), std::move(axial), std::move(values));
}

DeformationField3D DeformationField3D::withValues(std::vector<Vec3> values) const {
    return DeformationField3D(m_chart, m_axial, std::move(values));
}

PhysicalSamples toPhysical(const DeformationField3D &field) {
    PhysicalSamples out;
    const auto &nodes = field.chart().section().nodes();
    const double delta = field.delta();
    for (double s3 : field.axial())
        for (const auto &S : nodes) out.points.emplace_back(delta * S.x(), delta * S.y(), s3);
    out.values = field.values();
    return out;
}

DeformationField3D toReference(std::shared_ptr<const RodChart> chart, std::vector<double> axial,
                               const PhysicalSamples &samples) {
    const auto &nodes = chart->section().nodes();
    const double delta = chart->delta();
    require(samples.points.size() == samples.values.size() && samples.points.size() == axial.size() * nodes.size(),
            "rescale: sample count differs from the grid");
    for (std::size_t j = 0, i = 0; j < axial.size(); ++j)
        for (std::size_t n = 0; n < nodes.size(); ++n, ++i) {
            const Vec3 &p = samples.points[i];
            const double tol = 1e-12 * std::max(1.0, delta * nodes[n].norm());
            require(std::abs(p.x() - delta * nodes[n].x()) <= tol && std::abs(p.y() - delta * nodes[n].y()) <= tol &&
                        p.z() == axial[j],
                    "rescale: sample coordinates do not match the grid");
        }
    return DeformationField3D(std::move(chart), std::move(axial), samples.values);
}

DeformationField3D::Generator rescale(const DeformationField3D::Generator &physical, double delta) {
    return [physical, delta](double S1, double S2, double s3) { return physical(delta * S1, delta * S2, s3); };
}

std::vector<CellGradient> cellGradients(const DeformationField3D &field, const std::vector<Vec3> *values,
                                        int threads) {
    const std::vector<Vec3> &u = values ? *values : field.values();
    require(u.size() == field.values().size(), "cell gradients: values do not match the field layout");
    const RodChart &chart = field.chart();
    const CrossSection &section = chart.section();
    const auto &nodes = section.nodes();
    const auto &tris = section.triangles();
    const auto &axial = field.axial();
    const int J = static_cast<int>(axial.size());
    const int T = static_cast<int>(tris.size());
    const int N = field.sectionNodes();
    const double delta = field.delta();

    std::vector<FramePoint> frames(J);
    for (int j = 0; j < J; ++j) frames[j] = chart.frame().at(axial[j]);
    // Centroid values of v and Phi per (j, t).
    std::vector<Vec3> cv(static_cast<std::size_t>(J) * T), cphi(static_cast<std::size_t>(J) * T);
    std::vector<Vec3> phi(static_cast<std::size_t>(J) * N);
    for (int j = 0; j < J; ++j)
        for (int n = 0; n < N; ++n)
            phi[static_cast<std::size_t>(j) * N + n] = RodChart::phi(frames[j], delta * nodes[n].x(), delta * nodes[n].y());
    for (int j = 0; j < J; ++j)
        for (int t = 0; t < T; ++t) {
            const auto &tri = tris[t];
            const std::size_t base = static_cast<std::size_t>(j) * N;
            cv[static_cast<std::size_t>(j) * T + t] = (u[base + tri[0]] + u[base + tri[1]] + u[base + tri[2]]) / 3.0;
            cphi[static_cast<std::size_t>(j) * T + t] =
                (phi[base + tri[0]] + phi[base + tri[1]] + phi[base + tri[2]]) / 3.0;
        }
    // Inverse of the reference triangle Jacobian, scaled to physical s.
    std::vector<Eigen::Matrix2d> invJac(T);
    for (int t = 0; t < T; ++t) {
        const auto &tri = tris[t];
        Eigen::Matrix2d Jt;
        Jt.col(0) = nodes[tri[1]] - nodes[tri[0]];
        Jt.col(1) = nodes[tri[2]] - nodes[tri[0]];
        invJac[t] = Jt.inverse() / delta;
    }
    std::vector<double> trap(J, 0.0);
    for (int j = 0; j + 1 < J; ++j) {
        const double h = axial[j + 1] - axial[j];
        trap[j] += 0.5 * h;
        trap[j + 1] += 0.5 * h;
    }

    std::vector<CellGradient> cells(static_cast<std::size_t>(J) * T);
    parallelFor(J, threads, [&](int j) {
        const int jm = std::max(0, j - 1), jp = std::min(J - 1, j + 1);
        const double ds = axial[jp] - axial[jm];
        const std::size_t base = static_cast<std::size_t>(j) * N;
        for (int t = 0; t < T; ++t) {
            const auto &tri = tris[t];
            auto gradient = [&](const std::vector<Vec3> &vals, const std::vector<Vec3> &centroids) {
                Eigen::Matrix<double, 3, 2> D;
                D.col(0) = vals[base + tri[1]] - vals[base + tri[0]];
                D.col(1) = vals[base + tri[2]] - vals[base + tri[0]];
                Mat3 G;
                G.leftCols<2>() = D * invJac[t];
                G.col(2) = (centroids[static_cast<std::size_t>(jp) * T + t] -
                            centroids[static_cast<std::size_t>(jm) * T + t]) / ds;
                return G;
            };
            CellGradient &c = cells[static_cast<std::size_t>(j) * T + t];
            c.triangle = t;
            c.axialIndex = j;
            const Vec2 S = (nodes[tri[0]] + nodes[tri[1]] + nodes[tri[2]]) / 3.0;
            c.S1 = S.x();
            c.S2 = S.y();
            c.s3 = axial[j];
            c.value = cv[static_cast<std::size_t>(j) * T + t];
            c.gradPhi = gradient(phi, cphi);
            c.gradX = gradient(u, cv) * c.gradPhi.inverse();
            c.weight = section.triangleArea(t) * trap[j];
            c.volume = delta * delta * RodChart::jacDet(frames[j], delta * S.x(), delta * S.y()) * c.weight;
        }
    });
    return cells;
}

double distanceToRotations(const Mat3 &F) {
    Eigen::JacobiSVD<Mat3> svd(F);
    Vec3 sigma = svd.singularValues();
    if (F.determinant() < 0.0) sigma(2) = -sigma(2);
    return std::sqrt((sigma.array() - 1.0).square().sum());
}

} // namespace rodlimit
