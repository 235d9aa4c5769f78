#include "rodlimit/energy3d.hpp"

#include "rodlimit/error.hpp"
#include "rodlimit/parallel.hpp"
#include "rodlimit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rodlimit {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

Mat3 frameMatrix(const FramePoint &p) {
    Mat3 P;
    P.col(0) = p.n1;
    P.col(1) = p.n2;
    P.col(2) = p.t;
    return P;
}

Mat3 sym(const Mat3 &A) { return 0.5 * (A + A.transpose()); }

// f_delta = delta^kappa f + delta^(kappa-1) g at reference point (S1, S2, s3).
Vec3 forceDensity(const LoadProfile &loads, double delta, double S1, double S2, double s3) {
    Vec3 f = Vec3::Zero();
    if (!loads.f.isZero()) f += std::pow(delta, loads.kappa) * loads.f(s3);
    if (!loads.g.empty()) f += std::pow(delta, loads.kappa - 1.0) * loads.gValue(S1, S2, s3);
    return f;
}

Vec3 interpolateNodes(const std::vector<double> &grid, const std::vector<Vec3> &nodes, int k, double s) {
    const double h = grid[k + 1] - grid[k];
    const double x = (s - grid[k]) / h;
    return (1.0 - x) * nodes[k] + x * nodes[k + 1];
}

} // namespace

double svkDensity(const Mat3 &F, const Material &material) {
    if (!(F.determinant() > 0.0)) return kInfinity;
    return svkStrainDensity(greenStVenant(F), material);
}

double svkStrainDensity(const Mat3 &E, const Material &material) {
    const double tr = E.trace();
    return 0.5 * material.lambda * tr * tr + material.mu * E.squaredNorm();
}

Mat3 greenStVenant(const Mat3 &F) { return 0.5 * (F.transpose() * F - Mat3::Identity()); }

Mat3 limitTensor(const FramePoint &p, double S1, double S2, const Vec3 &dw1, const Vec3 &dw2, const Vec3 &c,
                 const Vec3 &stretch) {
    Mat3 Z;
    Z.col(0) = dw1;
    Z.col(1) = dw2;
    Z.col(2) = c.cross(S1 * p.n1 + S2 * p.n2) + stretch;
    return sym(frameMatrix(p).transpose() * Z);
}

Mat3 limitTensorNonlinear(const FramePoint &p, double S1, double S2, const Vec3 &dw1, const Vec3 &dw2,
                          const Vec3 &a, const Mat3 &R, const Vec3 &dVS) {
    return limitTensor(p, S1, S2, dw1, dw2, a, R.transpose() * dVS);
}

Mat3 limitTensorLinear(const FramePoint &p, double S1, double S2, const Vec3 &dw1, const Vec3 &dw2,
                       const Vec3 &dRc, const Vec3 &dVS) {
    return limitTensor(p, S1, S2, dw1, dw2, dRc, dVS);
}

Mat3 toPhysicalFrame(const Mat3 &Ehat, const FramePoint &p) {
    const Mat3 P = frameMatrix(p);
    return P * Ehat * P.transpose();
}

EnergyResult totalEnergy(const DeformationField3D &field, const LoadProfile &loads, const Material &material,
                         int threads) {
    const auto cells = cellGradients(field, nullptr, threads);
    const double delta = field.delta();
    const auto &axial = field.axial();
    std::vector<FramePoint> frames(axial.size());
    for (std::size_t j = 0; j < axial.size(); ++j) frames[j] = field.chart().frame().at(axial[j]);
    EnergyResult r;
    double sum = 0.0;
    for (const CellGradient &c : cells) {
        const double W = svkDensity(c.gradX, material);
        if (!std::isfinite(W)) {
            r.value = kInfinity;
            r.finite = false;
            r.offendingPoint = Vec3(c.S1, c.S2, c.s3);
            return r;
        }
        const FramePoint &p = frames[c.axialIndex];
        const Vec3 disp = c.value - RodChart::phi(p, delta * c.S1, delta * c.S2);
        sum += c.volume * (W - forceDensity(loads, delta, c.S1, c.S2, c.s3).dot(disp));
    }
    r.value = sum;
    return r;
}

// ---------------------------------------------------------------------------
// Recovery data

void RecoveryData::validate() const {
    require(frame != nullptr, "recovery: frame required");
    validateGrid(grid);
    const std::size_t M = grid.size() - 1;
    require(kappa >= 2.0, "recovery: kappa must be at least 2");
    require(generator.size() == M, "recovery: one strain vector per interval required");
    require(warpingNodes.size() == M + 1, "recovery: one warping coefficient per node required");
    require(warpingNodes.front().norm() == 0.0, "recovery: warping must vanish at s3 = 0");
    require(stretching.empty() || stretching.size() == M + 1, "recovery: one stretching value per node required");
    require(stretching.empty() || stretching.front().norm() == 0.0, "recovery: V_S must vanish at s3 = 0");
    if (kappa > 2.0) {
        require(rotationVector.size() == M + 1, "recovery: rotation vector needs one value per node");
        require(rotationVector.front().norm() == 0.0, "recovery: rotation vector must vanish at s3 = 0");
    }
    require(std::abs(grid.back() - frame->line().length()) <= 1e-12 * grid.back(),
            "recovery: grid must end at the rod length");
    for (const auto &c : generator) require(c.allFinite(), "recovery: strain vectors must be finite");
}

int RecoveryData::intervalOf(double s) const {
    const auto it = std::upper_bound(grid.begin(), grid.end(), s);
    int k = static_cast<int>(it - grid.begin()) - 1;
    return std::clamp(k, 0, static_cast<int>(grid.size()) - 2);
}

Vec3 RecoveryData::warpingCoefficient(double s) const {
    return interpolateNodes(grid, warpingNodes, intervalOf(s), s);
}

Vec3 RecoveryData::warpingSlope(int k) const { return (warpingNodes[k + 1] - warpingNodes[k]) / (grid[k + 1] - grid[k]); }

Vec3 RecoveryData::stretchingAt(double s) const {
    return stretching.empty() ? Vec3::Zero() : interpolateNodes(grid, stretching, intervalOf(s), s);
}

Vec3 RecoveryData::stretchingSlope(int k) const {
    return stretching.empty() ? Vec3::Zero() : Vec3((stretching[k + 1] - stretching[k]) / (grid[k + 1] - grid[k]));
}

Vec3 RecoveryData::rotationVectorAt(double s) const {
    return rotationVector.empty() ? Vec3::Zero() : interpolateNodes(grid, rotationVector, intervalOf(s), s);
}

namespace {

// Continuous P1 coefficients: averages of the adjacent interval values,
// zero at s3 = 0 and the last interval value at s3 = L.
std::vector<Vec3> nodalAverages(const std::vector<Vec3> &perInterval) {
    const std::size_t M = perInterval.size();
    std::vector<Vec3> nodes(M + 1, Vec3::Zero());
    for (std::size_t j = 1; j < M; ++j) nodes[j] = 0.5 * (perInterval[j - 1] + perInterval[j]);
    nodes[M] = perInterval[M - 1];
    return nodes;
}

std::vector<double> chiAtNodes(const RodProblem &problem) {
    const auto &chi = problem.section.torsion.chi;
    return std::vector<double>(chi.data(), chi.data() + chi.size());
}

} // namespace

RecoveryData nonlinearRecoveryData(const RodProblem &problem, const NonlinearSolution &solution) {
    RecoveryData d;
    d.frame = problem.frame;
    d.grid = problem.grid;
    d.kappa = 2.0;
    d.generator = solution.generator;
    d.warpingNodes = nodalAverages(solution.generator);
    d.stretching.assign(problem.grid.size(), Vec3::Zero());
    d.nu = problem.material.poisson();
    d.constants = problem.section.constants;
    d.chiNodes = chiAtNodes(problem);
    d.validate();
    return d;
}

RecoveryData linearRecoveryData(const RodProblem &problem, const LinearSolution &solution, double kappa) {
    require(kappa > 2.0, "recovery: the linear regime needs kappa > 2");
    require(solution.grid == problem.grid, "recovery: solution grid differs from the rod grid");
    RecoveryData d;
    d.frame = problem.frame;
    d.grid = problem.grid;
    d.kappa = kappa;
    for (int k = 0; k < problem.intervals(); ++k) d.generator.push_back(solution.rotationSlope(k));
    d.warpingNodes = nodalAverages(d.generator);
    d.stretching.assign(problem.grid.size(), Vec3::Zero());
    d.rotationVector = solution.rotation;
    d.nu = problem.material.poisson();
    d.constants = problem.section.constants;
    d.chiNodes = chiAtNodes(problem);
    d.validate();
    return d;
}

// ---------------------------------------------------------------------------
// Recovery field

RecoveryField::RecoveryField(const RecoveryData &data, double delta) : m_data(&data), m_delta(delta) {
    data.validate();
    require(delta >= 0.0 && std::isfinite(delta), "recovery: delta must be nonnegative");
    if (data.kappa == 2.0) {
        m_rotation = integrateGenerator(data.grid, data.generator);
    } else {
        const double scale = std::pow(delta, data.kappa - 2.0);
        std::vector<Vec3> gen(data.generator.size());
        for (std::size_t k = 0; k < gen.size(); ++k) gen[k] = scale * data.generator[k];
        m_rotation = integrateGenerator(data.grid, gen);
    }
    m_centerline = integrateCenterline(*data.frame, m_rotation);
}

Vec3 RecoveryField::centerline(double s) const {
    return evaluateCenterline(*m_data->frame, m_rotation, m_centerline, s);
}

RecoveryField::AxialState RecoveryField::axialState(const FramePoint &p, int k) const {
    const RecoveryData &d = *m_data;
    AxialState st;
    st.frame = p;
    st.interval = k;
    st.R = m_rotation.evaluate(p.s);
    st.V = evaluateCenterline(*d.frame, m_rotation, m_centerline, p.s);
    const Vec3 cw = interpolateNodes(d.grid, d.warpingNodes, k, p.s);
    const Vec3 dcw = d.warpingSlope(k);
    st.strain = strainComponents(cw, p);
    st.strainSlope.kappa1 = dcw.dot(p.n2) + cw.dot(p.dn2);
    st.strainSlope.kappa2 = -(dcw.dot(p.n1) + cw.dot(p.dn1));
    st.strainSlope.tau = dcw.dot(p.t) + cw.dot(p.dt);
    return st;
}

RecoveryPoint RecoveryField::evaluate(const AxialState &st, const SectionPoint &S) const {
    const RecoveryData &d = *m_data;
    const double delta = m_delta;
    const bool nonlinear = d.kappa == 2.0;
    const FramePoint &p = st.frame;
    const int k = st.interval;
    const double s = p.s;

    const Mat3 &R = st.R;
    const Vec3 &gamma = m_rotation.generator()[k];
    const Vec3 &c = d.generator[k];
    const Vec3 &V = st.V;
    const Vec3 Sn = S.S1 * p.n1 + S.S2 * p.n2;
    const Vec3 dSn = S.S1 * p.dn1 + S.S2 * p.dn2;

    // Warping and its derivatives in the reference frame.
    const StrainComponents &kw = st.strain;
    const StrainComponents &dkw = st.strainSlope;
    const Vec3 W = warpingComponents(kw, S, d.nu, d.constants);
    const Vec3 dW3 = warpingComponents(dkw, S, d.nu, d.constants);
    const Eigen::Matrix<double, 3, 2> dW = warpingGradient(kw, S, d.nu);
    const Vec3 w = W(0) * p.n1 + W(1) * p.n2 + W(2) * p.t;
    const Vec3 dw1 = dW(0, 0) * p.n1 + dW(1, 0) * p.n2 + dW(2, 0) * p.t;
    const Vec3 dw2 = dW(0, 1) * p.n1 + dW(1, 1) * p.n2 + dW(2, 1) * p.t;
    const Vec3 dw3 = dW3(0) * p.n1 + dW3(1) * p.n2 + dW3(2) * p.t + W(0) * p.dn1 + W(1) * p.dn2 + W(2) * p.dt;

    const Vec3 VSvalue = d.stretching.empty() ? Vec3::Zero() : interpolateNodes(d.grid, d.stretching, k, s);
    const Vec3 dVS = d.stretchingSlope(k);

    const double p1 = std::pow(delta, d.kappa - 1.0);
    const double p2 = std::pow(delta, d.kappa);
    const Mat3 Rw = nonlinear ? R : Mat3::Identity();

    RecoveryPoint out;
    const Vec3 warp = p2 * (Rw * w);
    out.displacement = (V - p.M) + delta * ((R * Sn) - Sn) + p1 * VSvalue + warp;
    out.value = V + delta * (R * Sn) + p1 * VSvalue + warp;

    Mat3 G;
    G.col(0) = R * p.n1 + p1 * (Rw * dw1);
    G.col(1) = R * p.n2 + p1 * (Rw * dw2);
    Vec3 col3 = R * p.t + delta * (R * (gamma.cross(Sn) + dSn)) + p1 * dVS + p2 * (Rw * dw3);
    if (nonlinear) col3 += p2 * (R * gamma.cross(w));
    G.col(2) = col3;
    const double s1 = delta * S.S1, s2 = delta * S.S2;
    out.F = G * RodChart::gradPhi(p, s1, s2).inverse();
    out.jac = RodChart::jacDet(p, s1, s2);
    out.limit = nonlinear ? limitTensorNonlinear(p, S.S1, S.S2, dw1, dw2, c, R, dVS)
                          : limitTensorLinear(p, S.S1, S.S2, dw1, dw2, c, dVS);
    return out;
}

RecoveryPoint RecoveryField::evaluate(double S1, double S2, double s3, double chi, double chi1, double chi2) const {
    SectionPoint S;
    S.S1 = S1;
    S.S2 = S2;
    S.chi = chi;
    S.chi1 = chi1;
    S.chi2 = chi2;
    return evaluate(m_data->frame->at(s3), m_data->intervalOf(s3), S);
}

DeformationField3D RecoveryField::sample(std::shared_ptr<const RodChart> chart, std::vector<double> axial) const {
    require(&chart->frame() == m_data->frame.get(), "recovery: chart frame differs from the recovery frame");
    require(chart->delta() == m_delta, "recovery: chart thickness differs from the recovery thickness");
    const auto &nodes = chart->section().nodes();
    require(m_data->chiNodes.size() == nodes.size(), "recovery: torsion values do not match the section mesh");
    std::vector<Vec3> values;
    values.reserve(axial.size() * nodes.size());
    for (double s3 : axial) {
        const auto state = axialState(m_data->frame->at(s3), m_data->intervalOf(s3));
        for (std::size_t n = 0; n < nodes.size(); ++n) {
            SectionPoint S;
            S.S1 = nodes[n].x();
            S.S2 = nodes[n].y();
            S.chi = m_data->chiNodes[n];
            values.push_back(evaluate(state, S).value);
        }
    }
    return DeformationField3D(std::move(chart), std::move(axial), std::move(values));
}

// ---------------------------------------------------------------------------
// Limit energy and the Gamma-convergence check

namespace {

struct AxialPoint {
    int interval;
    double weight; // Gauss weight x interval length
    FramePoint frame;
};

std::vector<AxialPoint> axialQuadrature(const RecoveryData &data, int points) {
    const auto &rule = gaussLegendre(points);
    std::vector<AxialPoint> out;
    for (std::size_t k = 0; k + 1 < data.grid.size(); ++k) {
        const double a = data.grid[k], h = data.grid[k + 1] - a;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q)
            out.push_back({static_cast<int>(k), rule.weights[q] * h, data.frame->at(a + rule.nodes[q] * h)});
    }
    return out;
}

// Limit load work density at one axial point.
double limitWork(const RecoveryData &data, const RecoveryField &limit, const LoadMatrix &G,
                 const std::vector<Vec3> &displacementNodes, const AxialPoint &ap) {
    if (G.isZero()) return 0.0;
    const FramePoint &p = ap.frame;
    const LoadPoint lp = G.local(p);
    if (data.kappa == 2.0) {
        const Mat3 R = limit.rotation().evaluate(p.s);
        return lp.F.dot(limit.centerline(p.s) - p.M) + lp.G1.dot(R * p.n1 - p.n1) + lp.G2.dot(R * p.n2 - p.n2);
    }
    // U(s) = U(s_k) + int_{s_k}^s Rc ^ t.
    const int k = ap.interval;
    const double a = data.grid[k], h = p.s - a;
    Vec3 U = displacementNodes[k];
    const auto &rule = gaussLegendre(8);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double x = a + rule.nodes[q] * h;
        U += rule.weights[q] * h * data.rotationVectorAt(x).cross(data.frame->at(x).t);
    }
    const Vec3 Rc = data.rotationVectorAt(p.s);
    return lp.F.dot(U) + lp.G1.dot(Rc.cross(p.n1)) + lp.G2.dot(Rc.cross(p.n2));
}

std::vector<Vec3> displacementNodes(const RecoveryData &data) {
    std::vector<Vec3> U(data.grid.size(), Vec3::Zero());
    if (data.kappa == 2.0) return U;
    const auto &rule = gaussLegendre(8);
    for (std::size_t k = 0; k + 1 < data.grid.size(); ++k) {
        const double a = data.grid[k], h = data.grid[k + 1] - a;
        Vec3 inc = Vec3::Zero();
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double x = a + rule.nodes[q] * h;
            inc += rule.weights[q] * h * data.rotationVectorAt(x).cross(data.frame->at(x).t);
        }
        U[k + 1] = U[k] + inc;
    }
    return U;
}

void requireCompatibleLoads(const RecoveryData &data, const LoadMatrix &G) {
    require(std::abs(G.length() - data.grid.back()) <= 1e-12 * data.grid.back(),
            "gamma check: load matrix length differs from the rod length");
}

struct DeltaSums {
    double energy = 0.0, tensorGap = 0.0, distance = 0.0;
    bool finite = true;
    Vec3 offending = Vec3::Zero();
};

} // namespace

double limitEnergy(const RecoveryData &data, const SectionData &section, const Material &material,
                   const LoadMatrix &G, const GammaOptions &options) {
    data.validate();
    requireCompatibleLoads(data, G);
    const RecoveryField limit(data, 0.0);
    const auto spts = sectionQuadrature(*section.section, section.torsion, options.sectionOrder);
    const auto apts = axialQuadrature(data, options.axialPoints);
    const auto Unodes = displacementNodes(data);
    std::vector<double> partial(apts.size(), 0.0);
    parallelFor(static_cast<int>(apts.size()), options.threads, [&](int i) {
        const AxialPoint &ap = apts[i];
        const auto state = limit.axialState(ap.frame, ap.interval);
        double e = 0.0;
        for (const SectionPoint &S : spts) e += S.weight * svkStrainDensity(limit.evaluate(state, S).limit, material);
        partial[i] = ap.weight * (e - limitWork(data, limit, G, Unodes, ap));
    });
    double sum = 0.0;
    for (double v : partial) sum += v;
    return sum;
}

double logLogSlope(const std::vector<double> &x, const std::vector<double> &y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
        if (x[i] > 0.0 && y[i] > 0.0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    const std::size_t n = lx.size();
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

GammaReport gammaCheck(const RecoveryData &data, const SectionData &section, const Material &material,
                       const LoadProfile &loads, const LoadMatrix &G, double modelEnergy,
                       const GammaOptions &options) {
    data.validate();
    requireCompatibleLoads(data, G);
    require(std::abs(loads.kappa - data.kappa) <= 1e-14, "gamma check: load scaling differs from the recovery kappa");
    require(!options.deltas.empty(), "gamma check: at least one thickness required");
    const double maxDelta = RodChart::maxDelta(data.frame->line(), *section.section);
    for (std::size_t i = 0; i < options.deltas.size(); ++i) {
        require(options.deltas[i] > 0.0, "gamma check: thicknesses must be positive");
        require(i == 0 || options.deltas[i] < options.deltas[i - 1], "gamma check: thicknesses must strictly decrease");
        require(options.deltas[i] <= maxDelta, "gamma check: thickness exceeds the admissible maximum for this rod");
    }

    GammaReport report;
    report.kappa = data.kappa;
    report.modelEnergy = modelEnergy;
    report.limitEnergy = limitEnergy(data, section, material, G, options);

    const auto spts = sectionQuadrature(*section.section, section.torsion, options.sectionOrder);
    const auto apts = axialQuadrature(data, options.axialPoints);
    {
        const RecoveryField limit(data, 0.0);
        double n2 = 0.0;
        for (const AxialPoint &ap : apts) {
            const auto state = limit.axialState(ap.frame, ap.interval);
            for (const SectionPoint &S : spts) n2 += ap.weight * S.weight * limit.evaluate(state, S).limit.squaredNorm();
        }
        report.limitTensorNorm = std::sqrt(n2);
    }

    const double kappa = data.kappa;
    for (double delta : options.deltas) {
        const RecoveryField field(data, delta);
        const double scale = std::pow(delta, 2.0 * kappa);
        const double strainScale = std::pow(delta, kappa - 1.0);
        std::vector<DeltaSums> partial(apts.size());
        parallelFor(static_cast<int>(apts.size()), options.threads, [&](int i) {
            const AxialPoint &ap = apts[i];
            DeltaSums &ps = partial[i];
            const auto state = field.axialState(ap.frame, ap.interval);
            for (const SectionPoint &S : spts) {
                const RecoveryPoint rp = field.evaluate(state, S);
                const double W = svkDensity(rp.F, material);
                if (!std::isfinite(W) || !(rp.jac > 0.0)) {
                    if (ps.finite) ps.offending = Vec3(S.S1, S.S2, ap.frame.s);
                    ps.finite = false;
                    continue;
                }
                const Vec3 f = forceDensity(loads, delta, S.S1, S.S2, ap.frame.s);
                const double w = ap.weight * S.weight;
                ps.energy += w * delta * delta * rp.jac * (W - f.dot(rp.displacement)) / scale;
                const Mat3 gap = greenStVenant(rp.F) / strainScale - toPhysicalFrame(rp.limit, ap.frame);
                ps.tensorGap += w * gap.squaredNorm();
                const double dist = distanceToRotations(rp.F);
                ps.distance += w * delta * delta * rp.jac * dist * dist;
            }
        });
        DeltaSums total;
        for (const DeltaSums &ps : partial) {
            if (!ps.finite && total.finite) {
                total.finite = false;
                total.offending = ps.offending;
            }
            total.energy += ps.energy;
            total.tensorGap += ps.tensorGap;
            total.distance += ps.distance;
        }
        if (!total.finite) {
            std::ostringstream msg;
            msg << "delta " << delta << " dropped: det(grad v) <= 0 at (S1, S2, s3) = (" << total.offending.x() << ", "
                << total.offending.y() << ", " << total.offending.z() << ")";
            report.dropped.push_back(delta);
            report.warnings.push_back(msg.str());
            continue;
        }
        report.deltas.push_back(delta);
        report.quotients.push_back(total.energy);
        report.gaps.push_back(std::abs(total.energy - report.limitEnergy));
        report.tensorGaps.push_back(std::sqrt(total.tensorGap));
        report.distanceBounds.push_back(std::sqrt(total.distance) / std::pow(delta, kappa));
    }
    for (std::size_t i = 1; i < report.deltas.size(); ++i) {
        report.monotone = report.monotone && report.gaps[i] < report.gaps[i - 1];
        report.tensorMonotone = report.tensorMonotone && report.tensorGaps[i] < report.tensorGaps[i - 1];
    }
    report.slope = logLogSlope(report.deltas, report.gaps);
    report.tensorSlope = logLogSlope(report.deltas, report.tensorGaps);
    if (report.deltas.size() < 2) report.warnings.push_back("fewer than two thicknesses survived; no slope");
    return report;
}

} // namespace rodlimit
