#include "rodlimit/loads.hpp"

#include "rodlimit/error.hpp"
#include "rodlimit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace rodlimit {

namespace {

template <class T> T zeroOf() {
    if constexpr (std::is_same_v<T, double>) return 0.0;
    else return T::Zero();
}

template <class T> double magnitude(const T &v) {
    if constexpr (std::is_same_v<T, double>) return std::abs(v);
    else return v.norm();
}

} // namespace

Material Material::fromLame(double lambda, double mu) {
    require(std::isfinite(lambda) && std::isfinite(mu), "material: Lame moduli must be finite");
    require(mu > 0.0, "material: mu must be positive");
    require(lambda >= 0.0, "material: lambda must be non-negative");
    return Material{lambda, mu};
}

Material Material::fromYoungPoisson(double E, double nu) {
    require(E > 0.0, "material: Young's modulus must be positive");
    require(nu >= 0.0 && nu < 0.5, "material: Poisson ratio must lie in [0, 1/2)");
    const double mu = E / (2.0 * (1.0 + nu));
    const double lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    return fromLame(lambda, mu);
}

template <class T> Profile<T> Profile<T>::polynomial(std::vector<T> coefficients) {
    Profile p;
    p.m_coefficients = std::move(coefficients);
    return p;
}

template <class T> Profile<T> Profile<T>::table(std::vector<double> s, std::vector<T> values) {
    require(s.size() >= 2 && s.size() == values.size(), "profile table: needs >= 2 samples of matching size");
    for (std::size_t i = 1; i < s.size(); ++i)
        require(s[i] > s[i - 1], "profile table: abscissae must be strictly increasing");
    Profile p;
    p.m_knots = std::move(s);
    p.m_values = std::move(values);
    return p;
}

template <class T> T Profile<T>::operator()(double s) const {
    if (!m_knots.empty()) {
        const auto it = std::upper_bound(m_knots.begin(), m_knots.end(), s);
        std::size_t i = it == m_knots.begin() ? 0 : static_cast<std::size_t>(it - m_knots.begin()) - 1;
        i = std::min(i, m_knots.size() - 2);
        const double w = (s - m_knots[i]) / (m_knots[i + 1] - m_knots[i]);
        return T((1.0 - w) * m_values[i] + w * m_values[i + 1]);
    }
    T value = zeroOf<T>();
    for (auto c = m_coefficients.rbegin(); c != m_coefficients.rend(); ++c) value = T(value * s + *c);
    return value;
}

template <class T> bool Profile<T>::isZero() const {
    const auto &data = m_knots.empty() ? m_coefficients : m_values;
    return std::all_of(data.begin(), data.end(), [](const T &v) { return magnitude(v) == 0.0; });
}

template <class T> int Profile<T>::degree() const {
    if (isZero()) return -1;
    if (!m_knots.empty()) return 1;
    int d = static_cast<int>(m_coefficients.size()) - 1;
    while (d > 0 && magnitude(m_coefficients[d]) == 0.0) --d;
    return d;
}

template <class T> void Profile<T>::requireCovers(double L, const std::string &what) const {
    if (m_knots.empty()) return;
    const double tol = 1e-12 * std::max(1.0, L);
    require(m_knots.front() <= tol && m_knots.back() >= L - tol, what + ": table must cover [0, L]");
}

template class Profile<Vec3>;
template class Profile<double>;

Vec3 LoadProfile::gValue(double S1, double S2, double s3) const {
    Vec3 value = Vec3::Zero();
    for (const auto &term : g) value += std::pow(S1, term.p) * std::pow(S2, term.q) * term.coefficient(s3);
    return value;
}

bool LoadProfile::isZero() const {
    if (!f.isZero()) return false;
    for (const auto &term : g)
        if (!term.coefficient.isZero()) return false;
    return true;
}

void LoadProfile::validate(const CrossSection &section, double length) const {
    require(std::isfinite(kappa) && kappa >= 2.0, "loads: scaling exponent kappa must be >= 2");
    f.requireCovers(length, "loads: f");
    if (ftilde) ftilde->requireCovers(length, "loads: ftilde");
    for (const auto &term : g) {
        require(term.p >= 0 && term.q >= 0, "loads: section exponents must be non-negative");
        term.coefficient.requireCovers(length, "loads: g coefficient");
    }
    if (g.empty()) return;
    // int_omega g = sum_terms moment(p,q) c(s); check at the coefficient
    // samples (tables) or at 33 equispaced points (polynomials).
    std::vector<double> probes;
    for (int i = 0; i <= 32; ++i) probes.push_back(length * i / 32.0);
    for (const auto &term : g)
        for (double s : term.coefficient.knots())
            if (s >= 0.0 && s <= length) probes.push_back(s);
    const double r = std::max(section.maxRadius(), 1e-300);
    for (double s : probes) {
        Vec3 mean = Vec3::Zero();
        double bound = 0.0;
        for (const auto &term : g) {
            const Vec3 c = term.coefficient(s);
            mean += section.moment(term.p, term.q) * c;
            bound += section.area() * std::pow(r, term.p + term.q) * c.norm();
        }
        if (mean.norm() > 1e-10 * std::max(bound, 1e-300) && mean.norm() > 0.0) {
            std::ostringstream msg;
            msg << "loads: section force density must have zero section mean (|int g| = " << mean.norm()
                << " at s3 = " << s << ")";
            throw ValidationError(msg.str());
        }
    }
}

LoadMatrix::LoadMatrix(const LoadProfile &loads, std::shared_ptr<const FrameField> frame,
                       const CrossSection &section, std::vector<double> grid, double scale)
    : m_frame(std::move(frame)), m_f(loads.f), m_grid(std::move(grid)), m_area(section.area()), m_scale(scale) {
    require(m_frame != nullptr, "load matrix: frame field required");
    validateGrid(m_grid);
    require(std::abs(m_grid.back() - m_frame->line().length()) <= 1e-12 * std::max(1.0, m_grid.back()),
            "load matrix: grid must end at the rod length");
    loads.validate(section, m_grid.back());
    for (const auto &term : loads.g)
        m_terms.push_back({section.moment(term.p + 1, term.q), section.moment(term.p, term.q + 1), term.coefficient});
    m_zero = scale == 0.0 || loads.isZero();

    // Tail integrals at the nodes, accumulated from s = L backwards.
    const int M = static_cast<int>(m_grid.size()) - 1;
    m_nodeTail.assign(M + 1, Vec3::Zero());
    const auto &rule = gaussLegendre(8);
    for (int k = M - 1; k >= 0; --k) {
        const double a = m_grid[k], h = m_grid[k + 1] - a;
        Vec3 integral = Vec3::Zero();
        for (std::size_t q = 0; q < rule.nodes.size(); ++q)
            integral += rule.weights[q] * h * local(a + rule.nodes[q] * h).F;
        m_nodeTail[k] = m_nodeTail[k + 1] + integral;
    }
}

LoadMatrix LoadMatrix::scaled(double factor) const {
    LoadMatrix copy = *this;
    copy.m_scale *= factor;
    for (auto &v : copy.m_nodeTail) v *= factor;
    copy.m_zero = m_zero || factor == 0.0;
    return copy;
}

int LoadMatrix::intervalOf(double s) const {
    const auto it = std::upper_bound(m_grid.begin(), m_grid.end(), s);
    int k = it == m_grid.begin() ? 0 : static_cast<int>(it - m_grid.begin()) - 1;
    return std::min(k, static_cast<int>(m_grid.size()) - 2);
}

LoadPoint LoadMatrix::local(double s) const { return local(m_frame->at(s)); }

LoadPoint LoadMatrix::local(const FramePoint &p) const {
    LoadPoint out;
    if (m_zero) return out;
    for (const auto &term : m_terms) {
        const Vec3 c = term.c(p.s);
        out.G1 += term.m1 * c;
        out.G2 += term.m2 * c;
    }
    out.G1 *= m_scale;
    out.G2 *= m_scale;
    // det(n1|n2|dn_alpha) = dn_alpha . t
    out.F = m_scale * m_area * m_f(p.s) + out.G1 * p.dn1.dot(p.t) + out.G2 * p.dn2.dot(p.t);
    return out;
}

LoadPoint LoadMatrix::at(double s) const { return at(m_frame->at(s)); }

LoadPoint LoadMatrix::at(const FramePoint &p) const {
    LoadPoint out = local(p);
    if (m_zero) return out;
    const int k = intervalOf(p.s);
    const double b = m_grid[k + 1], h = b - p.s;
    Vec3 tail = m_nodeTail[k + 1];
    if (h > 0.0) {
        const auto &rule = gaussLegendre(8);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q)
            tail += rule.weights[q] * h * local(p.s + rule.nodes[q] * h).F;
    }
    out.T = tail;
    out.G = out.T * p.t.transpose() + out.G1 * p.n1.transpose() + out.G2 * p.n2.transpose();
    return out;
}

double LoadMatrix::l2Norm() const {
    if (m_zero) return 0.0;
    const auto &rule = gaussLegendre(4);
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < m_grid.size(); ++k) {
        const double a = m_grid[k], h = m_grid[k + 1] - a;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q)
            sum += rule.weights[q] * h * at(a + rule.nodes[q] * h).G.squaredNorm();
    }
    return std::sqrt(sum);
}

} // namespace rodlimit

namespace rodlimit {

std::pair<double, double> loadWorkBothWays(const LoadMatrix &G, const LoadProfile &loads, const FrameField &frame,
                                           const CrossSection &section, const RotationField &R) {
    require(std::abs(R.length() - G.length()) <= 1e-12 * std::max(1.0, G.length()),
            "load work: rotation field and load matrix cover different lengths");
    // Both R and G are smooth between the union of their breakpoints.
    std::vector<double> grid = G.grid();
    grid.insert(grid.end(), R.grid().begin(), R.grid().end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(),
                           [](double a, double b) { return std::abs(a - b) <= 1e-14 * std::max(1.0, std::abs(b)); }),
               grid.end());
    const auto &rule = gaussLegendre(8);
    int maxDegree = 0;
    for (const auto &term : loads.g) maxDegree = std::max(maxDegree, term.p + term.q + 2);
    const auto &tri = triangleRule(std::max(2, (maxDegree + 3) / 2));
    const auto &nodes = section.nodes();
    const double scale = G.scale();

    double direct = 0.0, viaG = 0.0;
    Vec3 D = Vec3::Zero(); // V - M at the left end of the current interval
    auto drift = [&](double s) {
        const FramePoint p = frame.at(s);
        return Vec3((R.evaluate(s) - Mat3::Identity()) * p.t);
    };
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double a = grid[k], h = grid[k + 1] - a;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double s = a + rule.nodes[q] * h;
            // V - M at s by a nested Gauss rule on [a, s].
            Vec3 Ds = D;
            const double hs = s - a;
            for (std::size_t r = 0; r < rule.nodes.size(); ++r)
                Ds += rule.weights[r] * hs * drift(a + rule.nodes[r] * hs);
            const FramePoint p = frame.at(s);
            const Mat3 RmI = R.evaluate(s) - Mat3::Identity();
            double work = scale * section.area() * loads.f(s).dot(Ds);
            if (!loads.g.empty()) {
                for (std::size_t t = 0; t < section.triangles().size(); ++t) {
                    const auto &T = section.triangles()[t];
                    const double area = section.triangleArea(static_cast<int>(t));
                    for (const auto &pt : tri) {
                        const Vec2 S = pt.l1 * nodes[T[0]] + pt.l2 * nodes[T[1]] + pt.l3 * nodes[T[2]];
                        const Vec3 g = scale * loads.gValue(S.x(), S.y(), s);
                        const double jac = RodChart::jacDet(p, S.x(), S.y());
                        work += pt.weight * area * g.dot(Ds * jac + RmI * (S.x() * p.n1 + S.y() * p.n2));
                    }
                }
            }
            direct += rule.weights[q] * h * work;
            const Mat3 Gs = G.at(p).G;
            viaG += rule.weights[q] * h * (Gs.array() * RmI.array()).sum();
        }
        for (std::size_t r = 0; r < rule.nodes.size(); ++r) D += rule.weights[r] * h * drift(a + rule.nodes[r] * h);
    }
    return {direct, viaG};
}

void verifyLoadIdentity(const LoadMatrix &G, const LoadProfile &loads, const FrameField &frame,
                        const CrossSection &section, int pairs, unsigned seed) {
    if (G.isZero()) return;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double L = G.length();
    const int M = 16;
    for (int pair = 0; pair < pairs; ++pair) {
        // Generator of moderate size so that R - I is O(1).
        std::vector<Vec3> gen(M);
        for (auto &a : gen) a = Vec3(unit(rng), unit(rng), unit(rng)) * (1.5 / L);
        const RotationField R = integrateGenerator(uniformGrid(L, M), gen);
        const auto [direct, viaG] = loadWorkBothWays(G, loads, frame, section, R);
        const double tol = 1e-8 * std::max({std::abs(direct), std::abs(viaG), G.l2Norm() * std::sqrt(L)});
        if (std::abs(direct - viaG) > tol) {
            std::ostringstream msg;
            msg << "load matrix: defining identity violated (direct " << direct << ", through G " << viaG << ")";
            throw ValidationError(msg.str());
        }
    }
}

LoadMatrix assembleLoadMatrix(const LoadProfile &loads, std::shared_ptr<const FrameField> frame,
                              const CrossSection &section, std::vector<double> grid) {
    const FrameField &f = *frame;
    LoadMatrix G(loads, std::move(frame), section, std::move(grid));
    verifyLoadIdentity(G, loads, f, section);
    return G;
}

} // namespace rodlimit
