#include "rodlimit/geometry.hpp"

#include "rodlimit/cross_section.hpp"
#include "rodlimit/error.hpp"
#include "rodlimit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace rodlimit {

std::string curveKindName(CurveKind kind) {
    switch (kind) {
    case CurveKind::Straight: return "straight";
    case CurveKind::CircularArc: return "circular-arc";
    case CurveKind::Helix: return "helix";
    case CurveKind::SampledSpline: return "sampled-spline";
    }
    return "unknown";
}

std::string frameMethodName(FrameMethod method) {
    return method == FrameMethod::Analytic ? "analytic" : "rotation-minimizing";
}

namespace {

bool finite(const Vec3 &v) { return v.allFinite(); }

// Unit vector normal to t obtained from the coordinate axis least aligned with t.
Vec3 defaultNormal(const Vec3 &t) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(t[i]) < std::abs(t[best])) best = i;
    Vec3 e = Vec3::Unit(best);
    return (e - e.dot(t) * t).normalized();
}

Vec3 projectNormal(const Vec3 &candidate, const Vec3 &t) {
    const Vec3 n = candidate - candidate.dot(t) * t;
    require(n.norm() > 1e-8 * std::max(1.0, candidate.norm()), "initial normal must not be parallel to the tangent");
    return n.normalized();
}

// Solves a tridiagonal system with the Thomas algorithm (diagonally dominant input).
std::vector<double> solveTridiagonal(std::vector<double> lower, std::vector<double> diag, std::vector<double> upper,
                                     std::vector<double> rhs) {
    const size_t n = diag.size();
    for (size_t i = 1; i < n; ++i) {
        const double m = lower[i] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
    return x;
}

double segmentDistance(const Vec3 &p0, const Vec3 &p1, const Vec3 &q0, const Vec3 &q1) {
    // Closest points between two segments (clamped least squares).
    const Vec3 d1 = p1 - p0, d2 = q1 - q0, r = p0 - q0;
    const double a = d1.dot(d1), e = d2.dot(d2), f = d2.dot(r);
    double s = 0.0, t = 0.0;
    const double c = d1.dot(r), b = d1.dot(d2);
    const double denom = a * e - b * b;
    s = denom > 1e-300 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
    t = (b * s + f) / e;
    if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
    } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
    }
    return ((p0 + s * d1) - (q0 + t * d2)).norm();
}

} // namespace

// ---------------------------------------------------------------- spline

Vec3 MiddleLine::SplineData::value(int k, double t) const { return a[k] + t * (b[k] + t * (c[k] + t * d[k])); }
Vec3 MiddleLine::SplineData::first(int k, double t) const { return b[k] + t * (2.0 * c[k] + 3.0 * t * d[k]); }
Vec3 MiddleLine::SplineData::second(int k, double t) const { return 2.0 * c[k] + 6.0 * t * d[k]; }
double MiddleLine::SplineData::speed(int k, double t) const { return first(k, t).norm(); }

double MiddleLine::SplineData::lengthOf(int k, double t0, double t1) const {
    // Adaptive Gauss-Legendre: accept a panel when one 8-point rule agrees
    // with two half-panel rules.
    const QuadRule1D &g = gaussLegendre(8);
    auto panel = [&](double x0, double x1) {
        double sum = 0.0;
        for (size_t i = 0; i < g.nodes.size(); ++i) sum += g.weights[i] * speed(k, x0 + (x1 - x0) * g.nodes[i]);
        return sum * (x1 - x0);
    };
    struct Panel { double x0, x1, whole; int depth; };
    std::vector<Panel> stack{{t0, t1, panel(t0, t1), 0}};
    double total = 0.0;
    while (!stack.empty()) {
        Panel p = stack.back();
        stack.pop_back();
        const double mid = 0.5 * (p.x0 + p.x1);
        const double left = panel(p.x0, mid), right = panel(mid, p.x1);
        if (std::abs(left + right - p.whole) <= 1e-15 * std::max(1.0, std::abs(p.whole)) || p.depth > 30) {
            total += left + right;
        } else {
            stack.push_back({p.x0, mid, left, p.depth + 1});
            stack.push_back({mid, p.x1, right, p.depth + 1});
        }
    }
    return total;
}

std::pair<int, double> MiddleLine::locate(double s) const {
    const SplineData &sp = *m_spline;
    const int segs = static_cast<int>(sp.a.size());
    int k = static_cast<int>(std::upper_bound(sp.cumulative.begin(), sp.cumulative.end(), s) - sp.cumulative.begin()) - 1;
    k = std::clamp(k, 0, segs - 1);
    const double target = s - sp.cumulative[k];
    const double h = sp.knots[k + 1] - sp.knots[k];
    const double segLen = sp.cumulative[k + 1] - sp.cumulative[k];
    // Safeguarded Newton on the arc-length function of the segment.
    double lo = 0.0, hi = h;
    double tau = std::clamp(target / segLen * h, 0.0, h);
    for (int it = 0; it < 100; ++it) {
        const double f = sp.lengthOf(k, 0.0, tau) - target;
        if (f > 0) hi = tau; else lo = tau;
        const double step = f / sp.speed(k, tau);
        double next = tau - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - tau) <= 1e-15 * h) { tau = next; break; }
        tau = next;
    }
    return {k, tau};
}

// ---------------------------------------------------------------- MiddleLine

std::shared_ptr<const MiddleLine> MiddleLine::build(const CurveSpec &spec) {
    std::shared_ptr<MiddleLine> line(new MiddleLine());
    line->m_spec = spec;
    switch (spec.kind) {
    case CurveKind::Straight: {
        require(finite(spec.origin) && finite(spec.direction), "straight line: non-finite parameters");
        require(spec.direction.norm() > 0.0, "straight line: zero direction");
        require(std::isfinite(spec.length) && spec.length > 0.0, "straight line: length must be positive");
        line->m_spec.direction = spec.direction.normalized();
        line->m_length = spec.length;
        line->m_maxCurvature = 0.0;
        break;
    }
    case CurveKind::CircularArc: {
        require(finite(spec.center), "circular arc: non-finite center");
        require(std::isfinite(spec.radius) && spec.radius > 0.0, "circular arc: radius must be positive");
        require(std::isfinite(spec.length) && spec.length > 0.0, "circular arc: length must be positive");
        require(spec.length < 2.0 * std::numbers::pi * spec.radius,
                "circular arc: length must be below one full turn (self-intersection)");
        line->m_length = spec.length;
        line->m_maxCurvature = 1.0 / spec.radius;
        break;
    }
    case CurveKind::Helix: {
        require(finite(spec.center), "helix: non-finite center");
        require(std::isfinite(spec.radius) && spec.radius > 0.0, "helix: radius must be positive");
        require(std::isfinite(spec.pitchParameter), "helix: non-finite pitch");
        require(std::isfinite(spec.length) && spec.length > 0.0, "helix: length must be positive");
        const double c = std::hypot(spec.radius, spec.pitchParameter);
        if (spec.pitchParameter == 0.0)
            require(spec.length < 2.0 * std::numbers::pi * spec.radius, "helix: zero pitch and a full turn self-intersect");
        line->m_length = spec.length;
        line->m_maxCurvature = spec.radius / (c * c);
        break;
    }
    case CurveKind::SampledSpline: {
        const auto &P = spec.points;
        require(P.size() >= 4, "sampled spline: at least 4 points are required");
        for (const Vec3 &p : P) require(finite(p), "sampled spline: non-finite point");
        const int n = static_cast<int>(P.size()) - 1;
        SplineData sp;
        sp.knots.assign(n + 1, 0.0);
        for (int i = 0; i < n; ++i) {
            const double chord = (P[i + 1] - P[i]).norm();
            require(chord > 0.0, "sampled spline: repeated consecutive points (zero-length chord)");
            sp.knots[i + 1] = sp.knots[i] + chord;
        }
        // Natural cubic spline: second derivatives m_i with m_0 = m_n = 0.
        std::vector<Vec3> m(n + 1, Vec3::Zero());
        if (n >= 2) {
            const int inner = n - 1;
            std::vector<double> lo(inner), di(inner), up(inner);
            for (int i = 1; i < n; ++i) {
                const double h0 = sp.knots[i] - sp.knots[i - 1], h1 = sp.knots[i + 1] - sp.knots[i];
                lo[i - 1] = h0;
                di[i - 1] = 2.0 * (h0 + h1);
                up[i - 1] = h1;
            }
            for (int c = 0; c < 3; ++c) {
                std::vector<double> rhs(inner);
                for (int i = 1; i < n; ++i) {
                    const double h0 = sp.knots[i] - sp.knots[i - 1], h1 = sp.knots[i + 1] - sp.knots[i];
                    rhs[i - 1] = 6.0 * ((P[i + 1][c] - P[i][c]) / h1 - (P[i][c] - P[i - 1][c]) / h0);
                }
                const auto x = solveTridiagonal(lo, di, up, rhs);
                for (int i = 1; i < n; ++i) m[i][c] = x[i - 1];
            }
        }
        for (int i = 0; i < n; ++i) {
            const double h = sp.knots[i + 1] - sp.knots[i];
            sp.a.push_back(P[i]);
            sp.b.push_back((P[i + 1] - P[i]) / h - h * (2.0 * m[i] + m[i + 1]) / 6.0);
            sp.c.push_back(m[i] / 2.0);
            sp.d.push_back((m[i + 1] - m[i]) / (6.0 * h));
        }
        // Regularity: the parametrization must not stall.
        const int dense = 32;
        double minSpeed = std::numeric_limits<double>::infinity(), maxCurv = 0.0;
        std::vector<Vec3> poly;
        for (int i = 0; i < n; ++i) {
            const double h = sp.knots[i + 1] - sp.knots[i];
            for (int j = 0; j <= dense; ++j) {
                const double tau = h * j / dense;
                const Vec3 d1 = sp.first(i, tau), d2 = sp.second(i, tau);
                const double v = d1.norm();
                minSpeed = std::min(minSpeed, v);
                if (v > 0) maxCurv = std::max(maxCurv, d1.cross(d2).norm() / (v * v * v));
                if (j < dense || i == n - 1) poly.push_back(sp.value(i, tau));
            }
        }
        require(minSpeed > 1e-8 * sp.knots.back(), "sampled spline: degenerate (cusp) parametrization");
        // Self-intersection on a dense polyline: non-adjacent segments must keep apart.
        const double tol = 1e-9 * sp.knots.back();
        for (size_t i = 0; i + 1 < poly.size(); ++i)
            for (size_t j = i + 2; j + 1 < poly.size(); ++j)
                require(segmentDistance(poly[i], poly[i + 1], poly[j], poly[j + 1]) > tol,
                        "sampled spline: curve is self-intersecting");
        sp.cumulative.assign(n + 1, 0.0);
        for (int i = 0; i < n; ++i)
            sp.cumulative[i + 1] = sp.cumulative[i] + sp.lengthOf(i, 0.0, sp.knots[i + 1] - sp.knots[i]);
        line->m_length = sp.cumulative.back();
        line->m_maxCurvature = maxCurv * 1.05; // margin over the dense sample
        line->m_spline = std::move(sp);
        break;
    }
    }
    return line;
}

Vec3 MiddleLine::position(double s) const {
    const CurveSpec &p = m_spec;
    switch (p.kind) {
    case CurveKind::Straight: return p.origin + s * p.direction;
    case CurveKind::CircularArc: {
        const double a = s / p.radius;
        return p.center + p.radius * Vec3(std::cos(a), std::sin(a), 0.0);
    }
    case CurveKind::Helix: {
        const double c = std::hypot(p.radius, p.pitchParameter), a = s / c;
        return p.center + Vec3(p.radius * std::cos(a), p.radius * std::sin(a), p.pitchParameter * a);
    }
    case CurveKind::SampledSpline: {
        const auto [k, tau] = locate(s);
        return m_spline->value(k, tau);
    }
    }
    return Vec3::Zero();
}

Vec3 MiddleLine::tangent(double s) const {
    const CurveSpec &p = m_spec;
    switch (p.kind) {
    case CurveKind::Straight: return p.direction;
    case CurveKind::CircularArc: {
        const double a = s / p.radius;
        return Vec3(-std::sin(a), std::cos(a), 0.0);
    }
    case CurveKind::Helix: {
        const double c = std::hypot(p.radius, p.pitchParameter), a = s / c;
        return Vec3(-p.radius * std::sin(a), p.radius * std::cos(a), p.pitchParameter) / c;
    }
    case CurveKind::SampledSpline: {
        const auto [k, tau] = locate(s);
        return m_spline->first(k, tau).normalized();
    }
    }
    return Vec3::Zero();
}

Vec3 MiddleLine::tangentDerivative(double s) const {
    const CurveSpec &p = m_spec;
    switch (p.kind) {
    case CurveKind::Straight: return Vec3::Zero();
    case CurveKind::CircularArc: {
        const double a = s / p.radius;
        return -Vec3(std::cos(a), std::sin(a), 0.0) / p.radius;
    }
    case CurveKind::Helix: {
        const double c = std::hypot(p.radius, p.pitchParameter), a = s / c;
        return -p.radius / (c * c) * Vec3(std::cos(a), std::sin(a), 0.0);
    }
    case CurveKind::SampledSpline: {
        const auto [k, tau] = locate(s);
        const Vec3 d1 = m_spline->first(k, tau), d2 = m_spline->second(k, tau);
        const double v = d1.norm();
        const Vec3 t = d1 / v;
        return (d2 - d2.dot(t) * t) / (v * v);
    }
    }
    return Vec3::Zero();
}

// ---------------------------------------------------------------- frames

Vec3 doubleReflection(const Vec3 &x0, const Vec3 &t0, const Vec3 &r0, const Vec3 &x1, const Vec3 &t1) {
    Vec3 r = r0, t = t0;
    const Vec3 v1 = x1 - x0;
    const double c1 = v1.dot(v1);
    if (c1 > 0.0) {
        r = r - (2.0 / c1) * v1.dot(r) * v1;
        t = t - (2.0 / c1) * v1.dot(t) * v1;
    }
    const Vec3 v2 = t1 - t;
    const double c2 = v2.dot(v2);
    if (c2 > 0.0) r = r - (2.0 / c2) * v2.dot(r) * v2;
    return (r - r.dot(t1) * t1).normalized();
}

std::shared_ptr<const FrameField> FrameField::build(std::shared_ptr<const MiddleLine> line, const FrameSpec &spec) {
    require(line != nullptr, "frame: missing middle line");
    std::shared_ptr<FrameField> f(new FrameField());
    f->m_line = line;
    f->m_spec = spec;
    const Vec3 t0 = line->tangent(0.0);
    if (spec.method == FrameMethod::Analytic) {
        switch (line->kind()) {
        case CurveKind::Straight:
            f->m_constantNormal = spec.initialNormal ? projectNormal(*spec.initialNormal, t0) : defaultNormal(t0);
            f->m_orientation = "constant frame";
            break;
        case CurveKind::CircularArc:
        case CurveKind::Helix:
            require(!spec.initialNormal, "frame: analytic arc/helix frames fix n1 (toward the center of curvature)");
            f->m_orientation = "n1 = inward normal (toward the center of curvature), n2 = t ^ n1";
            break;
        case CurveKind::SampledSpline:
            throw ValidationError("frame: analytic method is not available for sampled splines");
        }
        return f;
    }
    require(spec.rotationMinimizingIntervals >= 1, "frame: rotation-minimizing interval count must be positive");
    const int N = spec.rotationMinimizingIntervals;
    const double L = line->length();
    f->m_nodes.resize(N + 1);
    f->m_nodeNormals.resize(N + 1);
    for (int k = 0; k <= N; ++k) f->m_nodes[k] = L * k / N;
    f->m_nodes[N] = L;
    f->m_nodeNormals[0] = spec.initialNormal ? projectNormal(*spec.initialNormal, t0) : defaultNormal(t0);
    Vec3 x = line->position(0.0), t = t0;
    for (int k = 0; k < N; ++k) {
        const double s1 = f->m_nodes[k + 1];
        const Vec3 x1 = line->position(s1), t1 = line->tangent(s1);
        f->m_nodeNormals[k + 1] = doubleReflection(x, t, f->m_nodeNormals[k], x1, t1);
        x = x1;
        t = t1;
    }
    f->m_orientation = "rotation-minimizing (double reflection), n2 = t ^ n1";
    return f;
}

Vec3 FrameField::normalAt(double s) const {
    const MiddleLine &line = *m_line;
    if (m_spec.method == FrameMethod::Analytic) {
        if (line.kind() == CurveKind::Straight) return m_constantNormal;
        const double a = line.kind() == CurveKind::CircularArc
                             ? s / line.spec().radius
                             : s / std::hypot(line.spec().radius, line.spec().pitchParameter);
        return -Vec3(std::cos(a), std::sin(a), 0.0);
    }
    const int N = static_cast<int>(m_nodes.size()) - 1;
    int k = static_cast<int>(std::upper_bound(m_nodes.begin(), m_nodes.end(), s) - m_nodes.begin()) - 1;
    k = std::clamp(k, 0, N - 1);
    if (s == m_nodes[k]) return m_nodeNormals[k];
    const double sk = m_nodes[k];
    return doubleReflection(line.position(sk), line.tangent(sk), m_nodeNormals[k], line.position(s), line.tangent(s));
}

FramePoint FrameField::at(double s) const {
    const MiddleLine &line = *m_line;
    require(std::isfinite(s) && s >= -1e-12 && s <= line.length() + 1e-12, "frame: arc length outside [0, L]");
    s = std::clamp(s, 0.0, line.length());
    FramePoint p;
    p.s = s;
    p.M = line.position(s);
    p.t = line.tangent(s);
    p.dt = line.tangentDerivative(s);
    p.n1 = normalAt(s);
    p.n2 = p.t.cross(p.n1);
    if (m_spec.method == FrameMethod::Analytic && line.kind() != CurveKind::Straight) {
        const double c = line.kind() == CurveKind::CircularArc
                             ? line.spec().radius
                             : std::hypot(line.spec().radius, line.spec().pitchParameter);
        const double a = s / c;
        p.dn1 = Vec3(std::sin(a), -std::cos(a), 0.0) / c;
        p.dn2 = p.dt.cross(p.n1) + p.t.cross(p.dn1);
    } else if (m_spec.method == FrameMethod::Analytic) {
        p.dn1 = p.dn2 = Vec3::Zero();
    } else {
        // Rotation-minimizing transport: dn_alpha/ds = -(n_alpha . t') t.
        p.dn1 = -p.n1.dot(p.dt) * p.t;
        p.dn2 = -p.n2.dot(p.dt) * p.t;
    }
    return p;
}

// ---------------------------------------------------------------- chart

double RodChart::maxDelta(const MiddleLine &line, const CrossSection &section) {
    const double k = line.maxCurvature() * section.maxRadius();
    return k > 0.0 ? 0.9 / k : std::numeric_limits<double>::infinity();
}

RodChart::RodChart(std::shared_ptr<const FrameField> frame, std::shared_ptr<const CrossSection> section, double delta)
    : m_frame(std::move(frame)), m_section(std::move(section)), m_delta(delta) {
    require(m_frame != nullptr && m_section != nullptr, "chart: missing frame or section");
    require(std::isfinite(delta) && delta > 0.0, "chart: delta must be positive");
    const double d0 = maxDelta();
    require(delta <= d0, "chart: delta exceeds delta0 = 0.9/(max curvature * max section radius); geometry too thick");
    // Tube overlap: points of the middle line further apart in arc length
    // than the local injectivity range must stay more than 2 delta r apart.
    const double L = length(), reach = 2.0 * delta * m_section->maxRadius();
    const int samples = 400;
    std::vector<Vec3> pts(samples + 1);
    for (int i = 0; i <= samples; ++i) pts[i] = line().position(L * i / samples);
    const double local = std::numbers::pi * delta * m_section->maxRadius();
    for (int i = 0; i <= samples; ++i)
        for (int j = i + 1; j <= samples; ++j) {
            if (L * (j - i) / samples <= local) continue;
            require((pts[i] - pts[j]).norm() > reach, "chart: the rod overlaps itself (Phi is not injective)");
        }
}

void RodChart::checkDomain(const Vec3 &s) const {
    require(s.allFinite(), "chart: non-finite coordinates");
    require(s.z() >= -1e-12 && s.z() <= length() + 1e-12, "chart: s3 outside [0, L]");
    require(m_section->contains(s.x() / m_delta, s.y() / m_delta), "chart: (s1/delta, s2/delta) outside omega");
}

Vec3 RodChart::phi(const Vec3 &s) const {
    checkDomain(s);
    return phi(m_frame->at(s.z()), s.x(), s.y());
}

double RodChart::jacDet(const Vec3 &s) const {
    checkDomain(s);
    const double d = jacDet(m_frame->at(s.z()), s.x(), s.y());
    require(d > 0.0, "chart: non-positive Jacobian determinant (delta > delta0)");
    return d;
}

Mat3 RodChart::gradPhi(const Vec3 &s) const {
    checkDomain(s);
    return gradPhi(m_frame->at(s.z()), s.x(), s.y());
}

Mat3 RodChart::gradPhi(const FramePoint &f, double s1, double s2) {
    Mat3 G;
    G.col(0) = f.n1;
    G.col(1) = f.n2;
    G.col(2) = f.t + s1 * f.dn1 + s2 * f.dn2;
    return G;
}

} // namespace rodlimit
