#include "rodlimit/cross_section.hpp"

#include "rodlimit/error.hpp"
#include "rodlimit/quadrature.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

namespace rodlimit {

std::string sectionKindName(SectionKind kind) {
    switch (kind) {
    case SectionKind::Disc: return "disc";
    case SectionKind::Ellipse: return "ellipse";
    case SectionKind::Rectangle: return "rectangle";
    case SectionKind::Polygon: return "polygon";
    }
    return "unknown";
}

namespace {

double cross2(const Vec2 &a, const Vec2 &b) { return a.x() * b.y() - a.y() * b.x(); }

double signedArea(const Vec2 &a, const Vec2 &b, const Vec2 &c) { return 0.5 * cross2(b - a, c - a); }

struct Mesh {
    std::vector<Vec2> nodes;
    std::vector<Triangle> triangles;
};

// Concentric rings around the origin: ring i has 6i nodes at radius i/rings.
// The outer radius is scaled so that the outer polygon has area pi.
Mesh unitDiscMesh(int level) {
    const int rings = std::max(2, static_cast<int>(std::lround(10.0 * std::pow(2.0, level - 3))));
    const int outer = 6 * rings;
    const double angle = 2.0 * std::numbers::pi / outer;
    const double scale = std::sqrt(2.0 * std::numbers::pi / (outer * std::sin(angle)));
    Mesh m;
    m.nodes.push_back(Vec2::Zero());
    std::vector<int> start{0};
    for (int i = 1; i <= rings; ++i) {
        start.push_back(static_cast<int>(m.nodes.size()));
        const double r = scale * i / rings;
        for (int j = 0; j < 6 * i; ++j) {
            const double a = 2.0 * std::numbers::pi * j / (6 * i);
            m.nodes.emplace_back(r * std::cos(a), r * std::sin(a));
        }
    }
    // Ring 0 -> 1.
    for (int j = 0; j < 6; ++j) m.triangles.push_back({0, start[1] + j, start[1] + (j + 1) % 6});
    // Zipper between consecutive rings ordered by angle.
    for (int i = 2; i <= rings; ++i) {
        const int ni = 6 * (i - 1), no = 6 * i;
        int a = 0, b = 0;
        while (a < ni || b < no) {
            const double nextInner = static_cast<double>(a + 1) / ni, nextOuter = static_cast<double>(b + 1) / no;
            const int ia = start[i - 1] + a % ni, ob = start[i] + b % no;
            if (b < no && (a >= ni || nextOuter <= nextInner)) {
                m.triangles.push_back({ia, ob, start[i] + (b + 1) % no});
                ++b;
            } else {
                m.triangles.push_back({ia, ob, start[i - 1] + (a + 1) % ni});
                ++a;
            }
        }
    }
    return m;
}

Mesh rectangleMesh(double a, double b, int level) {
    const double h = std::max(a, b) / std::pow(2.0, level + 1);
    const int nx = std::max(1, static_cast<int>(std::lround(a / h)));
    const int ny = std::max(1, static_cast<int>(std::lround(b / h)));
    Mesh m;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) m.nodes.emplace_back(-a / 2 + a * i / nx, -b / 2 + b * j / ny);
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            // Split along the (i,j)-(i+1,j+1) diagonal.
            m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    return m;
}

bool segmentsCross(const Vec2 &p0, const Vec2 &p1, const Vec2 &q0, const Vec2 &q1) {
    const double d1 = cross2(p1 - p0, q0 - p0), d2 = cross2(p1 - p0, q1 - p0);
    const double d3 = cross2(q1 - q0, p0 - q0), d4 = cross2(q1 - q0, p1 - q0);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    auto onSeg = [](const Vec2 &a, const Vec2 &b, const Vec2 &p, double d) {
        return d == 0.0 && p.x() >= std::min(a.x(), b.x()) && p.x() <= std::max(a.x(), b.x()) &&
               p.y() >= std::min(a.y(), b.y()) && p.y() <= std::max(a.y(), b.y());
    };
    return onSeg(p0, p1, q0, d1) || onSeg(p0, p1, q1, d2) || onSeg(q0, q1, p0, d3) || onSeg(q0, q1, p1, d4);
}

bool pointInTriangle(const Vec2 &p, const Vec2 &a, const Vec2 &b, const Vec2 &c) {
    return cross2(b - a, p - a) >= 0 && cross2(c - b, p - b) >= 0 && cross2(a - c, p - c) >= 0;
}

Mesh earClip(const std::vector<Vec2> &V) {
    const int n = static_cast<int>(V.size());
    Mesh m;
    m.nodes = V;
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    while (idx.size() > 3) {
        const int k = static_cast<int>(idx.size());
        bool clipped = false;
        for (int i = 0; i < k && !clipped; ++i) {
            const int a = idx[(i + k - 1) % k], b = idx[i], c = idx[(i + 1) % k];
            if (signedArea(V[a], V[b], V[c]) <= 0) continue;
            bool empty = true;
            for (int j : idx) {
                if (j == a || j == b || j == c) continue;
                if (pointInTriangle(V[j], V[a], V[b], V[c])) { empty = false; break; }
            }
            if (!empty) continue;
            m.triangles.push_back({a, b, c});
            idx.erase(idx.begin() + i);
            clipped = true;
        }
        require(clipped, "polygon: ear clipping failed (polygon not simple)");
    }
    m.triangles.push_back({idx[0], idx[1], idx[2]});
    return m;
}

// Lawson edge flips toward the Delaunay triangulation of the polygon
// (boundary edges are never flipped).
void lawsonFlips(Mesh &m) {
    auto inCircle = [](const Vec2 &a, const Vec2 &b, const Vec2 &c, const Vec2 &d) {
        const double ax = a.x() - d.x(), ay = a.y() - d.y(), bx = b.x() - d.x(), by = b.y() - d.y();
        const double cx = c.x() - d.x(), cy = c.y() - d.y();
        return (ax * ax + ay * ay) * (bx * cy - cx * by) - (bx * bx + by * by) * (ax * cy - cx * ay) +
                   (cx * cx + cy * cy) * (ax * by - bx * ay) >
               1e-14;
    };
    for (int pass = 0; pass < 1000; ++pass) {
        std::map<std::pair<int, int>, std::pair<int, int>> edges; // edge -> (triangle, local opposite)
        bool flipped = false;
        for (int t = 0; t < static_cast<int>(m.triangles.size()) && !flipped; ++t) {
            for (int e = 0; e < 3 && !flipped; ++e) {
                const int u = m.triangles[t][(e + 1) % 3], v = m.triangles[t][(e + 2) % 3];
                const auto key = std::minmax(u, v);
                auto it = edges.find(key);
                if (it == edges.end()) {
                    edges[key] = {t, e};
                    continue;
                }
                const auto [t2, e2] = it->second;
                const int p = m.triangles[t][e], q = m.triangles[t2][e2];
                // Triangle t is (p,u,v) counter-clockwise; check q against its circumcircle.
                if (!inCircle(m.nodes[p], m.nodes[u], m.nodes[v], m.nodes[q])) continue;
                if (signedArea(m.nodes[p], m.nodes[u], m.nodes[q]) <= 0 ||
                    signedArea(m.nodes[p], m.nodes[q], m.nodes[v]) <= 0)
                    continue;
                m.triangles[t] = {p, u, q};
                m.triangles[t2] = {p, q, v};
                flipped = true;
            }
        }
        if (!flipped) return;
    }
}

void redRefine(Mesh &m) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
        const auto key = std::minmax(a, b);
        auto it = mid.find(key);
        if (it != mid.end()) return it->second;
        const int id = static_cast<int>(m.nodes.size());
        m.nodes.push_back(0.5 * (m.nodes[a] + m.nodes[b]));
        mid[key] = id;
        return id;
    };
    std::vector<Triangle> out;
    out.reserve(4 * m.triangles.size());
    for (const Triangle &t : m.triangles) {
        const int ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
        out.push_back({t[0], ab, ca});
        out.push_back({ab, t[1], bc});
        out.push_back({ca, bc, t[2]});
        out.push_back({ab, bc, ca});
    }
    m.triangles = std::move(out);
}

Mesh polygonMesh(const std::vector<Vec2> &V, int level) {
    const int n = static_cast<int>(V.size());
    require(n >= 3, "polygon: at least 3 vertices are required");
    for (const Vec2 &v : V) require(v.allFinite(), "polygon: non-finite vertex");
    double area = 0.0;
    for (int i = 0; i < n; ++i) area += 0.5 * cross2(V[i], V[(i + 1) % n]);
    require(area > 0.0, "polygon: vertices must be counter-clockwise with positive area");
    for (int i = 0; i < n; ++i)
        require((V[(i + 1) % n] - V[i]).norm() > 0.0, "polygon: repeated consecutive vertices");
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;
            require(!segmentsCross(V[i], V[(i + 1) % n], V[j], V[(j + 1) % n]), "polygon: edges intersect (not simple)");
        }
    Mesh m = earClip(V);
    lawsonFlips(m);
    for (int l = 0; l < level; ++l) redRefine(m);
    return m;
}

} // namespace

// ---------------------------------------------------------------- CrossSection

std::shared_ptr<const CrossSection> CrossSection::build(const SectionSpec &spec) {
    require(spec.refinementLevel >= 0 && spec.refinementLevel <= 9, "section: refinement level must be in [0, 9]");
    require(spec.offset.allFinite(), "section: non-finite offset");
    Mesh m;
    switch (spec.kind) {
    case SectionKind::Disc:
        require(std::isfinite(spec.radius) && spec.radius > 0.0, "disc: radius must be positive (degenerate shape)");
        m = unitDiscMesh(spec.refinementLevel);
        for (Vec2 &p : m.nodes) p = spec.radius * p + spec.offset;
        break;
    case SectionKind::Ellipse:
        require(std::isfinite(spec.semiAxisA) && std::isfinite(spec.semiAxisB) && spec.semiAxisA > 0.0 &&
                    spec.semiAxisB > 0.0,
                "ellipse: semi-axes must be positive (degenerate shape)");
        m = unitDiscMesh(spec.refinementLevel);
        for (Vec2 &p : m.nodes) p = Vec2(spec.semiAxisA * p.x(), spec.semiAxisB * p.y()) + spec.offset;
        break;
    case SectionKind::Rectangle:
        require(std::isfinite(spec.width) && std::isfinite(spec.height) && spec.width > 0.0 && spec.height > 0.0,
                "rectangle: width and height must be positive (degenerate shape)");
        m = rectangleMesh(spec.width, spec.height, spec.refinementLevel);
        for (Vec2 &p : m.nodes) p += spec.offset;
        break;
    case SectionKind::Polygon:
        m = polygonMesh(spec.vertices, spec.refinementLevel);
        break;
    }
    auto s = fromMesh(std::move(m.nodes), std::move(m.triangles), spec.kind);
    return s;
}

std::shared_ptr<const CrossSection> CrossSection::fromMesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles,
                                                           SectionKind kind) {
    require(!nodes.empty() && !triangles.empty(), "section: empty mesh");
    std::shared_ptr<CrossSection> s(new CrossSection());
    s->m_kind = kind;
    s->m_nodes = std::move(nodes);
    s->m_triangles = std::move(triangles);
    const int n = static_cast<int>(s->m_nodes.size());
    for (const Vec2 &p : s->m_nodes) require(p.allFinite(), "section: non-finite node");
    for (Triangle &t : s->m_triangles) {
        for (int v : t) require(v >= 0 && v < n, "section: triangle references a missing node");
        const double a = signedArea(s->m_nodes[t[0]], s->m_nodes[t[1]], s->m_nodes[t[2]]);
        require(a != 0.0, "section: zero-area triangle");
        if (a < 0) std::swap(t[1], t[2]);
    }
    s->normalize();
    s->extractBoundary();
    return s;
}

double CrossSection::triangleArea(int t) const {
    const Triangle &T = m_triangles[t];
    return signedArea(m_nodes[T[0]], m_nodes[T[1]], m_nodes[T[2]]);
}

double CrossSection::moment(int p, int q) const {
    require(p >= 0 && q >= 0, "section: moment orders must be nonnegative");
    const int order = (p + q + 3) / 2 + 0; // collapsed rule exact to degree 2n - 2
    const auto &rule = triangleRule(std::max(1, order));
    double total = 0.0;
    for (size_t t = 0; t < m_triangles.size(); ++t) {
        const Triangle &T = m_triangles[t];
        const Vec2 &a = m_nodes[T[0]], &b = m_nodes[T[1]], &c = m_nodes[T[2]];
        double sum = 0.0;
        for (const auto &r : rule) {
            const Vec2 x = r.l1 * a + r.l2 * b + r.l3 * c;
            sum += r.weight * std::pow(x.x(), p) * std::pow(x.y(), q);
        }
        total += sum * triangleArea(static_cast<int>(t));
    }
    return total;
}

void CrossSection::normalize() {
    double area = 0.0;
    Vec2 first = Vec2::Zero();
    for (size_t t = 0; t < m_triangles.size(); ++t) {
        const Triangle &T = m_triangles[t];
        const double a = triangleArea(static_cast<int>(t));
        area += a;
        first += a * (m_nodes[T[0]] + m_nodes[T[1]] + m_nodes[T[2]]) / 3.0;
    }
    require(area > 0.0, "section: zero area (degenerate shape)");
    const Vec2 c = first / area;
    for (Vec2 &p : m_nodes) p -= c;
    // Second recentering pass removes the roundoff of the first.
    Vec2 residual = Vec2(moment(1, 0), moment(0, 1)) / area;
    for (Vec2 &p : m_nodes) p -= residual;
    m_inputCentroid = c + residual;
    m_area = area;

    const double Ixx = moment(2, 0), Iyy = moment(0, 2), Ixy = moment(1, 1);
    double phi = 0.0;
    if (std::abs(Ixy) > 1e-14 * (Ixx + Iyy)) {
        phi = 0.5 * std::atan2(2.0 * Ixy, Ixx - Iyy);
        if (phi > std::numbers::pi / 4) phi -= std::numbers::pi / 2;
        if (phi <= -std::numbers::pi / 4) phi += std::numbers::pi / 2;
        const double cs = std::cos(phi), sn = std::sin(phi);
        for (Vec2 &p : m_nodes) p = Vec2(cs * p.x() + sn * p.y(), -sn * p.x() + cs * p.y());
    }
    m_principalAngle = phi;

    m_maxRadius = 0.0;
    Vec2 lo = m_nodes[0], hi = m_nodes[0];
    for (const Vec2 &p : m_nodes) {
        m_maxRadius = std::max(m_maxRadius, p.norm());
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    m_diameter = (hi - lo).norm();
    m_meshSize = 0.0;
    for (const Triangle &T : m_triangles)
        for (int e = 0; e < 3; ++e) m_meshSize = std::max(m_meshSize, (m_nodes[T[e]] - m_nodes[T[(e + 1) % 3]]).norm());
}

void CrossSection::extractBoundary() {
    std::map<std::pair<int, int>, int> count;
    for (const Triangle &T : m_triangles)
        for (int e = 0; e < 3; ++e) ++count[std::minmax(T[e], T[(e + 1) % 3])];
    std::map<int, int> next; // directed boundary edges keep the triangle orientation
    for (const Triangle &T : m_triangles)
        for (int e = 0; e < 3; ++e)
            if (count[std::minmax(T[e], T[(e + 1) % 3])] == 1) next[T[e]] = T[(e + 1) % 3];
    // Outer loop: the one with the largest enclosed area.
    std::vector<bool> used(m_nodes.size(), false);
    double bestArea = -1.0;
    for (const auto &[startNode, unused] : next) {
        (void)unused;
        if (used[startNode]) continue;
        std::vector<int> loop;
        int v = startNode;
        while (!used[v]) {
            used[v] = true;
            loop.push_back(v);
            auto it = next.find(v);
            if (it == next.end()) break;
            v = it->second;
        }
        double a = 0.0;
        for (size_t i = 0; i < loop.size(); ++i) a += 0.5 * cross2(m_nodes[loop[i]], m_nodes[loop[(i + 1) % loop.size()]]);
        if (a > bestArea) {
            bestArea = a;
            m_boundary = loop;
        }
    }
}

bool CrossSection::contains(double S1, double S2, double tol) const {
    const Vec2 p(S1, S2);
    const size_t n = m_boundary.size();
    bool inside = false;
    double dist = std::numeric_limits<double>::infinity();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 &a = m_nodes[m_boundary[i]], &b = m_nodes[m_boundary[j]];
        if ((a.y() > p.y()) != (b.y() > p.y()) && p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x())
            inside = !inside;
        const Vec2 e = b - a;
        const double t = std::clamp((p - a).dot(e) / e.squaredNorm(), 0.0, 1.0);
        dist = std::min(dist, (a + t * e - p).norm());
    }
    return inside || dist <= tol;
}

// ---------------------------------------------------------------- torsion

TorsionSolution solveTorsion(const CrossSection &section) {
    const auto &nodes = section.nodes();
    const auto &tris = section.triangles();
    const int n = static_cast<int>(nodes.size());

    // Connectivity through shared triangles (union-find).
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<bool> touched(n, false);
    for (const Triangle &T : tris) {
        for (int v : T) touched[v] = true;
        parent[find(T[1])] = find(T[0]);
        parent[find(T[2])] = find(T[0]);
    }
    for (int i = 0; i < n; ++i) {
        require(touched[i], "torsion: node not used by any triangle (singular system)");
        require(find(i) == find(0), "torsion: disconnected mesh (singular system)");
    }

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(9 * tris.size() + 2 * n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(n);
    std::vector<Vec2> grads[3];
    for (size_t t = 0; t < tris.size(); ++t) {
        const Triangle &T = tris[t];
        const Vec2 &a = nodes[T[0]], &b = nodes[T[1]], &c = nodes[T[2]];
        const double area = section.triangleArea(static_cast<int>(t));
        // Gradients of the barycentric basis functions.
        const Vec2 g[3] = {Vec2(b.y() - c.y(), c.x() - b.x()) / (2 * area), Vec2(c.y() - a.y(), a.x() - c.x()) / (2 * area),
                           Vec2(a.y() - b.y(), b.x() - a.x()) / (2 * area)};
        const Vec2 centroid = (a + b + c) / 3.0;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) trip.emplace_back(T[i], T[j], area * g[i].dot(g[j]));
            rhs[T[i]] += area * (centroid.y() * g[i].x() - centroid.x() * g[i].y());
            mass[T[i]] += area / 3.0;
        }
    }
    for (int i = 0; i < n; ++i) {
        trip.emplace_back(i, n, mass[i]);
        trip.emplace_back(n, i, mass[i]);
    }
    Eigen::SparseMatrix<double> A(n + 1, n + 1);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    require(lu.info() == Eigen::Success, "torsion: singular system");
    Eigen::VectorXd x = lu.solve(rhs);
    x += lu.solve(rhs - A * x); // one step of iterative refinement
    require(x.allFinite(), "torsion: singular system");

    TorsionSolution sol;
    sol.chi = x.head(n);
    sol.multiplier = x[n];
    sol.residual = (A * x - rhs).cwiseAbs().maxCoeff();
    sol.gradChi.resize(tris.size());
    for (size_t t = 0; t < tris.size(); ++t) {
        const Triangle &T = tris[t];
        const Vec2 &a = nodes[T[0]], &b = nodes[T[1]], &c = nodes[T[2]];
        const double area = section.triangleArea(static_cast<int>(t));
        const Vec2 g0(b.y() - c.y(), c.x() - b.x()), g1(c.y() - a.y(), a.x() - c.x()), g2(a.y() - b.y(), b.x() - a.x());
        sol.gradChi[t] = (sol.chi[T[0]] * g0 + sol.chi[T[1]] * g1 + sol.chi[T[2]] * g2) / (2 * area);
    }
    return sol;
}

SectionConstants sectionConstants(const CrossSection &section, const TorsionSolution &torsion) {
    require(torsion.chi.size() == static_cast<Eigen::Index>(section.nodes().size()),
            "section constants: torsion solution does not match the mesh");
    SectionConstants k;
    k.area = section.area();
    k.I1 = section.moment(2, 0);
    k.I2 = section.moment(0, 2);
    k.productMoment = section.moment(1, 1);
    const auto &rule = triangleRule(2); // exact for the quadratic integrand
    const auto &nodes = section.nodes();
    for (size_t t = 0; t < section.triangles().size(); ++t) {
        const Triangle &T = section.triangles()[t];
        const double area = section.triangleArea(static_cast<int>(t));
        const Vec2 &g = torsion.gradChi[t];
        double sum = 0.0;
        for (const auto &r : rule) {
            const Vec2 x = r.l1 * nodes[T[0]] + r.l2 * nodes[T[1]] + r.l3 * nodes[T[2]];
            const double a = g.x() - x.y(), b = g.y() + x.x();
            sum += r.weight * (a * a + b * b);
        }
        k.K += area * sum;
        k.gradChiSquared += area * g.squaredNorm();
        k.chiMean += area * (torsion.chi[T[0]] + torsion.chi[T[1]] + torsion.chi[T[2]]) / 3.0;
    }
    k.torsionResidual = torsion.residual;
    return k;
}

std::vector<SectionPoint> sectionQuadrature(const CrossSection &section, const TorsionSolution &torsion, int order) {
    const auto &rule = triangleRule(order);
    const auto &nodes = section.nodes();
    std::vector<SectionPoint> pts;
    pts.reserve(rule.size() * section.triangles().size());
    for (size_t t = 0; t < section.triangles().size(); ++t) {
        const Triangle &T = section.triangles()[t];
        const double area = section.triangleArea(static_cast<int>(t));
        for (const auto &r : rule) {
            SectionPoint p;
            const Vec2 x = r.l1 * nodes[T[0]] + r.l2 * nodes[T[1]] + r.l3 * nodes[T[2]];
            p.S1 = x.x();
            p.S2 = x.y();
            p.weight = r.weight * area;
            p.chi = r.l1 * torsion.chi[T[0]] + r.l2 * torsion.chi[T[1]] + r.l3 * torsion.chi[T[2]];
            p.chi1 = torsion.gradChi[t].x();
            p.chi2 = torsion.gradChi[t].y();
            pts.push_back(p);
        }
    }
    return pts;
}

SectionData analyzeSection(const SectionSpec &spec) { return analyzeSection(CrossSection::build(spec)); }

SectionData analyzeSection(std::shared_ptr<const CrossSection> section) {
    SectionData d;
    d.section = std::move(section);
    d.torsion = solveTorsion(*d.section);
    d.constants = sectionConstants(*d.section, d.torsion);
    return d;
}

} // namespace rodlimit
