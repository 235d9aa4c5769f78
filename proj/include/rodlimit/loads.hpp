// Material constants, applied force data and the load matrix G(s3).
//
// Forces on the rod of thickness delta are f_delta = delta^kappa f(s3) +
// delta^(kappa-1) g(s1/delta, s2/delta, s3), with int_omega g = 0. The limit
// load work on an admissible pair (V, R) is
//   int F.(V - M) + sum_alpha int G_alpha.(R - I) n_alpha,
// F = |omega| f + sum_alpha G_alpha det(n1|n2|dn_alpha/ds3), G_alpha = int_omega g S_alpha,
// and equals int <G, R - I> with G(s3) = (int_s3^L F) (x) t + sum_alpha G_alpha (x) n_alpha.
#pragma once

#include "rodlimit/cross_section.hpp"
#include "rodlimit/geometry.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace rodlimit {

// St Venant-Kirchhoff material given by its Lame moduli.
struct Material {
    double lambda = 1.0;
    double mu = 1.0;

    static Material fromLame(double lambda, double mu);
    static Material fromYoungPoisson(double E, double nu);
    // E = mu (3 lambda + 2 mu) / (lambda + mu).
    double young() const { return mu * (3.0 * lambda + 2.0 * mu) / (lambda + mu); }
    // nu = lambda / (2 (lambda + mu)).
    double poisson() const { return lambda / (2.0 * (lambda + mu)); }
};

// A field of s3 given either by polynomial coefficients (value = sum c_k s^k)
// or by a table interpolated piecewise linearly.
template <class T> class Profile {
public:
    Profile() = default;
    static Profile polynomial(std::vector<T> coefficients);
    static Profile table(std::vector<double> s, std::vector<T> values);

    T operator()(double s) const;
    bool isZero() const;
    bool isTable() const { return !m_knots.empty(); }
    // Polynomial degree (1 for tables, -1 for the zero profile).
    int degree() const;
    // Throws unless a table covers [0, L].
    void requireCovers(double L, const std::string &what) const;
    const std::vector<T> &coefficients() const { return m_coefficients; }
    const std::vector<double> &knots() const { return m_knots; }
    const std::vector<T> &values() const { return m_values; }

private:
    std::vector<T> m_coefficients;
    std::vector<double> m_knots;
    std::vector<T> m_values;
};

using VectorProfile = Profile<Vec3>;
using ScalarProfile = Profile<double>;

// g(S1,S2,s3) contribution S1^p S2^q c(s3).
struct SectionLoadTerm {
    int p = 0;
    int q = 0;
    VectorProfile coefficient;
};

struct LoadProfile {
    VectorProfile f;                       // line force density
    std::vector<SectionLoadTerm> g;        // section force density
    std::optional<ScalarProfile> ftilde;   // special extensional load
    double kappa = 2.0;                    // force scaling exponent

    Vec3 gValue(double S1, double S2, double s3) const;
    bool isZero() const;
    // Checks kappa >= 2, table coverage and int_omega g = 0 (relative 1e-10).
    void validate(const CrossSection &section, double length) const;
};

// Everything about the loads at one axial position.
struct LoadPoint {
    Vec3 F = Vec3::Zero();  // |omega| f + sum G_alpha det(n1|n2|dn_alpha)
    Vec3 T = Vec3::Zero();  // int_s^L F
    Vec3 G1 = Vec3::Zero(), G2 = Vec3::Zero(); // int_omega g S_alpha
    Mat3 G = Mat3::Zero();  // load matrix
};

// Load matrix on an axial grid. The tail integral int_s^L F is computed with
// 8-point Gauss rules per interval.
class LoadMatrix {
public:
    LoadMatrix(const LoadProfile &loads, std::shared_ptr<const FrameField> frame, const CrossSection &section,
               std::vector<double> grid, double scale = 1.0);

    const std::vector<double> &grid() const { return m_grid; }
    double length() const { return m_grid.back(); }
    double scale() const { return m_scale; }
    double area() const { return m_area; }
    LoadMatrix scaled(double factor) const;

    // F, G1, G2 (no tail) at s.
    LoadPoint local(double s) const;
    LoadPoint local(const FramePoint &p) const;
    // Full evaluation including T and G.
    LoadPoint at(double s) const;
    LoadPoint at(const FramePoint &p) const;
    // Tail integral at grid node k.
    const Vec3 &nodeTail(int k) const { return m_nodeTail[k]; }
    // ||G|| in L2(0,L) (Frobenius norm pointwise).
    double l2Norm() const;
    bool isZero() const { return m_zero; }

private:
    struct Term {
        double m1, m2; // int S1^(p+1) S2^q, int S1^p S2^(q+1)
        VectorProfile c;
    };
    int intervalOf(double s) const;

    std::shared_ptr<const FrameField> m_frame;
    VectorProfile m_f;
    std::vector<Term> m_terms;
    std::vector<double> m_grid;
    std::vector<Vec3> m_nodeTail;
    double m_area = 0.0;
    double m_scale = 1.0;
    bool m_zero = true;
};

// Load work of the admissible pair (V, R), V - M = int_0^s3 (R - I) t, computed
// two ways: directly from f and g by axial and section quadrature,
//   int_0^L |omega| f.(V-M) + int_omega g.((V-M) det grad Phi + (R-I)(S1 n1 + S2 n2)),
// and as int <G, R - I>. Returns (direct, through G).
std::pair<double, double> loadWorkBothWays(const LoadMatrix &G, const LoadProfile &loads, const FrameField &frame,
                                           const CrossSection &section, const RotationField &R);

// Checks the defining identity of G on `pairs` random admissible pairs;
// throws ValidationError when the relative defect exceeds 1e-8.
void verifyLoadIdentity(const LoadMatrix &G, const LoadProfile &loads, const FrameField &frame,
                        const CrossSection &section, int pairs = 5, unsigned seed = 12345u);

// Builds the load matrix on `grid` and verifies its defining identity.
LoadMatrix assembleLoadMatrix(const LoadProfile &loads, std::shared_ptr<const FrameField> frame,
                              const CrossSection &section, std::vector<double> grid);

} // namespace rodlimit
