// Middle lines, frame fields and the chart of the physical rod.
//
// A middle line is an arc-length parametrized C2 curve M(s3), s3 in [0,L].
// A frame field adds unit normals n1, n2 = t ^ n1 and the chart maps
//   Phi(s1,s2,s3) = M(s3) + s1 n1(s3) + s2 n2(s3)
// for (s1/delta, s2/delta) in the reference section omega.
#pragma once

#include "rodlimit/so3.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rodlimit {

class CrossSection;

enum class CurveKind { Straight, CircularArc, Helix, SampledSpline };

std::string curveKindName(CurveKind kind);

struct CurveSpec {
    CurveKind kind = CurveKind::Straight;
    // Straight: M(s) = origin + s * direction (direction normalized).
    Vec3 origin = Vec3::Zero();
    Vec3 direction = Vec3::UnitZ();
    // Circular arc in the plane z = center.z():
    //   M(s) = center + radius (cos(s/radius), sin(s/radius), 0).
    // Helix about the e3 axis through center, pitch 2 pi b:
    //   M(s) = center + (radius cos(s/c), radius sin(s/c), b s/c), c = sqrt(radius^2 + b^2).
    Vec3 center = Vec3::Zero();
    double radius = 1.0;
    double pitchParameter = 0.0; // b
    // Length of the straight, arc and helix kinds.
    double length = 1.0;
    // Sampled spline: at least 4 points, interpolated by a natural cubic
    // spline in the chord-length parameter and re-parametrized by arc length.
    std::vector<Vec3> points;
};

class MiddleLine {
public:
    // Validates the spec and performs the arc-length reparametrization.
    // Throws ValidationError for zero-length, self-intersecting or otherwise
    // invalid input.
    static std::shared_ptr<const MiddleLine> build(const CurveSpec &spec);

    CurveKind kind() const { return m_spec.kind; }
    const CurveSpec &spec() const { return m_spec; }
    double length() const { return m_length; }

    Vec3 position(double s) const;
    Vec3 tangent(double s) const;
    // dt/ds = d2M/ds2; its norm is the curvature.
    Vec3 tangentDerivative(double s) const;
    // Upper bound of |dt/ds| over [0,L] (exact for analytic kinds, sampled
    // densely for splines).
    double maxCurvature() const { return m_maxCurvature; }

private:
    MiddleLine() = default;

    struct SplineData {
        std::vector<double> knots;         // chord-length parameters u_i
        std::vector<Vec3> a, b, c, d;      // P(u) = a + b t + c t^2 + d t^3, t = u - u_i
        std::vector<double> cumulative;    // arc length at each knot
        double speed(int seg, double tau) const;
        Vec3 value(int seg, double tau) const;
        Vec3 first(int seg, double tau) const;
        Vec3 second(int seg, double tau) const;
        double lengthOf(int seg, double tau0, double tau1) const;
    };
    // Segment index and local parameter of arc length s.
    std::pair<int, double> locate(double s) const;

    CurveSpec m_spec;
    double m_length = 0.0;
    double m_maxCurvature = 0.0;
    std::optional<SplineData> m_spline;
};

enum class FrameMethod { Analytic, RotationMinimizing };

std::string frameMethodName(FrameMethod method);

// Every quantity the chart needs at one arc-length position.
struct FramePoint {
    double s = 0.0;
    Vec3 M, t, dt;   // position, tangent, dt/ds
    Vec3 n1, n2;     // unit normals, n2 = t ^ n1
    Vec3 dn1, dn2;   // d n_alpha / ds
};

struct FrameSpec {
    FrameMethod method = FrameMethod::Analytic;
    // Initial n1 for the straight analytic frame and for rotation-minimizing
    // frames; projected onto the plane normal to t(0). When absent, the
    // coordinate axis least aligned with t(0) is projected.
    std::optional<Vec3> initialNormal;
    // Node count of the double-reflection recurrence.
    int rotationMinimizingIntervals = 512;
};

class FrameField {
public:
    // Analytic frames: constant for straight lines, n1 toward the center of
    // curvature for arcs and helices. Analytic frames on sampled splines
    // are rejected.
    static std::shared_ptr<const FrameField> build(std::shared_ptr<const MiddleLine> line,
                                                   const FrameSpec &spec);

    const MiddleLine &line() const { return *m_line; }
    std::shared_ptr<const MiddleLine> linePtr() const { return m_line; }
    FrameMethod method() const { return m_spec.method; }
    // Human-readable orientation convention recorded in outputs.
    const std::string &orientation() const { return m_orientation; }

    FramePoint at(double s) const;

private:
    FrameField() = default;
    Vec3 normalAt(double s) const;

    std::shared_ptr<const MiddleLine> m_line;
    FrameSpec m_spec;
    std::string m_orientation;
    Vec3 m_constantNormal = Vec3::UnitX(); // straight analytic frame
    std::vector<double> m_nodes;           // rotation-minimizing node grid
    std::vector<Vec3> m_nodeNormals;
};

// One double-reflection step transporting the normal r0 from (x0,t0) to (x1,t1).
Vec3 doubleReflection(const Vec3 &x0, const Vec3 &t0, const Vec3 &r0, const Vec3 &x1, const Vec3 &t1);

class RodChart {
public:
    // Throws ValidationError when delta is not in (0, maxDelta()] or when the
    // tube around the middle line overlaps itself.
    RodChart(std::shared_ptr<const FrameField> frame, std::shared_ptr<const CrossSection> section,
             double delta);

    const FrameField &frame() const { return *m_frame; }
    std::shared_ptr<const FrameField> framePtr() const { return m_frame; }
    const MiddleLine &line() const { return m_frame->line(); }
    const CrossSection &section() const { return *m_section; }
    std::shared_ptr<const CrossSection> sectionPtr() const { return m_section; }
    double delta() const { return m_delta; }
    double length() const { return line().length(); }

    // 0.9 / (max curvature * max section radius); infinite for straight lines.
    static double maxDelta(const MiddleLine &line, const CrossSection &section);
    double maxDelta() const { return maxDelta(line(), section()); }

    // Physical point Phi(s1,s2,s3); throws when (s1/delta, s2/delta) is not
    // in omega or s3 is outside [0,L].
    Vec3 phi(const Vec3 &s) const;
    // det(grad Phi) = 1 + s1 det(n1|n2|dn1) + s2 det(n1|n2|dn2).
    double jacDet(const Vec3 &s) const;
    // grad Phi with columns d/ds1, d/ds2, d/ds3.
    Mat3 gradPhi(const Vec3 &s) const;

    // Unchecked evaluation from a precomputed frame point.
    static Vec3 phi(const FramePoint &f, double s1, double s2) { return f.M + s1 * f.n1 + s2 * f.n2; }
    static double jacDet(const FramePoint &f, double s1, double s2) {
        return 1.0 + s1 * f.dn1.dot(f.t) + s2 * f.dn2.dot(f.t);
    }
    static Mat3 gradPhi(const FramePoint &f, double s1, double s2);

private:
    void checkDomain(const Vec3 &s) const;

    std::shared_ptr<const FrameField> m_frame;
    std::shared_ptr<const CrossSection> m_section;
    double m_delta;
};

} // namespace rodlimit
