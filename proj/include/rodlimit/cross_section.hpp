// Reference cross-section omega: triangulation, centering, principal axes,
// second moments, the torsion function chi and the torsion constant K.
//
// The torsion function is the zero-mean solution of
//   int grad chi . grad psi = - int (-S2 dpsi/dS1 + S1 dpsi/dS2)   for all psi,
// and K = int (dchi/dS1 - S2)^2 + (dchi/dS2 + S1)^2.
#pragma once

#include <Eigen/Dense>

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace rodlimit {

using Vec2 = Eigen::Vector2d;

enum class SectionKind { Disc, Ellipse, Rectangle, Polygon };

std::string sectionKindName(SectionKind kind);

struct SectionSpec {
    SectionKind kind = SectionKind::Disc;
    double radius = 1.0;                 // disc
    double semiAxisA = 2.0;              // ellipse, along S1 before principal-axis rotation
    double semiAxisB = 1.0;              // ellipse, along S2
    double width = 1.0;                  // rectangle, along S1
    double height = 1.0;                 // rectangle, along S2
    Vec2 offset = Vec2::Zero();          // disc/ellipse/rectangle center before recentering
    std::vector<Vec2> vertices;          // polygon, simple and counter-clockwise
    int refinementLevel = 5;
};

using Triangle = std::array<int, 3>;

class CrossSection {
public:
    // Meshes the shape, translates it to its centroid and rotates it to its
    // principal axes. Throws ValidationError for degenerate or invalid input.
    static std::shared_ptr<const CrossSection> build(const SectionSpec &spec);
    // Same normalization applied to an explicit triangulation.
    static std::shared_ptr<const CrossSection> fromMesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles,
                                                        SectionKind kind = SectionKind::Polygon);

    SectionKind kind() const { return m_kind; }
    const std::vector<Vec2> &nodes() const { return m_nodes; }
    const std::vector<Triangle> &triangles() const { return m_triangles; }
    // Boundary loop (counter-clockwise node indices).
    const std::vector<int> &boundary() const { return m_boundary; }

    double area() const { return m_area; }
    // Centroid and principal-axis angle of the input geometry; the stored
    // nodes are R(-angle) (x - centroid).
    const Vec2 &inputCentroid() const { return m_inputCentroid; }
    double principalAngle() const { return m_principalAngle; }
    // Largest distance from the origin to a node.
    double maxRadius() const { return m_maxRadius; }
    double diameter() const { return m_diameter; }
    // Largest triangle edge length.
    double meshSize() const { return m_meshSize; }

    // int_omega S1^p S2^q, exact for the triangulated region.
    double moment(int p, int q) const;
    double triangleArea(int t) const;

    // Point location with absolute tolerance tol (relative to the boundary).
    bool contains(double S1, double S2, double tol = 1e-9) const;

private:
    CrossSection() = default;
    void normalize();
    void extractBoundary();

    SectionKind m_kind = SectionKind::Polygon;
    std::vector<Vec2> m_nodes;
    std::vector<Triangle> m_triangles;
    std::vector<int> m_boundary;
    double m_area = 0.0;
    Vec2 m_inputCentroid = Vec2::Zero();
    double m_principalAngle = 0.0;
    double m_maxRadius = 0.0;
    double m_diameter = 0.0;
    double m_meshSize = 0.0;
};

struct TorsionSolution {
    Eigen::VectorXd chi;         // nodal values
    std::vector<Vec2> gradChi;   // per-triangle constant gradient
    double multiplier = 0.0;     // Lagrange multiplier of the zero-mean constraint
    double residual = 0.0;       // max-norm residual of the bordered system
};

// P1 finite-element solution of the torsion problem with int chi = 0 imposed
// through a scalar Lagrange multiplier. Throws ValidationError when the mesh
// is disconnected (singular system).
TorsionSolution solveTorsion(const CrossSection &section);

struct SectionConstants {
    double area = 0.0;
    double I1 = 0.0;              // int S1^2
    double I2 = 0.0;              // int S2^2
    double productMoment = 0.0;   // int S1 S2 (zero up to roundoff)
    double K = 0.0;               // torsion constant
    double gradChiSquared = 0.0;  // int |grad chi|^2
    double chiMean = 0.0;         // int chi
    double torsionResidual = 0.0;
};

SectionConstants sectionConstants(const CrossSection &section, const TorsionSolution &torsion);

// Section quadrature point carrying the torsion data needed by correctors.
struct SectionPoint {
    double S1 = 0.0, S2 = 0.0;
    double weight = 0.0;           // area weight, summing to |omega|
    double chi = 0.0, chi1 = 0.0, chi2 = 0.0;
};

// Tensor of the collapsed rule of the given order on every triangle.
std::vector<SectionPoint> sectionQuadrature(const CrossSection &section, const TorsionSolution &torsion,
                                            int order = 2);

// Everything downstream modules need about omega, solved once.
struct SectionData {
    std::shared_ptr<const CrossSection> section;
    TorsionSolution torsion;
    SectionConstants constants;
};

SectionData analyzeSection(const SectionSpec &spec);
SectionData analyzeSection(std::shared_ptr<const CrossSection> section);

} // namespace rodlimit
