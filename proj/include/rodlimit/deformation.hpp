// Sampled deformations of the rod and their discrete gradients.
//
// A field stores v(Phi(delta S1, delta S2, s3)) at every section mesh node S
// (reference coordinates) and every axial node s3. Gradients are taken per
// cell (triangle x axial node): the P1 gradient across the section and a
// centered difference along the axis (one-sided at the ends). The same
// stencil applied to Phi gives a discrete grad Phi, and
//   grad_x v = (discrete grad_s v) (discrete grad_s Phi)^-1,
// which is exact for every affine map of the physical rod.
#pragma once

#include "rodlimit/cross_section.hpp"
#include "rodlimit/geometry.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace rodlimit {

class DeformationField3D {
public:
    DeformationField3D(std::shared_ptr<const RodChart> chart, std::vector<double> axial, std::vector<Vec3> values);

    // v(S1, S2, s3) given in reference section coordinates.
    using Generator = std::function<Vec3(double S1, double S2, double s3)>;
    static DeformationField3D sample(std::shared_ptr<const RodChart> chart, std::vector<double> axial,
                                     const Generator &v);
    static DeformationField3D identity(std::shared_ptr<const RodChart> chart, std::vector<double> axial);

    const RodChart &chart() const { return *m_chart; }
    std::shared_ptr<const RodChart> chartPtr() const { return m_chart; }
    double delta() const { return m_chart->delta(); }
    const std::vector<double> &axial() const { return m_axial; }
    int sectionNodes() const { return m_sectionNodes; }
    const std::vector<Vec3> &values() const { return m_values; }
    const Vec3 &value(int node, int j) const { return m_values[static_cast<std::size_t>(j) * m_sectionNodes + node]; }
    // Field with the same layout and new values.
    DeformationField3D withValues(std::vector<Vec3> values) const;

private:
    std::shared_ptr<const RodChart> m_chart;
    std::vector<double> m_axial;
    std::vector<Vec3> m_values;
    int m_sectionNodes = 0;
};

// Pi_delta relabeling between physical section coordinates s = delta S and
// the reference section: values are untouched, only coordinates change.
struct PhysicalSamples {
    std::vector<Vec3> points; // (s1, s2, s3)
    std::vector<Vec3> values;
};
PhysicalSamples toPhysical(const DeformationField3D &field);
DeformationField3D toReference(std::shared_ptr<const RodChart> chart, std::vector<double> axial,
                               const PhysicalSamples &samples);
// (Pi_delta phi)(S1, S2, s3) = phi(delta S1, delta S2, s3).
DeformationField3D::Generator rescale(const DeformationField3D::Generator &physical, double delta);

// Gradient data of one cell.
struct CellGradient {
    int triangle = 0, axialIndex = 0;
    double S1 = 0.0, S2 = 0.0, s3 = 0.0; // centroid (reference) and axial position
    Vec3 value = Vec3::Zero();           // centroid value of the P1 interpolant
    Mat3 gradX = Mat3::Identity();       // grad_x v
    Mat3 gradPhi = Mat3::Identity();     // discrete grad_s Phi
    double weight = 0.0;                 // reference measure: triangle area x axial trapezoid weight
    double volume = 0.0;                 // physical measure: delta^2 det(grad Phi) weight
};

// Cells are ordered by axial node, then triangle. `values` defaults to the
// field itself and must share its layout.
std::vector<CellGradient> cellGradients(const DeformationField3D &field, const std::vector<Vec3> *values = nullptr,
                                        int threads = 1);

// Distance from F to SO(3): sqrt(sum (sigma_i - 1)^2) with the smallest
// singular value negated when det F < 0. Equals |||sqrt(F^T F) - I||| for det F > 0.
double distanceToRotations(const Mat3 &F);

} // namespace rodlimit
