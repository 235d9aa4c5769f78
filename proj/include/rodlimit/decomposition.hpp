// Decomposition of a sampled rod deformation into an elementary deformation
// and a warping:
//   v(s) = V(s3) + R(s3)(s1 n1 + s2 n2) + vbar(s),
// with V the section mean, R interpolated geodesically between rotations
// fitted on axial slices, and vbar the remainder (zero section mean).
#pragma once

#include "rodlimit/deformation.hpp"
#include "rodlimit/so3.hpp"

#include <array>
#include <vector>

namespace rodlimit {

// Area-weighted section mean of the P1 interpolant at every axial node.
std::vector<Vec3> sectionMeans(const DeformationField3D &field);

// Default slice count round(3L / (4 delta)), at least 1.
int defaultSliceCount(double length, double delta);

// Rotation samples at alpha_k = k L / N, k = 0..N: the special-orthogonal
// polar factor of the volume-averaged grad_x v over the axial nodes within
// L/(2N) of alpha_k. Throws ValidationError when a slice holds fewer than two
// axial nodes or its averaged gradient has rank below 2.
std::vector<Mat3> fitSliceRotations(const DeformationField3D &field, int slices, int threads = 1);

struct DecompositionOptions {
    int slices = 0;        // 0 selects defaultSliceCount
    bool clampLeft = false; // replace the first sample by the identity
    int threads = 1;
};

// The five quantities bounded by C dist(grad v, SO(3)) and their ratios.
struct EstimateReport {
    double distance = 0.0;          // D = ||dist(grad v, SO(3))||_L2(P_delta)
    double warping = 0.0;           // ||vbar||_L2(P_delta)
    double warpingGradient = 0.0;   // ||grad vbar||
    double rotationDerivative = 0.0; // ||dR/ds3||_L2(0,L)
    double stretch = 0.0;           // ||dV/ds3 - R t||_L2(0,L)
    double gradientGap = 0.0;       // ||grad v - R||
    // ||vbar||/(delta D), ||grad vbar||/D, ||dR/ds3|| delta^2/D,
    // ||dV/ds3 - R t|| delta/D, ||grad v - R||/D; all 0 when D = 0.
    std::array<double, 5> ratios{};
};

struct ElementaryDecomposition {
    std::vector<double> axial;
    std::vector<Vec3> centerline; // V at the axial nodes
    std::vector<Mat3> samples;    // fitted slice rotations
    RotationField rotation;       // piecewise-geodesic interpolant of the samples
    std::vector<Vec3> warping;    // vbar, same layout as the field
    std::vector<Vec3> bending;    // V_B at the axial nodes
    std::vector<Vec3> stretching; // V_S = V - V_B
    EstimateReport estimates;
    int slices = 0;
};

ElementaryDecomposition decompose(const DeformationField3D &field, const DecompositionOptions &options = {});

// V_B(s) = V(0) + int_0^s R t, integrated exactly between the breakpoints of
// R and the axial nodes; returns (V_B, V_S = V - V_B).
std::pair<std::vector<Vec3>, std::vector<Vec3>> splitBendingStretching(const FrameField &frame,
                                                                      const RotationField &R,
                                                                      const std::vector<double> &axial,
                                                                      const std::vector<Vec3> &centerline);

EstimateReport estimateReport(const ElementaryDecomposition &dec, const DeformationField3D &field, int threads = 1);

// V + R (s1 n1 + s2 n2) + vbar on the field's grid.
DeformationField3D reconstruct(const ElementaryDecomposition &dec, const DeformationField3D &layout);

// Discrete H1(0,L) norm of nodal values (trapezoid for the L2 part, interval
// slopes for the derivative).
double h1Norm(const std::vector<double> &axial, const std::vector<Vec3> &values);

} // namespace rodlimit
