// Gauss-Legendre rules on [0,1] and collapsed (Duffy) rules on triangles.
#pragma once

#include <vector>

namespace rodlimit {

struct QuadRule1D {
    std::vector<double> nodes;   // in [0,1]
    std::vector<double> weights; // sum to 1
};

// n-point Gauss-Legendre rule mapped to [0,1]; exact for polynomials of
// degree 2n-1. Rules are computed once and cached.
const QuadRule1D &gaussLegendre(int n);

struct TriangleRulePoint {
    double l1, l2, l3; // barycentric coordinates
    double weight;     // relative to the triangle area (weights sum to 1)
};

// Collapsed Gauss rule with n*n points, exact for polynomials of degree
// 2n-2 over a triangle.
const std::vector<TriangleRulePoint> &triangleRule(int n);

} // namespace rodlimit
