#include "rodlimit/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace rodlimit {

namespace {

QuadRule1D computeGaussLegendre(int n) {
    QuadRule1D rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton iteration on P_n starting from the Chebyshev-like guess.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            const double pn = (n == 1) ? x : p1;
            const double pnm1 = (n == 1) ? 1.0 : p0;
            dp = n * (x * pn - pnm1) / (x * x - 1.0);
            const double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged root for the weight.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        const double pn = (n == 1) ? x : p1;
        const double pnm1 = (n == 1) ? 1.0 : p0;
        dp = n * (x * pn - pnm1) / (x * x - 1.0);
        // Map [-1,1] -> [0,1]; store in increasing order.
        rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
        rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

std::vector<TriangleRulePoint> computeTriangleRule(int n) {
    const QuadRule1D &g = gaussLegendre(n);
    std::vector<TriangleRulePoint> pts;
    pts.reserve(n * n);
    // Duffy map (u,v) in [0,1]^2 -> (x,y) = (u, (1-u) v), Jacobian (1-u);
    // the reference triangle has area 1/2, so weights are scaled by 2.
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double u = g.nodes[i], v = g.nodes[j];
            const double x = u, y = (1.0 - u) * v;
            pts.push_back({1.0 - x - y, x, y, 2.0 * g.weights[i] * g.weights[j] * (1.0 - u)});
        }
    return pts;
}

} // namespace

const QuadRule1D &gaussLegendre(int n) {
    if (n < 1 || n > 64) throw std::invalid_argument("gaussLegendre: order out of range");
    static std::mutex mutex;
    static std::map<int, QuadRule1D> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, computeGaussLegendre(n)).first;
    return it->second;
}

const std::vector<TriangleRulePoint> &triangleRule(int n) {
    if (n < 1 || n > 32) throw std::invalid_argument("triangleRule: order out of range");
    static std::mutex mutex;
    static std::map<int, std::vector<TriangleRulePoint>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, computeTriangleRule(n)).first;
    return it->second;
}

} // namespace rodlimit
