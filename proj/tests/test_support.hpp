// Helpers shared by the unit tests: deterministic random generators and
// small numeric utilities.
#pragma once

#include "rodlimit/so3.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace rodlimit::testing {

inline std::mt19937_64 &rng() {
    static std::mt19937_64 gen(20240611ULL);
    return gen;
}

inline double uniform(double a, double b) {
    std::uniform_real_distribution<double> d(a, b);
    return d(rng());
}

inline Vec3 randomVec(double scale = 1.0) {
    return Vec3(uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale));
}

inline Vec3 randomUnit() {
    Vec3 v;
    do {
        v = randomVec();
    } while (v.norm() < 1e-3 || v.norm() > 1.0);
    return v.normalized();
}

inline Mat3 randomRotation() {
    return rodrigues(randomUnit(), uniform(0.0, std::numbers::pi));
}

// Least-squares slope of log(y) against log(x).
inline double logLogSlope(const std::vector<double> &x, const std::vector<double> &y) {
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return sxy / sxx;
}

// Saint-Venant series for the torsion constant of a square of side a:
// K = a^4 (1/3 - 64/pi^5 sum_{n odd} tanh(n pi/2)/n^5).
inline double squareTorsionSeries(double a, int terms = 500) {
    double sum = 0.0;
    for (int k = 0; k < terms; ++k) {
        const double n = 2.0 * k + 1.0;
        sum += std::tanh(n * std::numbers::pi / 2.0) / std::pow(n, 5);
    }
    return std::pow(a, 4) * (1.0 / 3.0 - 64.0 / std::pow(std::numbers::pi, 5) * sum);
}

} // namespace rodlimit::testing
