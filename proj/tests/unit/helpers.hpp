#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "spraylab/spray_core.hpp"

inline double max_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_norm(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

inline spraylab::PointTM pt(std::vector<double> x, std::vector<double> y) { return {std::move(x), std::move(y)}; }

inline std::vector<double> packed(const spraylab::PointTM& p) {
    std::vector<double> z = p.x;
    z.insert(z.end(), p.y.begin(), p.y.end());
    return z;
}
