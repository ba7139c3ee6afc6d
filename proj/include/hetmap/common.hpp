#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace hetmap {

// Error type for all contract violations surfaced by the library.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_inf(double v) { return v == kInf; }

// Relative comparison used throughout the tests: |a-b| <= tol * max(1, |a|, |b|).
inline bool close(double a, double b, double tol = 1e-9) {
    double scale = 1.0;
    if (a < 0) { if (-a > scale) scale = -a; } else if (a > scale) scale = a;
    if (b < 0) { if (-b > scale) scale = -b; } else if (b > scale) scale = b;
    double d = a - b;
    if (d < 0) d = -d;
    return d <= tol * scale;
}

} // namespace hetmap
