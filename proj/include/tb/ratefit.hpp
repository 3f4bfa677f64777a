#pragma once

#include <cstddef>
#include <vector>

namespace tb {

// Error sequence err(x) > 0; zeros are floored at 1e-16 and flagged.
struct ErrorCurve {
    std::vector<double> x;
    std::vector<double> err;
    bool floored = false;

    static constexpr double kFloor = 1e-16;
    static ErrorCurve make(std::vector<double> x, std::vector<double> err);
};

struct RateFit {
    double slope = 0;      // of log(err) per unit x
    double intercept = 0;
    double r2 = 0;
    std::size_t window_begin = 0;  // [begin, end) of points used
    std::size_t window_end = 0;
};

enum class WindowPolicy { All, AutoTail };

RateFit fit_rate(const ErrorCurve& curve, WindowPolicy policy);

struct RateVerdict {
    bool pass = false;
    double measured = 0;   // -slope
    double predicted = 0;
    double relative_error = 0;
};

RateVerdict compare_rate(const RateFit& fit, double predicted_gamma, double tolerance_rel);

}  // namespace tb
