#include "tb/ratefit.hpp"

#include <cmath>
#include <stdexcept>

namespace tb {

ErrorCurve ErrorCurve::make(std::vector<double> x, std::vector<double> err) {
    if (x.size() != err.size()) throw std::invalid_argument("x/err length mismatch");
    ErrorCurve c;
    c.x = std::move(x);
    c.err = std::move(err);
    for (auto& e : c.err) {
        if (!(e > 0)) {
            e = kFloor;
            c.floored = true;
        }
    }
    return c;
}

RateFit fit_rate(const ErrorCurve& curve, WindowPolicy policy) {
    std::size_t begin = 0, end = curve.x.size();
    if (policy == WindowPolicy::AutoTail) {
        // drop the floored tail (everything from the first point within 100x
        // of the floor) and the first 20% of what remains
        for (std::size_t i = 0; i < curve.err.size(); ++i) {
            if (curve.err[i] < 100.0 * ErrorCurve::kFloor) {
                end = i;
                break;
            }
        }
        begin = (end / 5);
    }
    if (end < begin + 4) throw std::invalid_argument("fewer than 4 usable points for the rate fit");

    const auto n = static_cast<double>(end - begin);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = begin; i < end; ++i) {
        const double xi = curve.x[i], yi = std::log(curve.err[i]);
        sx += xi;
        sy += yi;
        sxx += xi * xi;
        sxy += xi * yi;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("degenerate abscissae in rate fit");
    RateFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    fit.window_begin = begin;
    fit.window_end = end;

    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / n;
    for (std::size_t i = begin; i < end; ++i) {
        const double yi = std::log(curve.err[i]);
        const double fi = fit.intercept + fit.slope * curve.x[i];
        ss_res += (yi - fi) * (yi - fi);
        ss_tot += (yi - ybar) * (yi - ybar);
    }
    fit.r2 = (ss_tot > 0) ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

RateVerdict compare_rate(const RateFit& fit, double predicted_gamma, double tolerance_rel) {
    if (!(predicted_gamma > 0)) throw std::invalid_argument("predicted rate must be positive");
    RateVerdict v;
    v.measured = -fit.slope;
    v.predicted = predicted_gamma;
    v.relative_error = std::abs(v.measured - predicted_gamma) / predicted_gamma;
    v.pass = v.relative_error <= tolerance_rel;
    return v;
}

}  // namespace tb
