#include "bondkit/stats.hpp"

#include <algorithm>
#include <cmath>

#include "bondkit/errors.hpp"

namespace bondkit {

double mean(const std::vector<double>& values) {
    if (values.empty()) throw Error(ErrorCode::EmptyInput, "mean of empty series");
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc / static_cast<double>(values.size());
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw Error(ErrorCode::EmptyInput, "quantile of empty series");
    if (p < 0.0 || p > 1.0)
        throw Error(ErrorCode::InvalidArgument, "quantile p must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

BoxStats box_stats(const std::vector<double>& values) {
    BoxStats s;
    s.n = values.size();
    if (values.empty()) throw Error(ErrorCode::EmptyInput, "box stats of empty series");
    s.q1 = quantile(values, 0.25);
    s.median = quantile(values, 0.5);
    s.q3 = quantile(values, 0.75);
    const double iqr = s.q3 - s.q1;
    const double fence_lo = s.q1 - 1.5 * iqr;
    const double fence_hi = s.q3 + 1.5 * iqr;
    // whiskers reach the most extreme data inside the fences
    s.whisker_lo = s.q3;
    s.whisker_hi = s.q1;
    bool any_inside = false;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (v < fence_lo || v > fence_hi) {
            s.outliers.push_back(i);
        } else {
            s.whisker_lo = any_inside ? std::min(s.whisker_lo, v) : v;
            s.whisker_hi = any_inside ? std::max(s.whisker_hi, v) : v;
            any_inside = true;
        }
    }
    if (!any_inside) {  // can't happen with 1.5*IQR fences, but stay defined
        s.whisker_lo = s.q1;
        s.whisker_hi = s.q3;
    }
    return s;
}

}  // namespace bondkit
