#pragma once

#include <cstddef>
#include <vector>

namespace bondkit {

/// Mean of a nonempty series. Throws EmptyInput.
double mean(const std::vector<double>& values);

/// Quantile by linear interpolation of order statistics (the numpy default).
/// p in [0, 1]. Throws EmptyInput / InvalidArgument.
double quantile(std::vector<double> values, double p);

double median(std::vector<double> values);

/// Five-number boxplot summary with 1.5*IQR whiskers. outliers holds the
/// indices (into the input order) of points beyond the whiskers.
struct BoxStats {
    std::size_t n = 0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double whisker_lo = 0.0;
    double whisker_hi = 0.0;
    std::vector<std::size_t> outliers;
};

BoxStats box_stats(const std::vector<double>& values);

}  // namespace bondkit
