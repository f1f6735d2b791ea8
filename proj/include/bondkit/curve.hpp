#pragma once

#include <string>
#include <utility>
#include <vector>

namespace bondkit {

/// Nelson-Siegel parameters: s(tau) = beta0
///   + beta1 * (1 - e^{-x}) / x
///   + beta2 * [(1 - e^{-x}) / x - e^{-x}],   x = tau / lambda.
struct NSParams {
    double beta0 = 0.0;   // long-run level, bps
    double beta1 = 0.0;   // short-end slope, bps
    double beta2 = 0.0;   // curvature, bps
    double lambda = 2.0;  // decay scale, years (> 0)
};

/// Spread at maturity tau (years). Throws NonPositiveMaturity / InvalidConfig
/// for invalid inputs.
double ns_spread(const NSParams& params, double tau_years);

struct CurvePoint {
    double maturity_years = 0.0;
    double spread_bps = 0.0;
};

struct CurveFit {
    NSParams params;
    std::size_t n_points = 0;
    double in_sample_rmse_bps = 0.0;
    std::vector<std::pair<double, double>> residuals;  // (maturity, residual)
};

/// Least-squares Nelson-Siegel fit: lambda swept over a 200-point log grid on
/// [0.05, 30] with the betas solved exactly per lambda, then the best grid
/// cell refined by golden section. Deterministic. With fewer than 4 distinct
/// maturities beta2 is pinned to 0; with exactly 2, lambda is fixed at 2.0.
/// Optional weights down-weight individual points (default all 1).
/// Throws TooFewPoints / DegenerateDesign / NonPositiveMaturity /
/// LengthMismatch.
CurveFit fit_ns(const std::vector<CurvePoint>& points, const std::vector<double>& weights = {});

/// sqrt(mean squared difference). Throws LengthMismatch / EmptyInput.
double rmse(const std::vector<double>& predicted, const std::vector<double>& actual);

/// 100 * mean |(pred - actual) / actual| over points with |actual| >= 1e-9;
/// excluded points are tallied into *n_excluded when given. Throws
/// LengthMismatch / EmptyInput / AllExcluded.
double mape(const std::vector<double>& predicted, const std::vector<double>& actual,
            std::size_t* n_excluded = nullptr);

/// Curve sampled on a tenor grid (default 120 points on [0.25, 30]).
std::vector<CurvePoint> sample_curve(const NSParams& params, double tau_min = 0.25,
                                     double tau_max = 30.0, std::size_t n = 120);

/// CSV with header tau_years,spread_bps.
std::string curve_to_csv(const std::vector<CurvePoint>& points);

}  // namespace bondkit
