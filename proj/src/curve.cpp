#include "bondkit/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "bondkit/detail/text.hpp"
#include "bondkit/errors.hpp"

namespace bondkit {

namespace {

constexpr double kLambdaGridLo = 0.05;
constexpr double kLambdaGridHi = 30.0;
constexpr std::size_t kLambdaGridSize = 200;
constexpr double kFallbackLambda = 2.0;  // used when only 2 distinct maturities exist

// (1 - e^{-x}) / x with a series for small x.
double slope_loading(double x) {
    if (x < 1e-6) return 1.0 - x / 2.0 + x * x / 6.0;
    return (1.0 - std::exp(-x)) / x;
}

double curvature_loading(double x) {
    if (x < 1e-6) return x / 2.0 - x * x / 3.0;
    return slope_loading(x) - std::exp(-x);
}

void validate_params(const NSParams& p) {
    if (!(p.lambda > 0.0) || !std::isfinite(p.lambda))
        throw Error(ErrorCode::InvalidConfig, "lambda must be a positive finite real");
    if (!std::isfinite(p.beta0) || !std::isfinite(p.beta1) || !std::isfinite(p.beta2))
        throw Error(ErrorCode::InvalidConfig, "NS parameters must be finite");
}

struct LsSolution {
    NSParams params;
    double sse = 0.0;
    bool well_posed = false;
};

// Exact weighted least squares for the betas at a fixed lambda. A lambda far
// from the maturity range makes the loading columns nearly collinear; the
// exact solve then returns huge cancelling betas that interpolate the fit
// points but explode between them. Such lambdas are flagged not well posed
// and skipped by the grid search.
LsSolution solve_betas(const std::vector<CurvePoint>& pts, const std::vector<double>& w,
                       double lambda, bool fit_curvature) {
    const long n = static_cast<long>(pts.size());
    const long cols = fit_curvature ? 3 : 2;
    Eigen::MatrixXd x(n, cols);
    Eigen::VectorXd y(n);
    for (long i = 0; i < n; ++i) {
        const double xi = pts[static_cast<std::size_t>(i)].maturity_years / lambda;
        const double sw = std::sqrt(w[static_cast<std::size_t>(i)]);
        x(i, 0) = sw;
        x(i, 1) = sw * slope_loading(xi);
        if (fit_curvature) x(i, 2) = sw * curvature_loading(xi);
        y(i) = sw * pts[static_cast<std::size_t>(i)].spread_bps;
    }
    const auto qr = x.colPivHouseholderQr();
    const Eigen::VectorXd beta = qr.solve(y);
    LsSolution s;
    s.params.beta0 = beta(0);
    s.params.beta1 = beta(1);
    s.params.beta2 = fit_curvature ? beta(2) : 0.0;
    s.params.lambda = lambda;
    s.sse = (x * beta - y).squaredNorm();

    const Eigen::VectorXd r_diag = qr.matrixQR().diagonal().cwiseAbs();
    const double r_max = r_diag.maxCoeff();
    const double r_min = r_diag.head(cols).minCoeff();
    constexpr double kMaxConditionRatio = 1e8;
    // a legitimate curve never needs coefficients orders of magnitude beyond
    // the observed spread scale; cancelling giants are the collinear mode
    const double y_scale = y.cwiseAbs().maxCoeff() + 1.0;
    const double beta_scale = std::abs(s.params.beta1) + std::abs(s.params.beta2);
    s.well_posed = r_min > 0.0 && r_max / r_min < kMaxConditionRatio &&
                   beta_scale <= 1e3 * y_scale && std::isfinite(s.sse);
    return s;
}

}  // namespace

double ns_spread(const NSParams& params, double tau_years) {
    validate_params(params);
    if (!(tau_years > 0.0))
        throw Error(ErrorCode::NonPositiveMaturity,
                    "maturity must be positive, got " + detail::format_double(tau_years));
    const double x = tau_years / params.lambda;
    return params.beta0 + params.beta1 * slope_loading(x) + params.beta2 * curvature_loading(x);
}

CurveFit fit_ns(const std::vector<CurvePoint>& points, const std::vector<double>& weights) {
    if (points.size() < 2)
        throw Error(ErrorCode::TooFewPoints,
                    "need at least 2 points, got " + std::to_string(points.size()));
    std::vector<double> w = weights;
    if (w.empty()) w.assign(points.size(), 1.0);
    if (w.size() != points.size())
        throw Error(ErrorCode::LengthMismatch, "weights length differs from points length");
    for (double wi : w)
        if (!(wi >= 0.0) || !std::isfinite(wi))
            throw Error(ErrorCode::InvalidConfig, "point weights must be nonnegative finite");

    std::set<double> distinct;
    for (const CurvePoint& p : points) {
        if (!(p.maturity_years > 0.0))
            throw Error(ErrorCode::NonPositiveMaturity, "fit point with non-positive maturity");
        distinct.insert(p.maturity_years);
    }
    if (distinct.size() < 2)
        throw Error(ErrorCode::DegenerateDesign, "all maturities identical; loadings are collinear");

    // identifiability fallbacks for sparse issuers
    LsSolution best;
    if (distinct.size() == 2) {
        best = solve_betas(points, w, kFallbackLambda, false);
        if (!best.well_posed)
            throw Error(ErrorCode::DegenerateDesign, "two-point design is collinear");
    } else {
        const double log_lo = std::log(kLambdaGridLo);
        const double log_hi = std::log(kLambdaGridHi);
        std::vector<double> grid(kLambdaGridSize);
        for (std::size_t j = 0; j < kLambdaGridSize; ++j)
            grid[j] = std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(j) /
                                            static_cast<double>(kLambdaGridSize - 1));

        const double inf = std::numeric_limits<double>::infinity();
        auto sweep = [&](bool fit_curvature, std::vector<double>& sse) {
            sse.assign(kLambdaGridSize, inf);
            bool any = false;
            for (std::size_t j = 0; j < kLambdaGridSize; ++j) {
                const LsSolution s = solve_betas(points, w, grid[j], fit_curvature);
                if (!s.well_posed) continue;
                sse[j] = s.sse;
                any = true;
            }
            return any;
        };

        bool fit_curvature = distinct.size() >= 4;
        std::vector<double> sse;
        if (!sweep(fit_curvature, sse)) {
            // every three-factor design was ill conditioned; retry slope-only
            fit_curvature = false;
            if (!sweep(fit_curvature, sse))
                throw Error(ErrorCode::DegenerateDesign,
                            "no lambda on the grid yields a well-posed design");
        }

        auto refine_sse = [&](const LsSolution& s) { return s.well_posed ? s.sse : inf; };
        auto golden = [&](std::size_t j) {
            const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
            double a = grid[j == 0 ? 0 : j - 1];
            double b = grid[std::min(j + 1, kLambdaGridSize - 1)];
            double c = b - phi * (b - a);
            double d = a + phi * (b - a);
            LsSolution sc = solve_betas(points, w, c, fit_curvature);
            LsSolution sd = solve_betas(points, w, d, fit_curvature);
            for (int iter = 0; iter < 80 && (b - a) > 1e-12 * b; ++iter) {
                if (refine_sse(sc) < refine_sse(sd)) {
                    b = d;
                    d = c;
                    sd = sc;
                    c = b - phi * (b - a);
                    sc = solve_betas(points, w, c, fit_curvature);
                } else {
                    a = c;
                    c = d;
                    sc = sd;
                    d = a + phi * (b - a);
                    sd = solve_betas(points, w, d, fit_curvature);
                }
            }
            return refine_sse(sc) < refine_sse(sd) ? sc : sd;
        };

        // sse(lambda) can be multimodal (small-curvature curves have shallow
        // sign-flipped basins), so every local minimum of the grid profile is
        // a refinement candidate; the handful with the smallest sse get the
        // golden-section treatment and the overall best wins
        std::vector<std::size_t> candidates;
        for (std::size_t j = 0; j < kLambdaGridSize; ++j) {
            if (sse[j] == inf) continue;
            const double left = j > 0 ? sse[j - 1] : inf;
            const double right = j + 1 < kLambdaGridSize ? sse[j + 1] : inf;
            if (sse[j] <= left && sse[j] <= right) candidates.push_back(j);
        }
        std::sort(candidates.begin(), candidates.end(),
                  [&](std::size_t a, std::size_t b) { return sse[a] < sse[b]; });
        if (candidates.size() > 5) candidates.resize(5);

        bool have_best = false;
        for (std::size_t j : candidates) {
            const LsSolution grid_best = solve_betas(points, w, grid[j], fit_curvature);
            if (grid_best.well_posed && (!have_best || grid_best.sse < best.sse)) {
                best = grid_best;
                have_best = true;
            }
            const LsSolution refined = golden(j);
            if (refined.well_posed && (!have_best || refined.sse < best.sse)) {
                best = refined;
                have_best = true;
            }
        }
        if (!have_best)
            throw Error(ErrorCode::DegenerateDesign,
                        "no lambda on the grid yields a well-posed design");
    }

    CurveFit fit;
    fit.params = best.params;
    fit.n_points = points.size();
    double sum_sq = 0.0;
    fit.residuals.reserve(points.size());
    for (const CurvePoint& p : points) {
        const double r = ns_spread(best.params, p.maturity_years) - p.spread_bps;
        fit.residuals.emplace_back(p.maturity_years, r);
        sum_sq += r * r;
    }
    fit.in_sample_rmse_bps = std::sqrt(sum_sq / static_cast<double>(points.size()));
    return fit;
}

double rmse(const std::vector<double>& predicted, const std::vector<double>& actual) {
    if (predicted.size() != actual.size())
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(predicted.size()) + " predictions vs " +
                        std::to_string(actual.size()) + " actuals");
    if (predicted.empty()) throw Error(ErrorCode::EmptyInput, "rmse of empty series");
    double acc = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double d = predicted[i] - actual[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(predicted.size()));
}

double mape(const std::vector<double>& predicted, const std::vector<double>& actual,
            std::size_t* n_excluded) {
    if (predicted.size() != actual.size())
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(predicted.size()) + " predictions vs " +
                        std::to_string(actual.size()) + " actuals");
    if (predicted.empty()) throw Error(ErrorCode::EmptyInput, "mape of empty series");
    constexpr double kEps = 1e-9;  // bps; smaller actuals are excluded
    double acc = 0.0;
    std::size_t included = 0;
    std::size_t excluded = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (std::abs(actual[i]) < kEps) {
            ++excluded;
            continue;
        }
        acc += std::abs((predicted[i] - actual[i]) / actual[i]);
        ++included;
    }
    if (n_excluded) *n_excluded = excluded;
    if (included == 0) throw Error(ErrorCode::AllExcluded, "every actual is below 1e-9 bps");
    return 100.0 * acc / static_cast<double>(included);
}

std::vector<CurvePoint> sample_curve(const NSParams& params, double tau_min, double tau_max,
                                     std::size_t n) {
    if (!(tau_min > 0.0) || tau_max < tau_min || n < 2)
        throw Error(ErrorCode::InvalidConfig, "bad tenor grid");
    std::vector<CurvePoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double tau =
            tau_min + (tau_max - tau_min) * static_cast<double>(i) / static_cast<double>(n - 1);
        out.push_back({tau, ns_spread(params, tau)});
    }
    return out;
}

std::string curve_to_csv(const std::vector<CurvePoint>& points) {
    std::ostringstream out;
    out << "tau_years,spread_bps\n";
    for (const CurvePoint& p : points)
        out << detail::format_double(p.maturity_years) << ','
            << detail::format_double(p.spread_bps) << '\n';
    return out.str();
}

}  // namespace bondkit
