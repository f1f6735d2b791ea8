#include "bondkit/filters.hpp"

#include <cmath>
#include <limits>

#include "bondkit/errors.hpp"

namespace bondkit {

namespace {

template <typename Pred>
std::vector<RankedMatch> keep_if(const std::vector<RankedMatch>& candidates, Pred pred) {
    std::vector<RankedMatch> out;
    out.reserve(candidates.size());
    for (const RankedMatch& m : candidates)
        if (pred(m)) out.push_back(m);
    return out;
}

}  // namespace

void FilterConfig::validate() const {
    if (maturity_lower_years && *maturity_lower_years < 0.0)
        throw Error(ErrorCode::InvalidConfig, "maturity_lower_years must be nonnegative");
    if (maturity_upper_years && *maturity_upper_years < 0.0)
        throw Error(ErrorCode::InvalidConfig, "maturity_upper_years must be nonnegative");
    if (maturity_lower_years && maturity_upper_years &&
        maturity_mode == MaturityWindowMode::Absolute &&
        *maturity_lower_years > *maturity_upper_years)
        throw Error(ErrorCode::InvalidConfig, "maturity_lower_years > maturity_upper_years");
    if (rating_tolerance_notches && *rating_tolerance_notches < 0)
        throw Error(ErrorCode::InvalidConfig, "rating_tolerance_notches must be nonnegative");
}

bool passes_currency(const Bond& query, const Bond& candidate, const FilterConfig& config) {
    if (!config.enforce_currency) return true;
    return candidate.currency == query.currency;
}

bool passes_maturity(const Bond& query, const Bond& candidate, const FilterConfig& config) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    if (config.maturity_mode == MaturityWindowMode::RelativeToQuery) {
        if (config.maturity_lower_years) lo = query.maturity_years - *config.maturity_lower_years;
        if (config.maturity_upper_years) hi = query.maturity_years + *config.maturity_upper_years;
    } else {
        if (config.maturity_lower_years) lo = *config.maturity_lower_years;
        if (config.maturity_upper_years) hi = *config.maturity_upper_years;
    }
    return candidate.maturity_years >= lo && candidate.maturity_years <= hi;
}

bool passes_rating(const Bond& query, const Bond& candidate, const RatingScale& scale,
                   const FilterConfig& config) {
    if (!config.rating_tolerance_notches) return true;
    return scale.notch_distance(query.rating, candidate.rating) <= *config.rating_tolerance_notches;
}

std::vector<RankedMatch> currency_filter(const Bond& query,
                                         const std::vector<RankedMatch>& candidates,
                                         const Catalog& catalog, const FilterConfig& config) {
    return keep_if(candidates,
                   [&](const RankedMatch& m) { return passes_currency(query, catalog.bond(m.bond_id), config); });
}

std::vector<RankedMatch> maturity_filter(const Bond& query,
                                         const std::vector<RankedMatch>& candidates,
                                         const Catalog& catalog, const FilterConfig& config) {
    config.validate();
    return keep_if(candidates,
                   [&](const RankedMatch& m) { return passes_maturity(query, catalog.bond(m.bond_id), config); });
}

std::vector<RankedMatch> rating_filter(const Bond& query,
                                       const std::vector<RankedMatch>& candidates,
                                       const Catalog& catalog, const RatingScale& scale,
                                       const FilterConfig& config) {
    return keep_if(candidates,
                   [&](const RankedMatch& m) { return passes_rating(query, catalog.bond(m.bond_id), scale, config); });
}

std::vector<RankedMatch> apply_filters(const Bond& query,
                                       const std::vector<RankedMatch>& candidates,
                                       const Catalog& catalog, const RatingScale& scale,
                                       const FilterConfig& config) {
    config.validate();
    return keep_if(candidates, [&](const RankedMatch& m) {
        const Bond& c = catalog.bond(m.bond_id);
        return passes_currency(query, c, config) && passes_maturity(query, c, config) &&
               passes_rating(query, c, scale, config);
    });
}

}  // namespace bondkit
