#pragma once

#include <optional>
#include <vector>

#include "bondkit/catalog.hpp"
#include "bondkit/rating.hpp"
#include "bondkit/search.hpp"

namespace bondkit {

enum class MaturityWindowMode {
    RelativeToQuery,  // |candidate - query| window: [query - lower, query + upper]
    Absolute,         // candidate maturity within [lower, upper] outright
};

/// Post-filter cascade settings. Absent bounds leave that side unbounded;
/// a disengaged rating tolerance disables the rating stage.
struct FilterConfig {
    bool enforce_currency = true;
    std::optional<double> maturity_lower_years;
    std::optional<double> maturity_upper_years;
    MaturityWindowMode maturity_mode = MaturityWindowMode::RelativeToQuery;
    std::optional<int> rating_tolerance_notches = 3;

    /// Throws InvalidConfig on negative bounds/tolerance or lower > upper.
    void validate() const;

    static FilterConfig disabled() {
        FilterConfig c;
        c.enforce_currency = false;
        c.rating_tolerance_notches.reset();
        return c;
    }
};

// Membership predicates behind the three stages. Each is a pure function of
// (query, candidate), which is what makes the cascade order-independent.
bool passes_currency(const Bond& query, const Bond& candidate, const FilterConfig& config);
bool passes_maturity(const Bond& query, const Bond& candidate, const FilterConfig& config);
bool passes_rating(const Bond& query, const Bond& candidate, const RatingScale& scale,
                   const FilterConfig& config);

/// Retains candidates in the query's currency; order preserved.
std::vector<RankedMatch> currency_filter(const Bond& query,
                                         const std::vector<RankedMatch>& candidates,
                                         const Catalog& catalog, const FilterConfig& config);

/// Retains candidates within the configured maturity window; order preserved.
std::vector<RankedMatch> maturity_filter(const Bond& query,
                                         const std::vector<RankedMatch>& candidates,
                                         const Catalog& catalog, const FilterConfig& config);

/// Retains candidates within the rating tolerance; order preserved. Throws
/// UnknownRating for ratings outside the scale.
std::vector<RankedMatch> rating_filter(const Bond& query,
                                       const std::vector<RankedMatch>& candidates,
                                       const Catalog& catalog, const RatingScale& scale,
                                       const FilterConfig& config);

/// currency -> maturity -> rating, progressively narrowing; equals the
/// intersection of the three stage predicates in any order.
std::vector<RankedMatch> apply_filters(const Bond& query,
                                       const std::vector<RankedMatch>& candidates,
                                       const Catalog& catalog, const RatingScale& scale,
                                       const FilterConfig& config);

}  // namespace bondkit
