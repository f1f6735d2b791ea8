#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bondkit/rating.hpp"

namespace bondkit {

/// The six categorical similarity features, in canonical order. Everything
/// that iterates features (scoring, serialization, weights) uses this order.
enum class FeatureName : int {
    IssuerIndustry = 0,
    MarketIssueType = 1,
    IndustryGroup = 2,
    IndustrySubgroup = 3,
    CountryOfDomicile = 4,
    IssuerIdentity = 5,
};

inline constexpr std::size_t kFeatureCount = 6;

constexpr std::array<FeatureName, kFeatureCount> all_features() {
    return {FeatureName::IssuerIndustry,  FeatureName::MarketIssueType,
            FeatureName::IndustryGroup,   FeatureName::IndustrySubgroup,
            FeatureName::CountryOfDomicile, FeatureName::IssuerIdentity};
}

/// snake_case identifier used in file headers and vector stores.
const char* to_string(FeatureName feature);

/// Inverse of to_string. Throws ParseError on unknown names.
FeatureName feature_from_string(const std::string& name);

/// Sentinel stored for missing categorical values.
inline constexpr const char* kUnknownCategory = "UNKNOWN";

/// Trimmed and upper-cased form used for every category comparison and store
/// lookup; raw feeds are inconsistent about casing and padding.
std::string canonical_category(const std::string& raw);

/// YYYY-MM-DD with calendar-valid month/day.
bool is_valid_iso_date(const std::string& date);

/// One security. Categorical features are stored canonicalized; a missing
/// value is the sentinel "UNKNOWN".
struct Bond {
    std::string bond_id;
    std::string issuer_id;
    std::array<std::string, kFeatureCount> features;
    std::string currency;
    std::string rating;
    double maturity_years = 0.0;
    double spread_bps = 0.0;
    std::string observation_date;  // ISO-8601 calendar date

    const std::string& feature(FeatureName f) const { return features[static_cast<int>(f)]; }
    void set_feature(FeatureName f, std::string value) {
        features[static_cast<int>(f)] = std::move(value);
    }

    bool operator==(const Bond&) const = default;
};

/// Immutable, issuer-indexed bond collection. Bonds are held sorted by
/// bond_id so iteration order is deterministic; sparsification returns a new
/// Catalog and never mutates the source.
class Catalog {
public:
    Catalog() = default;

    /// Validates invariants (unique ids, positive maturity, rating in scale,
    /// non-empty features) and builds the issuer index. Throws
    /// CatalogLoadError listing every violation.
    static Catalog from_bonds(std::vector<Bond> bonds, const RatingScale& scale = RatingScale::standard());

    const std::vector<Bond>& bonds() const { return bonds_; }
    std::size_t size() const { return bonds_.size(); }
    bool empty() const { return bonds_.empty(); }

    bool has_bond(const std::string& bond_id) const;

    /// Throws UnknownBond.
    const Bond& bond(const std::string& bond_id) const;

    bool has_issuer(const std::string& issuer_id) const;

    /// Bond ids for one issuer, ascending. Throws UnknownIssuer.
    const std::vector<std::string>& issuer_bond_ids(const std::string& issuer_id) const;

    /// Issuer ids, ascending.
    std::vector<std::string> issuer_ids() const;

    std::size_t issuer_count() const { return issuer_index_.size(); }

    /// issuer_id -> bond count, for density reporting.
    std::map<std::string, std::size_t> issuer_densities() const;

    /// bond count -> number of issuers with that many bonds.
    std::map<std::size_t, std::size_t> density_histogram() const;

    /// New catalog without the listed bonds. Unknown ids are ignored.
    Catalog without_bonds(const std::vector<std::string>& bond_ids) const;

    bool operator==(const Catalog&) const = default;

private:
    std::vector<Bond> bonds_;  // sorted by bond_id
    std::map<std::string, std::size_t> by_id_;
    std::map<std::string, std::vector<std::string>> issuer_index_;
};

enum class CatalogFormat { Csv, Json };

/// Loads and validates a catalog file. CSV needs the documented 13-column
/// header; JSON is an array of objects with the same field names. Empty
/// categorical cells become "UNKNOWN". Throws CatalogLoadError with row-level
/// diagnostics.
Catalog load_catalog(const std::string& path, CatalogFormat format,
                     const RatingScale& scale = RatingScale::standard());

/// Writes the documented CSV schema (round-trips exactly through load_catalog).
void save_catalog_csv(const Catalog& catalog, const std::string& path);

std::string catalog_to_csv(const Catalog& catalog);

struct SparsifyOutcome {
    Catalog sparse_catalog;
    std::vector<std::string> retained;  // query bonds, ascending bond_id
    std::vector<std::string> dropped;   // ground-truth holdout, ascending bond_id
};

/// Uniformly drops n_drop of the issuer's bonds without replacement using the
/// seeded generator; every other issuer is untouched. Requires n_drop less
/// than the issuer's bond count. Throws UnknownIssuer / DropTooLarge.
SparsifyOutcome sparsify_issuer(const Catalog& catalog, const std::string& issuer_id,
                                std::size_t n_drop, std::uint64_t seed);

}  // namespace bondkit
