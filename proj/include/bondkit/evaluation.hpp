#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bondkit/catalog.hpp"
#include "bondkit/curve.hpp"
#include "bondkit/embedding.hpp"
#include "bondkit/filters.hpp"
#include "bondkit/search.hpp"
#include "bondkit/stats.hpp"

namespace bondkit {

enum class VariantKind {
    XEmbedding,  // per-feature embedding cosine, weighted aggregate
    OneHot,      // weighted exact-match frequency
    Generic,     // rule-based exact filtering, unscored
    Numerical,   // standardized numerical profile distance
    TwoStep1,    // categorical shortlist, numerical re-rank
    TwoStep2,    // numerical shortlist, categorical re-rank
};

const char* to_string(VariantKind kind);
VariantKind variant_from_string(const std::string& name);
bool variant_needs_store(VariantKind kind);

/// One retrieval strategy plus everything it needs.
struct ModelVariant {
    VariantKind kind = VariantKind::XEmbedding;
    FeatureWeights weights = FeatureWeights::uniform();
    std::vector<FeatureName> rules = {FeatureName::IssuerIndustry, FeatureName::IndustryGroup};
    NumericalProfileConfig profile;
    std::size_t shortlist_size = 0;  // two-step stage-1 size; 0 means 5k
    bool exclude_query_issuer = false;
};

enum class SparsityMode {
    PaperFormula,  // queries / (queries + similars)
    Complement,    // similars / (queries + similars) -- matches the worked captions
};

enum class EvalAgainst {
    HeldOutBonds,  // pointwise at the dropped bonds' maturities
    TenorGrid,     // against the full-set curve on a dense tenor grid
};

/// Fraction of the fit set that is borrowed (Complement) or own (PaperFormula).
/// Throws ZeroTotal when both counts are zero.
double sparsity_metric(std::size_t n_queries, std::size_t n_similars, SparsityMode mode);

enum class TrialStatus {
    Ok,
    NoHoldout,                 // n_drop = 0: nothing to evaluate against
    NoCandidatesAfterFilters,  // augmentation empty and too few own bonds to fit
    DropTooLarge,              // schedule asked for more drops than the issuer has
    FitFailed,
};

const char* to_string(TrialStatus status);

/// One sparsify -> augment -> fit -> evaluate pass for a single issuer.
struct IssuerTrial {
    std::string issuer_id;
    std::size_t n_drop = 0;
    double sparsity = 0.0;
    std::size_t n_queries = 0;   // retained own bonds
    std::size_t n_similars = 0;  // distinct borrowed bonds in the fit set
    TrialStatus status = TrialStatus::Ok;
    std::string failure_reason;
    std::optional<double> rmse_bps;  // over the held-out bonds' maturities
    std::optional<double> mape_pct;
    std::size_t mape_excluded = 0;
    std::vector<std::string> neighbor_ids;  // borrowed bond ids, ascending
    std::optional<CurveFit> fitted;
};

/// Shared experiment settings; a benchmark holds these fixed across variants.
struct EvaluationProtocol {
    std::size_t min_bonds = 8;
    /// Fractions of each issuer's bond count to drop, clamped to [1, size-1].
    std::vector<double> drop_fractions = {0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85};
    /// When nonempty, absolute drop counts are used instead of fractions.
    std::vector<std::size_t> drop_counts;
    std::size_t k = 5;
    std::size_t n_bins = 10;
    SparsityMode sparsity_mode = SparsityMode::Complement;
    EvalAgainst eval_against = EvalAgainst::HeldOutBonds;
    FilterConfig filters;
    RatingScale scale = RatingScale::standard();
    int threads = 1;

    void validate() const;
};

struct SparsityBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n = 0;
    double median_rmse = 0.0;
    double mean_rmse = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double whisker_lo = 0.0;
    double whisker_hi = 0.0;
    std::vector<std::string> outlier_trials;  // "issuer:n_drop"
};

struct ReportSummary {
    std::size_t n_trials = 0;
    std::size_t n_ok = 0;
    std::size_t n_failed = 0;  // excludes NoHoldout
    std::optional<double> median_rmse_bps;
    std::optional<double> mean_rmse_bps;
    std::optional<double> median_mape_pct;
    std::optional<double> mean_mape_pct;
};

struct EvaluationReport {
    std::string variant;
    std::vector<IssuerTrial> trials;
    std::vector<SparsityBin> bins;  // over Ok trials, equal-width on [0, 1]
    ReportSummary summary;
};

/// Fails fast (MissingEmbedding) if any catalog category lacks a vector.
void validate_store_coverage(const Catalog& catalog, const VectorStore& store);

/// Runs the variant's search strategy and returns its top-k (k = SIZE_MAX for
/// the full ranking). store may be null for variants that do not use one.
SimilarityResult variant_search(const Bond& query, const Catalog& catalog,
                                const ModelVariant& variant, const VectorStore* store,
                                std::size_t k);

/// Runs one trial. The trial's random stream derives from
/// (seed, issuer_id, n_drop), never from the variant, so different variants
/// see identical drops. Throws UnknownIssuer / DropTooLarge; search and fit
/// problems are recorded in the trial instead of thrown.
IssuerTrial run_trial(const Catalog& catalog, const std::string& issuer_id, std::size_t n_drop,
                      const ModelVariant& variant, const VectorStore* store,
                      const FilterConfig& filters, const RatingScale& scale, std::size_t k,
                      SparsityMode sparsity_mode, std::uint64_t seed,
                      EvalAgainst eval_against = EvalAgainst::HeldOutBonds);

/// Every eligible issuer x every schedule entry, binned and summarized.
/// Throws NoEligibleIssuers.
EvaluationReport run_evaluation(const Catalog& catalog, const ModelVariant& variant,
                                const VectorStore* store, const EvaluationProtocol& protocol,
                                std::uint64_t seed);

struct ComparisonRow {
    std::string variant;
    std::optional<double> median_rmse_bps;
    std::optional<double> mean_rmse_bps;
    std::optional<double> median_mape_pct;
    std::optional<double> mean_mape_pct;
    std::size_t n_ok = 0;
    std::size_t n_failed = 0;
};

struct BenchmarkResult {
    std::vector<EvaluationReport> reports;  // in variant order
    std::vector<ComparisonRow> comparison;
};

/// Controlled comparison: every variant sees identical sparsification draws,
/// filters and k. Requires at least two variants (InvalidConfig).
BenchmarkResult benchmark(const Catalog& catalog, const std::vector<ModelVariant>& variants,
                          const VectorStore* store, const EvaluationProtocol& protocol,
                          std::uint64_t seed);

std::string report_to_json(const EvaluationReport& report);
std::string trials_to_csv(const EvaluationReport& report);
std::string bins_to_csv(const EvaluationReport& report);
std::string comparison_to_csv(const BenchmarkResult& result);
std::string comparison_to_text(const BenchmarkResult& result);

}  // namespace bondkit
