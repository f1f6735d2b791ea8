#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "bondkit/catalog.hpp"
#include "bondkit/embedding.hpp"
#include "bondkit/rating.hpp"

namespace bondkit {

/// Nonnegative per-feature weights, normalized to sum 1 on construction.
/// At least one weight must be positive.
class FeatureWeights {
public:
    /// Equal weight on all six features (the documented default).
    static FeatureWeights uniform();

    /// Missing features get weight 0. Throws InvalidWeights on negative
    /// entries or an all-zero map.
    static FeatureWeights from_map(const std::map<FeatureName, double>& weights);

    double weight(FeatureName feature) const { return weights_[static_cast<int>(feature)]; }
    const std::array<double, kFeatureCount>& values() const { return weights_; }

private:
    std::array<double, kFeatureCount> weights_{};
};

struct RankedMatch {
    std::string bond_id;
    double score = 0.0;
    std::array<double, kFeatureCount> per_feature{};
};

/// Ranking for one query: descending score, ties broken by ascending
/// bond_id, query bond excluded.
struct SimilarityResult {
    std::string query_id;
    std::vector<RankedMatch> ranked;
};

inline bool ranks_before(const RankedMatch& a, const RankedMatch& b) {
    return a.score > b.score || (a.score == b.score && a.bond_id < b.bond_id);
}

/// Cosine similarity of the two bonds' category vectors for one feature;
/// identical category strings short-circuit to exactly 1.0. Throws
/// MissingEmbedding naming the feature and category.
double feature_similarity(const Bond& query, const Bond& candidate, FeatureName feature,
                          const VectorStore& store);

/// Same, on raw category values.
double category_similarity(FeatureName feature, const std::string& a, const std::string& b,
                           const VectorStore& store);

/// Weighted arithmetic mean of per-feature scores under normalized weights.
/// Every feature with positive weight must be present (MissingFeatureScore).
double aggregate_similarity(const std::map<FeatureName, double>& per_feature,
                            const FeatureWeights& weights);

/// Exact-match variant: sum of weights of features whose categories agree.
double one_hot_similarity(const Bond& query, const Bond& candidate, const FeatureWeights& weights);

/// Top-k peers by aggregated embedding similarity. Candidates are all bonds
/// except the query itself; set exclude_query_issuer to drop same-issuer
/// bonds (ablation). Throws EmptyCandidateSet.
SimilarityResult top_k(const Bond& query, const Catalog& catalog, std::size_t k,
                       const FeatureWeights& weights, const VectorStore& store,
                       bool exclude_query_issuer = false);

/// Reference implementation of top_k with no shortcuts; used for
/// equivalence testing.
SimilarityResult exhaustive_oracle(const Bond& query, const Catalog& catalog,
                                   const FeatureWeights& weights, const VectorStore& store,
                                   bool exclude_query_issuer = false, std::size_t k = SIZE_MAX);

/// Full embedding ranking (k = all candidates).
SimilarityResult embedding_ranking(const Bond& query, const Catalog& catalog,
                                   const FeatureWeights& weights, const VectorStore& store,
                                   bool exclude_query_issuer = false);

/// Full one-hot ranking.
SimilarityResult one_hot_ranking(const Bond& query, const Catalog& catalog,
                                 const FeatureWeights& weights,
                                 bool exclude_query_issuer = false);

/// Rule-based baseline: candidates whose categories exactly match the
/// query's on every listed feature, ordered by bond_id, unscored. Throws
/// InvalidRules on an empty rule list.
std::vector<std::string> generic_search(const Bond& query, const Catalog& catalog,
                                        const std::vector<FeatureName>& rules,
                                        bool exclude_query_issuer = false);

/// Which numerical attributes feed the numerical baseline. Components are
/// z-scored over the candidate pool; zero-variance components drop out.
struct NumericalProfileConfig {
    bool use_maturity = true;
    bool use_rating = true;
    RatingScale scale = RatingScale::standard();
};

/// Distance-based baseline: score = 1 / (1 + Euclidean distance between
/// standardized profiles). Throws EmptyCandidateSet.
SimilarityResult numerical_search(const Bond& query, const Catalog& catalog, std::size_t k,
                                  const NumericalProfileConfig& profile,
                                  bool exclude_query_issuer = false);

enum class TwoStepOrder { CategoricalThenNumerical, NumericalThenCategorical };

/// Shortlist by one modality, re-rank by the other; reported scores are
/// stage-2 scores. Requires shortlist_size >= k (InvalidShortlist).
SimilarityResult two_step_search(const Bond& query, const Catalog& catalog, std::size_t k,
                                 TwoStepOrder order, std::size_t shortlist_size,
                                 const FeatureWeights& weights, const VectorStore& store,
                                 const NumericalProfileConfig& profile,
                                 bool exclude_query_issuer = false);

/// {query_id, neighbors: [{bond_id, score, per_feature: {...}}]}
std::string result_to_json(const SimilarityResult& result);

/// Header query_id,rank,bond_id,score; rank is 1-based.
std::string result_to_csv(const SimilarityResult& result);

}  // namespace bondkit
