#include "bondkit/search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "bondkit/detail/text.hpp"
#include "bondkit/errors.hpp"

namespace bondkit {

namespace {

std::vector<const Bond*> candidate_pool(const Bond& query, const Catalog& catalog,
                                        bool exclude_query_issuer) {
    std::vector<const Bond*> pool;
    pool.reserve(catalog.size());
    for (const Bond& b : catalog.bonds()) {
        if (b.bond_id == query.bond_id) continue;
        if (exclude_query_issuer && b.issuer_id == query.issuer_id) continue;
        pool.push_back(&b);
    }
    return pool;
}

void require_candidates(const std::vector<const Bond*>& pool) {
    if (pool.empty())
        throw Error(ErrorCode::EmptyCandidateSet, "no candidate bonds besides the query");
}

RankedMatch score_embedding(const Bond& query, const Bond& candidate,
                            const FeatureWeights& weights, const VectorStore& store) {
    RankedMatch m;
    m.bond_id = candidate.bond_id;
    double acc = 0.0;
    for (FeatureName f : all_features()) {
        const double s = feature_similarity(query, candidate, f, store);
        m.per_feature[static_cast<int>(f)] = s;
        acc += weights.weight(f) * s;
    }
    m.score = acc;
    return m;
}

RankedMatch score_one_hot(const Bond& query, const Bond& candidate, const FeatureWeights& weights) {
    RankedMatch m;
    m.bond_id = candidate.bond_id;
    double acc = 0.0;
    for (FeatureName f : all_features()) {
        const double s = query.feature(f) == candidate.feature(f) ? 1.0 : 0.0;
        m.per_feature[static_cast<int>(f)] = s;
        acc += weights.weight(f) * s;
    }
    m.score = acc;
    return m;
}

// Profiles standardized over the pool; returns one matrix row per pool bond
// plus the query row last. Zero-variance components are zeroed everywhere so
// they cannot contribute to any distance.
std::vector<std::vector<double>> standardized_profiles(const Bond& query,
                                                       const std::vector<const Bond*>& pool,
                                                       const NumericalProfileConfig& cfg) {
    std::vector<std::vector<double>> raw;
    raw.reserve(pool.size() + 1);
    auto profile_of = [&](const Bond& b) {
        std::vector<double> p;
        if (cfg.use_maturity) p.push_back(b.maturity_years);
        if (cfg.use_rating) p.push_back(static_cast<double>(cfg.scale.rank(b.rating)));
        return p;
    };
    for (const Bond* b : pool) raw.push_back(profile_of(*b));
    raw.push_back(profile_of(query));
    if (raw.front().empty())
        throw Error(ErrorCode::InvalidConfig, "numerical profile has no components");

    const std::size_t dims = raw.front().size();
    const std::size_t n_pool = pool.size();
    for (std::size_t j = 0; j < dims; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n_pool; ++i) mean += raw[i][j];
        mean /= static_cast<double>(n_pool);
        double var = 0.0;
        for (std::size_t i = 0; i < n_pool; ++i) {
            const double d = raw[i][j] - mean;
            var += d * d;
        }
        var /= static_cast<double>(n_pool);
        const double sd = std::sqrt(var);
        for (auto& row : raw) row[j] = sd > 0.0 ? (row[j] - mean) / sd : 0.0;
    }
    return raw;
}

SimilarityResult rank_all(const Bond& query, std::vector<RankedMatch> matches) {
    std::sort(matches.begin(), matches.end(), ranks_before);
    return {query.bond_id, std::move(matches)};
}

SimilarityResult numerical_ranking(const Bond& query, const Bond* const* pool_data,
                                   std::size_t pool_size, const NumericalProfileConfig& cfg) {
    std::vector<const Bond*> pool(pool_data, pool_data + pool_size);
    require_candidates(pool);
    const auto z = standardized_profiles(query, pool, cfg);
    const std::vector<double>& qz = z.back();
    std::vector<RankedMatch> matches;
    matches.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < qz.size(); ++j) {
            const double d = qz[j] - z[i][j];
            d2 += d * d;
        }
        RankedMatch m;
        m.bond_id = pool[i]->bond_id;
        m.score = 1.0 / (1.0 + std::sqrt(d2));
        matches.push_back(std::move(m));
    }
    return rank_all(query, std::move(matches));
}

}  // namespace

namespace {

// Nudges the last positive weight so the left-to-right accumulated sum is
// exactly 1.0; a full six-feature match must aggregate to exactly 1.0.
void pin_unit_sum(std::array<double, kFeatureCount>& weights) {
    int last = -1;
    for (int i = 0; i < static_cast<int>(kFeatureCount); ++i)
        if (weights[static_cast<std::size_t>(i)] > 0.0) last = i;
    double prefix = 0.0;
    for (int i = 0; i < static_cast<int>(kFeatureCount); ++i)
        if (i != last) prefix += weights[static_cast<std::size_t>(i)];
    weights[static_cast<std::size_t>(last)] = std::max(0.0, 1.0 - prefix);
}

}  // namespace

FeatureWeights FeatureWeights::uniform() {
    FeatureWeights w;
    w.weights_.fill(1.0 / static_cast<double>(kFeatureCount));
    pin_unit_sum(w.weights_);
    return w;
}

FeatureWeights FeatureWeights::from_map(const std::map<FeatureName, double>& weights) {
    FeatureWeights w;
    double total = 0.0;
    for (const auto& [feature, value] : weights) {
        if (value < 0.0)
            throw Error(ErrorCode::InvalidWeights,
                        std::string("negative weight for ") + to_string(feature));
        if (!std::isfinite(value))
            throw Error(ErrorCode::InvalidWeights,
                        std::string("non-finite weight for ") + to_string(feature));
        w.weights_[static_cast<int>(feature)] = value;
        total += value;
    }
    if (total <= 0.0)
        throw Error(ErrorCode::InvalidWeights, "at least one feature weight must be positive");
    for (double& v : w.weights_) v /= total;
    pin_unit_sum(w.weights_);
    return w;
}

double category_similarity(FeatureName feature, const std::string& a, const std::string& b,
                           const VectorStore& store) {
    const EmbeddingVector& av = store.vector_for(feature, a);
    if (a == b) return 1.0;
    return cosine_similarity(av, store.vector_for(feature, b));
}

double feature_similarity(const Bond& query, const Bond& candidate, FeatureName feature,
                          const VectorStore& store) {
    return category_similarity(feature, query.feature(feature), candidate.feature(feature), store);
}

double aggregate_similarity(const std::map<FeatureName, double>& per_feature,
                            const FeatureWeights& weights) {
    double acc = 0.0;
    for (FeatureName f : all_features()) {
        const double w = weights.weight(f);
        if (w == 0.0) continue;
        const auto it = per_feature.find(f);
        if (it == per_feature.end())
            throw Error(ErrorCode::MissingFeatureScore,
                        std::string("no score for weighted feature ") + to_string(f));
        acc += w * it->second;
    }
    return acc;
}

double one_hot_similarity(const Bond& query, const Bond& candidate, const FeatureWeights& weights) {
    double acc = 0.0;
    for (FeatureName f : all_features())
        if (query.feature(f) == candidate.feature(f)) acc += weights.weight(f);
    return acc;
}

SimilarityResult embedding_ranking(const Bond& query, const Catalog& catalog,
                                   const FeatureWeights& weights, const VectorStore& store,
                                   bool exclude_query_issuer) {
    const auto pool = candidate_pool(query, catalog, exclude_query_issuer);
    require_candidates(pool);

    // categories repeat heavily across candidates, so each distinct
    // (feature, category) cosine is computed once per query
    std::array<std::unordered_map<std::string, double>, kFeatureCount> cache;
    auto cached_similarity = [&](FeatureName f, const std::string& category) {
        auto& memo = cache[static_cast<int>(f)];
        auto it = memo.find(category);
        if (it == memo.end())
            it = memo.emplace(category,
                              category_similarity(f, query.feature(f), category, store))
                     .first;
        return it->second;
    };

    std::vector<RankedMatch> matches;
    matches.reserve(pool.size());
    for (const Bond* c : pool) {
        RankedMatch m;
        m.bond_id = c->bond_id;
        double acc = 0.0;
        for (FeatureName f : all_features()) {
            const double s = cached_similarity(f, c->feature(f));
            m.per_feature[static_cast<int>(f)] = s;
            acc += weights.weight(f) * s;
        }
        m.score = acc;
        matches.push_back(std::move(m));
    }
    return rank_all(query, std::move(matches));
}

SimilarityResult top_k(const Bond& query, const Catalog& catalog, std::size_t k,
                       const FeatureWeights& weights, const VectorStore& store,
                       bool exclude_query_issuer) {
    if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be positive");
    SimilarityResult full = embedding_ranking(query, catalog, weights, store, exclude_query_issuer);
    if (full.ranked.size() > k) full.ranked.resize(k);
    return full;
}

SimilarityResult exhaustive_oracle(const Bond& query, const Catalog& catalog,
                                   const FeatureWeights& weights, const VectorStore& store,
                                   bool exclude_query_issuer, std::size_t k) {
    const auto pool = candidate_pool(query, catalog, exclude_query_issuer);
    require_candidates(pool);
    // no memoization, no shortcuts: score every candidate from scratch
    std::vector<RankedMatch> matches;
    matches.reserve(pool.size());
    for (const Bond* c : pool) matches.push_back(score_embedding(query, *c, weights, store));
    std::sort(matches.begin(), matches.end(), ranks_before);
    if (matches.size() > k) matches.resize(k);
    return {query.bond_id, std::move(matches)};
}

SimilarityResult one_hot_ranking(const Bond& query, const Catalog& catalog,
                                 const FeatureWeights& weights, bool exclude_query_issuer) {
    const auto pool = candidate_pool(query, catalog, exclude_query_issuer);
    require_candidates(pool);
    std::vector<RankedMatch> matches;
    matches.reserve(pool.size());
    for (const Bond* c : pool) matches.push_back(score_one_hot(query, *c, weights));
    return rank_all(query, std::move(matches));
}

std::vector<std::string> generic_search(const Bond& query, const Catalog& catalog,
                                        const std::vector<FeatureName>& rules,
                                        bool exclude_query_issuer) {
    if (rules.empty()) throw Error(ErrorCode::InvalidRules, "rule list is empty");
    std::vector<std::string> out;
    for (const Bond& b : catalog.bonds()) {  // bonds() is ascending by id
        if (b.bond_id == query.bond_id) continue;
        if (exclude_query_issuer && b.issuer_id == query.issuer_id) continue;
        bool all_match = true;
        for (FeatureName f : rules) {
            if (b.feature(f) != query.feature(f)) {
                all_match = false;
                break;
            }
        }
        if (all_match) out.push_back(b.bond_id);
    }
    return out;
}

SimilarityResult numerical_search(const Bond& query, const Catalog& catalog, std::size_t k,
                                  const NumericalProfileConfig& profile,
                                  bool exclude_query_issuer) {
    const auto pool = candidate_pool(query, catalog, exclude_query_issuer);
    SimilarityResult full = numerical_ranking(query, pool.data(), pool.size(), profile);
    if (full.ranked.size() > k) full.ranked.resize(k);
    return full;
}

SimilarityResult two_step_search(const Bond& query, const Catalog& catalog, std::size_t k,
                                 TwoStepOrder order, std::size_t shortlist_size,
                                 const FeatureWeights& weights, const VectorStore& store,
                                 const NumericalProfileConfig& profile,
                                 bool exclude_query_issuer) {
    if (shortlist_size < k)
        throw Error(ErrorCode::InvalidShortlist,
                    "shortlist size " + std::to_string(shortlist_size) + " < k " + std::to_string(k));

    const bool categorical_first = order == TwoStepOrder::CategoricalThenNumerical;
    SimilarityResult stage1 =
        categorical_first
            ? embedding_ranking(query, catalog, weights, store, exclude_query_issuer)
            : numerical_search(query, catalog, SIZE_MAX, profile, exclude_query_issuer);
    if (stage1.ranked.size() > shortlist_size) stage1.ranked.resize(shortlist_size);

    std::vector<const Bond*> shortlist;
    shortlist.reserve(stage1.ranked.size());
    for (const auto& m : stage1.ranked) shortlist.push_back(&catalog.bond(m.bond_id));

    SimilarityResult stage2;
    if (categorical_first) {
        stage2 = numerical_ranking(query, shortlist.data(), shortlist.size(), profile);
    } else {
        std::vector<RankedMatch> matches;
        matches.reserve(shortlist.size());
        for (const Bond* c : shortlist) matches.push_back(score_embedding(query, *c, weights, store));
        stage2 = rank_all(query, std::move(matches));
    }
    if (stage2.ranked.size() > k) stage2.ranked.resize(k);
    return stage2;
}

std::string result_to_json(const SimilarityResult& result) {
    nlohmann::json neighbors = nlohmann::json::array();
    for (const auto& m : result.ranked) {
        nlohmann::json per_feature;
        for (FeatureName f : all_features())
            per_feature[to_string(f)] = m.per_feature[static_cast<int>(f)];
        neighbors.push_back({{"bond_id", m.bond_id}, {"score", m.score}, {"per_feature", per_feature}});
    }
    nlohmann::json doc{{"query_id", result.query_id}, {"neighbors", neighbors}};
    return doc.dump(2) + "\n";
}

std::string result_to_csv(const SimilarityResult& result) {
    std::ostringstream out;
    out << "query_id,rank,bond_id,score\n";
    for (std::size_t i = 0; i < result.ranked.size(); ++i) {
        out << result.query_id << ',' << (i + 1) << ',' << result.ranked[i].bond_id << ','
            << detail::format_double(result.ranked[i].score) << '\n';
    }
    return out.str();
}

}  // namespace bondkit
