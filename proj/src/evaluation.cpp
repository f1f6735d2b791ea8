#include "bondkit/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "bondkit/detail/text.hpp"
#include "bondkit/errors.hpp"
#include "bondkit/rng.hpp"

namespace bondkit {

namespace {

constexpr std::size_t kDefaultShortlistFactor = 5;

SimilarityResult full_ranking(const Bond& query, const Catalog& catalog,
                              const ModelVariant& variant, const VectorStore* store,
                              std::size_t k);

SimilarityResult full_ranking_impl(const Bond& query, const Catalog& catalog,
                                   const ModelVariant& variant, const VectorStore* store,
                                   std::size_t k) {
    switch (variant.kind) {
        case VariantKind::XEmbedding:
            return embedding_ranking(query, catalog, variant.weights, *store,
                                     variant.exclude_query_issuer);
        case VariantKind::OneHot:
            return one_hot_ranking(query, catalog, variant.weights, variant.exclude_query_issuer);
        case VariantKind::Generic: {
            SimilarityResult r;
            r.query_id = query.bond_id;
            for (auto& id : generic_search(query, catalog, variant.rules,
                                           variant.exclude_query_issuer)) {
                RankedMatch m;
                m.bond_id = std::move(id);
                m.score = 1.0;  // rule matches are unscored; every survivor is equal
                for (FeatureName f : variant.rules) m.per_feature[static_cast<int>(f)] = 1.0;
                r.ranked.push_back(std::move(m));
            }
            return r;
        }
        case VariantKind::Numerical:
            return numerical_search(query, catalog, SIZE_MAX, variant.profile,
                                    variant.exclude_query_issuer);
        case VariantKind::TwoStep1:
        case VariantKind::TwoStep2: {
            std::size_t m = variant.shortlist_size;
            if (m == 0) m = k >= SIZE_MAX / kDefaultShortlistFactor ? SIZE_MAX
                                                                    : kDefaultShortlistFactor * k;
            const TwoStepOrder order = variant.kind == VariantKind::TwoStep1
                                           ? TwoStepOrder::CategoricalThenNumerical
                                           : TwoStepOrder::NumericalThenCategorical;
            // ask for the whole shortlist back; the caller filters then trims to k
            return two_step_search(query, catalog, m, order, m, variant.weights, *store,
                                   variant.profile, variant.exclude_query_issuer);
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unhandled variant kind");
}

SimilarityResult full_ranking(const Bond& query, const Catalog& catalog,
                              const ModelVariant& variant, const VectorStore* store,
                              std::size_t k) {
    if (variant_needs_store(variant.kind) && store == nullptr)
        throw Error(ErrorCode::InvalidConfig,
                    std::string(to_string(variant.kind)) + " variant requires a vector store");
    return full_ranking_impl(query, catalog, variant, store, k);
}

std::optional<double> median_of(const std::vector<double>& values) {
    if (values.empty()) return std::nullopt;
    return median(values);
}

std::optional<double> mean_of(const std::vector<double>& values) {
    if (values.empty()) return std::nullopt;
    return mean(values);
}

void run_indexed(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min<int>(threads, static_cast<int>(n));
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::string csv_optional(const std::optional<double>& v) {
    return v ? detail::format_double(*v) : std::string();
}

nlohmann::json json_optional(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

const char* to_string(VariantKind kind) {
    switch (kind) {
        case VariantKind::XEmbedding: return "XEmbedding";
        case VariantKind::OneHot: return "OneHot";
        case VariantKind::Generic: return "Generic";
        case VariantKind::Numerical: return "Numerical";
        case VariantKind::TwoStep1: return "TwoStep1";
        case VariantKind::TwoStep2: return "TwoStep2";
    }
    return "Unknown";
}

VariantKind variant_from_string(const std::string& name) {
    const std::string lowered = [&] {
        std::string s = name;
        for (char& c : s)
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        return s;
    }();
    if (lowered == "xembedding") return VariantKind::XEmbedding;
    if (lowered == "onehot" || lowered == "one-hot" || lowered == "one_hot")
        return VariantKind::OneHot;
    if (lowered == "generic") return VariantKind::Generic;
    if (lowered == "numerical") return VariantKind::Numerical;
    if (lowered == "twostep1" || lowered == "two-step-1" || lowered == "two_step_1")
        return VariantKind::TwoStep1;
    if (lowered == "twostep2" || lowered == "two-step-2" || lowered == "two_step_2")
        return VariantKind::TwoStep2;
    throw Error(ErrorCode::ParseError, "unknown model variant: '" + name + "'");
}

bool variant_needs_store(VariantKind kind) {
    return kind == VariantKind::XEmbedding || kind == VariantKind::TwoStep1 ||
           kind == VariantKind::TwoStep2;
}

const char* to_string(TrialStatus status) {
    switch (status) {
        case TrialStatus::Ok: return "ok";
        case TrialStatus::NoHoldout: return "no_holdout";
        case TrialStatus::NoCandidatesAfterFilters: return "no_candidates_after_filters";
        case TrialStatus::DropTooLarge: return "drop_too_large";
        case TrialStatus::FitFailed: return "fit_failed";
    }
    return "unknown";
}

double sparsity_metric(std::size_t n_queries, std::size_t n_similars, SparsityMode mode) {
    const std::size_t total = n_queries + n_similars;
    if (total == 0) throw Error(ErrorCode::ZeroTotal, "no queries and no similars");
    const double q = static_cast<double>(n_queries);
    const double s = static_cast<double>(n_similars);
    return mode == SparsityMode::PaperFormula ? q / (q + s) : s / (q + s);
}

void EvaluationProtocol::validate() const {
    if (min_bonds < 1) throw Error(ErrorCode::InvalidConfig, "min_bonds must be positive");
    if (k < 1) throw Error(ErrorCode::InvalidConfig, "k must be positive");
    if (n_bins < 1) throw Error(ErrorCode::InvalidConfig, "n_bins must be positive");
    if (drop_counts.empty() && drop_fractions.empty())
        throw Error(ErrorCode::InvalidConfig, "empty drop schedule");
    for (double f : drop_fractions)
        if (!(f >= 0.0) || !(f < 1.0))
            throw Error(ErrorCode::InvalidConfig, "drop fractions must lie in [0, 1)");
    if (threads < 1) throw Error(ErrorCode::InvalidConfig, "threads must be positive");
    filters.validate();
}

SimilarityResult variant_search(const Bond& query, const Catalog& catalog,
                                const ModelVariant& variant, const VectorStore* store,
                                std::size_t k) {
    SimilarityResult r = full_ranking(query, catalog, variant, store, k);
    if (r.ranked.size() > k) r.ranked.resize(k);
    return r;
}

void validate_store_coverage(const Catalog& catalog, const VectorStore& store) {
    for (const Bond& b : catalog.bonds())
        for (FeatureName f : all_features())
            if (!store.contains(f, b.feature(f)))
                throw Error(ErrorCode::MissingEmbedding,
                            std::string("bond ") + b.bond_id + ": no embedding for " +
                                to_string(f) + "/" + b.feature(f));
}

IssuerTrial run_trial(const Catalog& catalog, const std::string& issuer_id, std::size_t n_drop,
                      const ModelVariant& variant, const VectorStore* store,
                      const FilterConfig& filters, const RatingScale& scale, std::size_t k,
                      SparsityMode sparsity_mode, std::uint64_t seed, EvalAgainst eval_against) {
    if (variant_needs_store(variant.kind) && store == nullptr)
        throw Error(ErrorCode::InvalidConfig,
                    std::string(to_string(variant.kind)) + " variant requires a vector store");

    IssuerTrial trial;
    trial.issuer_id = issuer_id;
    trial.n_drop = n_drop;

    const std::uint64_t trial_seed = derive_seed(seed, issuer_id, n_drop);
    SparsifyOutcome outcome = sparsify_issuer(catalog, issuer_id, n_drop, trial_seed);
    const Catalog& sparse = outcome.sparse_catalog;
    trial.n_queries = outcome.retained.size();

    // union of per-query filtered top-k, deduplicated keeping the best score
    const std::set<std::string> retained_set(outcome.retained.begin(), outcome.retained.end());
    std::map<std::string, double> neighbor_score;
    for (const std::string& query_id : outcome.retained) {
        const Bond& query = sparse.bond(query_id);
        SimilarityResult ranking;
        try {
            ranking = full_ranking(query, sparse, variant, store, k);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::EmptyCandidateSet) continue;
            throw;
        }
        const std::vector<RankedMatch> kept =
            apply_filters(query, ranking.ranked, sparse, scale, filters);
        const std::size_t take = std::min(k, kept.size());
        for (std::size_t i = 0; i < take; ++i) {
            auto [it, inserted] = neighbor_score.emplace(kept[i].bond_id, kept[i].score);
            if (!inserted) it->second = std::max(it->second, kept[i].score);
        }
    }
    for (const auto& [id, _] : neighbor_score)
        if (!retained_set.count(id)) trial.neighbor_ids.push_back(id);
    trial.n_similars = trial.neighbor_ids.size();
    trial.sparsity = sparsity_metric(trial.n_queries, trial.n_similars, sparsity_mode);

    std::vector<CurvePoint> points;
    points.reserve(trial.n_queries + trial.n_similars);
    for (const std::string& id : outcome.retained) {
        const Bond& b = sparse.bond(id);
        points.push_back({b.maturity_years, b.spread_bps});
    }
    for (const std::string& id : trial.neighbor_ids) {
        const Bond& b = sparse.bond(id);
        points.push_back({b.maturity_years, b.spread_bps});
    }

    if (points.size() < 2) {
        trial.status = TrialStatus::NoCandidatesAfterFilters;
        trial.failure_reason = "fit set has " + std::to_string(points.size()) + " point(s)";
        return trial;
    }
    try {
        trial.fitted = fit_ns(points);
    } catch (const Error& e) {
        trial.status = TrialStatus::FitFailed;
        trial.failure_reason = e.what();
        return trial;
    }

    if (n_drop == 0) {
        trial.status = TrialStatus::NoHoldout;
        return trial;
    }

    std::vector<double> predicted;
    std::vector<double> actual;
    if (eval_against == EvalAgainst::HeldOutBonds) {
        predicted.reserve(outcome.dropped.size());
        for (const std::string& id : outcome.dropped) {
            const Bond& b = catalog.bond(id);
            predicted.push_back(ns_spread(trial.fitted->params, b.maturity_years));
            actual.push_back(b.spread_bps);
        }
    } else {
        // the "actual" curve is a fit to the issuer's complete term structure
        std::vector<CurvePoint> full;
        for (const std::string& id : catalog.issuer_bond_ids(issuer_id)) {
            const Bond& b = catalog.bond(id);
            full.push_back({b.maturity_years, b.spread_bps});
        }
        CurveFit actual_fit;
        try {
            actual_fit = fit_ns(full);
        } catch (const Error& e) {
            trial.status = TrialStatus::FitFailed;
            trial.failure_reason = std::string("full-set curve: ") + e.what();
            return trial;
        }
        for (const CurvePoint& pt : sample_curve(actual_fit.params)) {
            predicted.push_back(ns_spread(trial.fitted->params, pt.maturity_years));
            actual.push_back(pt.spread_bps);
        }
    }
    trial.rmse_bps = rmse(predicted, actual);
    try {
        trial.mape_pct = mape(predicted, actual, &trial.mape_excluded);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::AllExcluded) throw;  // mape stays empty
    }
    return trial;
}

EvaluationReport run_evaluation(const Catalog& catalog, const ModelVariant& variant,
                                const VectorStore* store, const EvaluationProtocol& protocol,
                                std::uint64_t seed) {
    protocol.validate();
    if (variant_needs_store(variant.kind)) {
        if (store == nullptr)
            throw Error(ErrorCode::InvalidConfig,
                        std::string(to_string(variant.kind)) + " variant requires a vector store");
        validate_store_coverage(catalog, *store);
    }

    std::vector<std::pair<std::string, std::size_t>> specs;  // (issuer, n_drop)
    for (const auto& [issuer, count] : catalog.issuer_densities()) {
        if (count < protocol.min_bonds) continue;
        if (!protocol.drop_counts.empty()) {
            for (std::size_t n_drop : protocol.drop_counts) specs.emplace_back(issuer, n_drop);
        } else {
            std::set<std::size_t> drops;  // distinct after rounding
            for (double f : protocol.drop_fractions) {
                const auto raw = static_cast<long long>(
                    std::llround(f * static_cast<double>(count)));
                const long long hi = static_cast<long long>(count) - 1;
                drops.insert(static_cast<std::size_t>(std::clamp<long long>(raw, 1, hi)));
            }
            for (std::size_t n_drop : drops) specs.emplace_back(issuer, n_drop);
        }
    }
    if (specs.empty())
        throw Error(ErrorCode::NoEligibleIssuers,
                    "no issuer has at least " + std::to_string(protocol.min_bonds) + " bonds");

    std::vector<IssuerTrial> trials(specs.size());
    run_indexed(specs.size(), protocol.threads, [&](std::size_t i) {
        const auto& [issuer, n_drop] = specs[i];
        try {
            trials[i] = run_trial(catalog, issuer, n_drop, variant, store, protocol.filters,
                                  protocol.scale, protocol.k, protocol.sparsity_mode, seed,
                                  protocol.eval_against);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DropTooLarge) throw;
            IssuerTrial failed;
            failed.issuer_id = issuer;
            failed.n_drop = n_drop;
            failed.status = TrialStatus::DropTooLarge;
            failed.failure_reason = e.what();
            trials[i] = std::move(failed);
        }
    });

    EvaluationReport report;
    report.variant = to_string(variant.kind);
    report.trials = std::move(trials);

    // bin Ok trials by sparsity; a trial with zero augmentation (sparsity 0)
    // lands in the first bin
    std::vector<std::vector<std::size_t>> members(protocol.n_bins);
    for (std::size_t i = 0; i < report.trials.size(); ++i) {
        const IssuerTrial& t = report.trials[i];
        if (t.status != TrialStatus::Ok || !t.rmse_bps) continue;
        auto bin = static_cast<std::size_t>(t.sparsity * static_cast<double>(protocol.n_bins));
        bin = std::min(bin, protocol.n_bins - 1);
        members[bin].push_back(i);
    }
    for (std::size_t b = 0; b < protocol.n_bins; ++b) {
        if (members[b].empty()) continue;
        SparsityBin bin;
        bin.lo = static_cast<double>(b) / static_cast<double>(protocol.n_bins);
        bin.hi = static_cast<double>(b + 1) / static_cast<double>(protocol.n_bins);
        std::vector<double> values;
        values.reserve(members[b].size());
        for (std::size_t i : members[b]) values.push_back(*report.trials[i].rmse_bps);
        const BoxStats bs = box_stats(values);
        bin.n = bs.n;
        bin.q1 = bs.q1;
        bin.median_rmse = bs.median;
        bin.q3 = bs.q3;
        bin.whisker_lo = bs.whisker_lo;
        bin.whisker_hi = bs.whisker_hi;
        bin.mean_rmse = mean(values);
        for (std::size_t out_idx : bs.outliers) {
            const IssuerTrial& t = report.trials[members[b][out_idx]];
            bin.outlier_trials.push_back(t.issuer_id + ":" + std::to_string(t.n_drop));
        }
        report.bins.push_back(std::move(bin));
    }

    std::vector<double> ok_rmse;
    std::vector<double> ok_mape;
    for (const IssuerTrial& t : report.trials) {
        if (t.status == TrialStatus::Ok && t.rmse_bps) ok_rmse.push_back(*t.rmse_bps);
        if (t.status == TrialStatus::Ok && t.mape_pct) ok_mape.push_back(*t.mape_pct);
        if (t.status == TrialStatus::Ok) ++report.summary.n_ok;
        else if (t.status != TrialStatus::NoHoldout) ++report.summary.n_failed;
    }
    report.summary.n_trials = report.trials.size();
    report.summary.median_rmse_bps = median_of(ok_rmse);
    report.summary.mean_rmse_bps = mean_of(ok_rmse);
    report.summary.median_mape_pct = median_of(ok_mape);
    report.summary.mean_mape_pct = mean_of(ok_mape);
    return report;
}

BenchmarkResult benchmark(const Catalog& catalog, const std::vector<ModelVariant>& variants,
                          const VectorStore* store, const EvaluationProtocol& protocol,
                          std::uint64_t seed) {
    if (variants.size() < 2)
        throw Error(ErrorCode::InvalidConfig, "benchmark needs at least two variants");
    BenchmarkResult result;
    result.reports.reserve(variants.size());
    for (const ModelVariant& v : variants)
        result.reports.push_back(run_evaluation(catalog, v, store, protocol, seed));
    for (const EvaluationReport& r : result.reports) {
        ComparisonRow row;
        row.variant = r.variant;
        row.median_rmse_bps = r.summary.median_rmse_bps;
        row.mean_rmse_bps = r.summary.mean_rmse_bps;
        row.median_mape_pct = r.summary.median_mape_pct;
        row.mean_mape_pct = r.summary.mean_mape_pct;
        row.n_ok = r.summary.n_ok;
        row.n_failed = r.summary.n_failed;
        result.comparison.push_back(std::move(row));
    }
    return result;
}

std::string report_to_json(const EvaluationReport& report) {
    nlohmann::json trials = nlohmann::json::array();
    for (const IssuerTrial& t : report.trials) {
        nlohmann::json jt{
            {"issuer_id", t.issuer_id},
            {"n_drop", t.n_drop},
            {"sparsity", t.sparsity},
            {"n_queries", t.n_queries},
            {"n_similars", t.n_similars},
            {"status", to_string(t.status)},
            {"rmse_bps", json_optional(t.rmse_bps)},
            {"mape_pct", json_optional(t.mape_pct)},
            {"mape_excluded", t.mape_excluded},
            {"neighbors", t.neighbor_ids},
        };
        if (!t.failure_reason.empty()) jt["failure_reason"] = t.failure_reason;
        if (t.fitted) {
            jt["fit"] = {{"beta0", t.fitted->params.beta0},
                         {"beta1", t.fitted->params.beta1},
                         {"beta2", t.fitted->params.beta2},
                         {"lambda", t.fitted->params.lambda},
                         {"n_points", t.fitted->n_points},
                         {"in_sample_rmse_bps", t.fitted->in_sample_rmse_bps}};
        }
        trials.push_back(std::move(jt));
    }
    nlohmann::json bins = nlohmann::json::array();
    for (const SparsityBin& b : report.bins) {
        bins.push_back({{"lo", b.lo},
                        {"hi", b.hi},
                        {"n", b.n},
                        {"median_rmse", b.median_rmse},
                        {"mean_rmse", b.mean_rmse},
                        {"q1", b.q1},
                        {"q3", b.q3},
                        {"whisker_lo", b.whisker_lo},
                        {"whisker_hi", b.whisker_hi},
                        {"outliers", b.outlier_trials}});
    }
    nlohmann::json doc{
        {"variant", report.variant},
        {"summary",
         {{"n_trials", report.summary.n_trials},
          {"n_ok", report.summary.n_ok},
          {"n_failed", report.summary.n_failed},
          {"median_rmse_bps", json_optional(report.summary.median_rmse_bps)},
          {"mean_rmse_bps", json_optional(report.summary.mean_rmse_bps)},
          {"median_mape_pct", json_optional(report.summary.median_mape_pct)},
          {"mean_mape_pct", json_optional(report.summary.mean_mape_pct)}}},
        {"bins", bins},
        {"trials", trials},
    };
    return doc.dump(2) + "\n";
}

std::string trials_to_csv(const EvaluationReport& report) {
    std::ostringstream out;
    out << "issuer,sparsity,rmse_bps,mape_pct,n_queries,n_similars,status\n";
    for (const IssuerTrial& t : report.trials) {
        out << t.issuer_id << ',' << detail::format_double(t.sparsity) << ','
            << csv_optional(t.rmse_bps) << ',' << csv_optional(t.mape_pct) << ',' << t.n_queries
            << ',' << t.n_similars << ',' << to_string(t.status) << '\n';
    }
    return out.str();
}

std::string bins_to_csv(const EvaluationReport& report) {
    std::ostringstream out;
    out << "bin_lo,bin_hi,median,q1,q3,whisker_lo,whisker_hi,n\n";
    for (const SparsityBin& b : report.bins) {
        out << detail::format_double(b.lo) << ',' << detail::format_double(b.hi) << ','
            << detail::format_double(b.median_rmse) << ',' << detail::format_double(b.q1) << ','
            << detail::format_double(b.q3) << ',' << detail::format_double(b.whisker_lo) << ','
            << detail::format_double(b.whisker_hi) << ',' << b.n << '\n';
    }
    return out.str();
}

std::string comparison_to_csv(const BenchmarkResult& result) {
    std::ostringstream out;
    out << "variant,median_rmse_bps,mean_rmse_bps,median_mape_pct,mean_mape_pct,n_ok,n_failed\n";
    for (const ComparisonRow& row : result.comparison) {
        out << row.variant << ',' << csv_optional(row.median_rmse_bps) << ','
            << csv_optional(row.mean_rmse_bps) << ',' << csv_optional(row.median_mape_pct) << ','
            << csv_optional(row.mean_mape_pct) << ',' << row.n_ok << ',' << row.n_failed << '\n';
    }
    return out.str();
}

std::string comparison_to_text(const BenchmarkResult& result) {
    std::ostringstream out;
    auto cell = [](const std::optional<double>& v) {
        if (!v) return std::string("-");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", *v);
        return std::string(buf);
    };
    out << "variant       median_rmse  mean_rmse  median_mape  mean_mape  ok  failed\n";
    for (const ComparisonRow& row : result.comparison) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-13s %11s %10s %12s %10s %3zu %7zu\n",
                      row.variant.c_str(), cell(row.median_rmse_bps).c_str(),
                      cell(row.mean_rmse_bps).c_str(), cell(row.median_mape_pct).c_str(),
                      cell(row.mean_mape_pct).c_str(), row.n_ok, row.n_failed);
        out << line;
    }
    return out.str();
}

}  // namespace bondkit
