// bondkit — bond similarity search and spread-curve toolkit.
//
// Subcommands: ingest, generate, search, augment, fit, evaluate, benchmark,
// project. Exit codes: 0 success, 1 validation/runtime error, 2 config error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bondkit/catalog.hpp"
#include "bondkit/config.hpp"
#include "bondkit/curve.hpp"
#include "bondkit/embedding.hpp"
#include "bondkit/errors.hpp"
#include "bondkit/evaluation.hpp"
#include "bondkit/filters.hpp"
#include "bondkit/rng.hpp"
#include "bondkit/search.hpp"
#include "bondkit/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct GlobalArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    bool verbose = false;
};

// problems with the config file or command usage; mapped to exit code 2
struct UsageError {
    std::string message;
};

void note(const GlobalArgs& args, const std::string& message) {
    if (args.verbose) std::cerr << "[bondkit] " << message << "\n";
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
    fs::create_directories(dir);
    const fs::path path = fs::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw bondkit::Error(bondkit::ErrorCode::IoError, "cannot write " + path.string());
    out << content;
}

// config-file problems exit 2; runtime validation after it exits 1
bondkit::RunConfig require_config(const GlobalArgs& args) {
    if (args.config_path.empty()) throw UsageError{"this command needs --config"};
    bondkit::RunConfig cfg;
    try {
        cfg = bondkit::load_run_config(args.config_path);
    } catch (const bondkit::Error& e) {
        throw UsageError{e.what()};
    }
    if (args.seed) cfg.seed = *args.seed;
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    return cfg;
}

bondkit::RatingScale scale_from(const bondkit::RunConfig& cfg) {
    if (cfg.rating_scale_path) return bondkit::RatingScale::from_file(*cfg.rating_scale_path);
    return bondkit::RatingScale::standard();
}

bondkit::Catalog catalog_from(const bondkit::RunConfig& cfg, const bondkit::RatingScale& scale) {
    if (cfg.catalog_path.empty())
        throw bondkit::Error(bondkit::ErrorCode::InvalidArgument, "config has no catalog path");
    return bondkit::load_catalog(cfg.catalog_path, cfg.catalog_format, scale);
}

std::optional<bondkit::VectorStore> store_from(const bondkit::RunConfig& cfg,
                                               const bondkit::Catalog& catalog) {
    if (!cfg.vectors) return std::nullopt;
    if (!cfg.vectors->synthetic) return bondkit::load_vector_store(cfg.vectors->path);
    const std::uint64_t seed = cfg.vectors->seed ? *cfg.vectors->seed
                                                 : bondkit::derive_seed(cfg.seed, "vectors");
    return bondkit::synthetic_embeddings(bondkit::hierarchy_from_catalog(catalog),
                                         cfg.vectors->dimension, seed, cfg.vectors->epsilon);
}

bondkit::ModelVariant make_variant(const bondkit::RunConfig& cfg, bondkit::VariantKind kind,
                                   const bondkit::RatingScale& scale) {
    bondkit::ModelVariant v;
    v.kind = kind;
    v.weights = cfg.weights;
    v.rules = cfg.rules;
    v.shortlist_size = cfg.shortlist_size;
    v.exclude_query_issuer = cfg.exclude_query_issuer;
    v.profile.use_maturity = cfg.profile_use_maturity;
    v.profile.use_rating = cfg.profile_use_rating;
    v.profile.scale = scale;
    return v;
}

bondkit::EvaluationProtocol protocol_from(const bondkit::RunConfig& cfg,
                                          const bondkit::RatingScale& scale) {
    bondkit::EvaluationProtocol p;
    p.min_bonds = cfg.min_bonds;
    p.drop_fractions = cfg.drop_fractions;
    p.drop_counts = cfg.drop_counts;
    p.k = cfg.k;
    p.n_bins = cfg.n_bins;
    p.sparsity_mode = cfg.sparsity_mode;
    p.filters = cfg.filters;
    p.scale = scale;
    p.threads = cfg.threads;
    return p;
}

const bondkit::VectorStore* store_ptr(const std::optional<bondkit::VectorStore>& store) {
    return store ? &*store : nullptr;
}

// ---------------------------------------------------------------------------

int cmd_ingest(const GlobalArgs& args, const std::string& catalog_arg,
               const std::string& format_arg) {
    bondkit::RunConfig cfg;
    bondkit::RatingScale scale = bondkit::RatingScale::standard();
    if (!args.config_path.empty()) {
        cfg = require_config(args);
        scale = scale_from(cfg);
    }
    if (!catalog_arg.empty()) cfg.catalog_path = catalog_arg;
    if (!format_arg.empty()) {
        if (format_arg == "csv") cfg.catalog_format = bondkit::CatalogFormat::Csv;
        else if (format_arg == "json") cfg.catalog_format = bondkit::CatalogFormat::Json;
        else throw UsageError{"--format must be csv or json"};
    }
    if (cfg.catalog_path.empty())
        throw UsageError{"ingest needs --catalog or a config with a catalog path"};

    try {
        const bondkit::Catalog catalog =
            bondkit::load_catalog(cfg.catalog_path, cfg.catalog_format, scale);
        json histogram = json::object();
        for (const auto& [count, issuers] : catalog.density_histogram())
            histogram[std::to_string(count)] = issuers;
        json summary{{"path", cfg.catalog_path},
                     {"bonds", catalog.size()},
                     {"issuers", catalog.issuer_count()},
                     {"density_histogram", histogram}};
        std::cout << summary.dump(2) << "\n";
        return kExitOk;
    } catch (const bondkit::CatalogLoadError& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (const auto& issue : e.issues())
            std::cerr << "  row " << issue.line << " [" << issue.field << "]: " << issue.detail
                      << "\n";
        return kExitRuntime;
    }
}

int cmd_generate(const GlobalArgs& args) {
    bondkit::RunConfig cfg = require_config(args);
    const bondkit::SyntheticConfig synth = cfg.synthetic.value_or(bondkit::SyntheticConfig{});
    note(args, "generating synthetic catalog");
    const bondkit::SyntheticBundle bundle = bondkit::generate_synthetic_bundle(synth, cfg.seed);

    write_file(cfg.output_dir, "catalog.csv", bondkit::catalog_to_csv(bundle.catalog));
    {
        fs::create_directories(cfg.output_dir);
        bondkit::save_vector_store(bundle.store, (fs::path(cfg.output_dir) / "vectors.tsv").string());
    }
    json summary{{"bonds", bundle.catalog.size()},
                 {"issuers", bundle.catalog.issuer_count()},
                 {"embedding_dim", synth.embedding_dim},
                 {"seed", cfg.seed},
                 {"catalog", (fs::path(cfg.output_dir) / "catalog.csv").string()},
                 {"vectors", (fs::path(cfg.output_dir) / "vectors.tsv").string()}};
    write_file(cfg.output_dir, "generate_manifest.json", summary.dump(2) + "\n");
    std::cout << summary.dump(2) << "\n";
    return kExitOk;
}

int cmd_search(const GlobalArgs& args, const std::string& query_id, std::size_t k_arg,
               const std::string& variant_arg) {
    bondkit::RunConfig cfg = require_config(args);
    const bondkit::RatingScale scale = scale_from(cfg);
    const bondkit::Catalog catalog = catalog_from(cfg, scale);
    const auto store = store_from(cfg, catalog);

    const bondkit::VariantKind kind =
        variant_arg.empty() ? cfg.variants.front() : bondkit::variant_from_string(variant_arg);
    const bondkit::ModelVariant variant = make_variant(cfg, kind, scale);
    const std::size_t k = k_arg > 0 ? k_arg : cfg.k;

    const bondkit::Bond& query = catalog.bond(query_id);  // UnknownBond -> exit 1
    const bondkit::SimilarityResult result =
        bondkit::variant_search(query, catalog, variant, store_ptr(store), k);

    write_file(cfg.output_dir, "search_" + query_id + ".json", bondkit::result_to_json(result));
    write_file(cfg.output_dir, "search_" + query_id + ".csv", bondkit::result_to_csv(result));
    std::cout << bondkit::result_to_json(result);
    return kExitOk;
}

int cmd_augment(const GlobalArgs& args, const std::string& issuer_id) {
    bondkit::RunConfig cfg = require_config(args);
    const bondkit::RatingScale scale = scale_from(cfg);
    const bondkit::Catalog catalog = catalog_from(cfg, scale);
    const auto store = store_from(cfg, catalog);
    const bondkit::ModelVariant variant = make_variant(cfg, cfg.variants.front(), scale);

    // union of per-query filtered top-k over the issuer's own bonds
    const std::vector<std::string>& own = catalog.issuer_bond_ids(issuer_id);
    std::map<std::string, double> peers;
    for (const std::string& query_id : own) {
        const bondkit::Bond& query = catalog.bond(query_id);
        bondkit::SimilarityResult ranking;
        try {
            ranking = bondkit::variant_search(query, catalog, variant, store_ptr(store), SIZE_MAX);
        } catch (const bondkit::Error& e) {
            if (e.code() == bondkit::ErrorCode::EmptyCandidateSet) continue;
            throw;
        }
        const auto kept = bondkit::apply_filters(query, ranking.ranked, catalog, scale, cfg.filters);
        for (std::size_t i = 0; i < std::min(cfg.k, kept.size()); ++i) {
            auto [it, inserted] = peers.emplace(kept[i].bond_id, kept[i].score);
            if (!inserted) it->second = std::max(it->second, kept[i].score);
        }
    }

    std::vector<bondkit::Bond> rows;
    json peer_list = json::array();
    for (const std::string& id : own) rows.push_back(catalog.bond(id));
    for (const auto& [id, score] : peers) {
        if (std::find(own.begin(), own.end(), id) != own.end()) continue;
        rows.push_back(catalog.bond(id));
        peer_list.push_back({{"bond_id", id}, {"score", score}});
    }
    const bondkit::Catalog augmented = bondkit::Catalog::from_bonds(std::move(rows), scale);
    write_file(cfg.output_dir, "augmented_" + issuer_id + ".csv",
               bondkit::catalog_to_csv(augmented));
    json summary{{"issuer", issuer_id},
                 {"own_bonds", own},
                 {"peers", peer_list},
                 {"rows", augmented.size()}};
    write_file(cfg.output_dir, "augmented_" + issuer_id + ".json", summary.dump(2) + "\n");
    std::cout << summary.dump(2) << "\n";
    return kExitOk;
}

int cmd_fit(const GlobalArgs& args, const std::string& issuer_id, bool augment) {
    bondkit::RunConfig cfg = require_config(args);
    const bondkit::RatingScale scale = scale_from(cfg);
    const bondkit::Catalog catalog = catalog_from(cfg, scale);

    std::vector<bondkit::CurvePoint> points;
    for (const std::string& id : catalog.issuer_bond_ids(issuer_id)) {
        const bondkit::Bond& b = catalog.bond(id);
        points.push_back({b.maturity_years, b.spread_bps});
    }
    if (augment) {
        const auto store = store_from(cfg, catalog);
        const bondkit::ModelVariant variant = make_variant(cfg, cfg.variants.front(), scale);
        std::map<std::string, double> peers;
        for (const std::string& query_id : catalog.issuer_bond_ids(issuer_id)) {
            const bondkit::Bond& query = catalog.bond(query_id);
            bondkit::SimilarityResult ranking;
            try {
                ranking =
                    bondkit::variant_search(query, catalog, variant, store_ptr(store), SIZE_MAX);
            } catch (const bondkit::Error& e) {
                if (e.code() == bondkit::ErrorCode::EmptyCandidateSet) continue;
                throw;
            }
            const auto kept =
                bondkit::apply_filters(query, ranking.ranked, catalog, scale, cfg.filters);
            for (std::size_t i = 0; i < std::min(cfg.k, kept.size()); ++i)
                peers.emplace(kept[i].bond_id, kept[i].score);
        }
        for (const auto& [id, _] : peers) {
            const bondkit::Bond& b = catalog.bond(id);
            if (b.issuer_id == issuer_id) continue;
            points.push_back({b.maturity_years, b.spread_bps});
        }
    }

    const bondkit::CurveFit fit = bondkit::fit_ns(points);
    write_file(cfg.output_dir, "curve_" + issuer_id + ".csv",
               bondkit::curve_to_csv(bondkit::sample_curve(fit.params)));
    json summary{{"issuer", issuer_id},
                 {"n_points", fit.n_points},
                 {"beta0", fit.params.beta0},
                 {"beta1", fit.params.beta1},
                 {"beta2", fit.params.beta2},
                 {"lambda", fit.params.lambda},
                 {"in_sample_rmse_bps", fit.in_sample_rmse_bps}};
    write_file(cfg.output_dir, "fit_" + issuer_id + ".json", summary.dump(2) + "\n");
    std::cout << summary.dump(2) << "\n";
    return kExitOk;
}

void write_report_files(const std::string& out_dir, const std::string& stem,
                        const bondkit::EvaluationReport& report) {
    write_file(out_dir, "report_" + stem + ".json", bondkit::report_to_json(report));
    write_file(out_dir, "trials_" + stem + ".csv", bondkit::trials_to_csv(report));
    write_file(out_dir, "bins_" + stem + ".csv", bondkit::bins_to_csv(report));
}

int cmd_evaluate(const GlobalArgs& args, int threads_arg) {
    bondkit::RunConfig cfg = require_config(args);
    if (cfg.variants.size() != 1)
        throw UsageError{"evaluate needs exactly one variant; use benchmark for several"};
    const bondkit::RatingScale scale = scale_from(cfg);
    const bondkit::Catalog catalog = catalog_from(cfg, scale);
    const auto store = store_from(cfg, catalog);
    bondkit::EvaluationProtocol protocol = protocol_from(cfg, scale);
    if (threads_arg > 0) protocol.threads = threads_arg;
    const bondkit::ModelVariant variant = make_variant(cfg, cfg.variants.front(), scale);

    note(args, "running evaluation");
    const bondkit::EvaluationReport report =
        bondkit::run_evaluation(catalog, variant, store_ptr(store), protocol, cfg.seed);
    write_report_files(cfg.output_dir, report.variant, report);

    std::size_t warn = 0;
    for (const auto& t : report.trials)
        if (t.status != bondkit::TrialStatus::Ok && t.status != bondkit::TrialStatus::NoHoldout)
            ++warn;
    if (warn > 0) std::cerr << "warning: " << warn << " failed trial(s) recorded\n";
    json summary{{"variant", report.variant},
                 {"n_trials", report.summary.n_trials},
                 {"n_ok", report.summary.n_ok},
                 {"n_failed", report.summary.n_failed}};
    if (report.summary.median_rmse_bps) summary["median_rmse_bps"] = *report.summary.median_rmse_bps;
    if (report.summary.mean_rmse_bps) summary["mean_rmse_bps"] = *report.summary.mean_rmse_bps;
    std::cout << summary.dump(2) << "\n";
    return kExitOk;
}

int cmd_benchmark(const GlobalArgs& args, int threads_arg) {
    bondkit::RunConfig cfg = require_config(args);
    if (cfg.variants.size() < 2)
        throw UsageError{"benchmark needs at least two variants in the config"};
    const bondkit::RatingScale scale = scale_from(cfg);
    const bondkit::Catalog catalog = catalog_from(cfg, scale);
    const auto store = store_from(cfg, catalog);
    bondkit::EvaluationProtocol protocol = protocol_from(cfg, scale);
    if (threads_arg > 0) protocol.threads = threads_arg;

    std::vector<bondkit::ModelVariant> variants;
    variants.reserve(cfg.variants.size());
    for (bondkit::VariantKind kind : cfg.variants) variants.push_back(make_variant(cfg, kind, scale));

    note(args, "running benchmark over " + std::to_string(variants.size()) + " variants");
    const bondkit::BenchmarkResult result =
        bondkit::benchmark(catalog, variants, store_ptr(store), protocol, cfg.seed);

    for (std::size_t i = 0; i < result.reports.size(); ++i) {
        const std::string stem = std::to_string(i + 1) + "_" + result.reports[i].variant;
        write_report_files(cfg.output_dir, stem, result.reports[i]);
    }
    write_file(cfg.output_dir, "comparison.csv", bondkit::comparison_to_csv(result));
    std::size_t warn = 0;
    for (const auto& r : result.reports) warn += r.summary.n_failed;
    if (warn > 0) std::cerr << "warning: " << warn << " failed trial(s) recorded\n";
    std::cout << bondkit::comparison_to_text(result);
    return kExitOk;
}

int cmd_project(const GlobalArgs& args, const std::string& feature_arg,
                const std::string& reference, const std::string& method_arg) {
    bondkit::RunConfig cfg = require_config(args);
    const bondkit::RatingScale scale = scale_from(cfg);
    if (!cfg.vectors)
        throw bondkit::Error(bondkit::ErrorCode::InvalidConfig, "project needs a vectors section");
    std::optional<bondkit::VectorStore> store;
    if (cfg.vectors->synthetic) {
        store = store_from(cfg, catalog_from(cfg, scale));
    } else {
        store = bondkit::load_vector_store(cfg.vectors->path);
    }

    const bondkit::FeatureName feature = bondkit::feature_from_string(feature_arg);
    bondkit::ProjectionMethod method = bondkit::ProjectionMethod::Pca;
    if (method_arg == "first_dims") method = bondkit::ProjectionMethod::FirstDims;
    else if (!method_arg.empty() && method_arg != "pca")
        throw UsageError{"--method must be pca or first_dims"};

    const bondkit::Projection2D projection = bondkit::project_2d(*store, feature, reference, method);
    write_file(cfg.output_dir, "projection_" + feature_arg + ".csv",
               bondkit::projection_to_csv(projection));
    std::cout << "wrote " << (fs::path(cfg.output_dir) / ("projection_" + feature_arg + ".csv")).string()
              << " (" << projection.points.size() << " categories)\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bond similarity search and spread-curve toolkit"};
    app.require_subcommand(1);

    GlobalArgs args;
    auto add_globals = [&](CLI::App* cmd) {
        cmd->add_option("--config", args.config_path, "run configuration file (JSON)");
        cmd->add_option("--seed", args.seed, "override the config seed");
        cmd->add_option("--out", args.out_dir, "override the output directory");
        cmd->add_flag("--verbose", args.verbose, "progress notes on stderr");
    };
    add_globals(&app);

    auto* ingest = app.add_subcommand("ingest", "validate a catalog and print a summary");
    add_globals(ingest);
    std::string catalog_arg, format_arg;
    ingest->add_option("--catalog", catalog_arg, "catalog file");
    ingest->add_option("--format", format_arg, "csv or json");

    auto* generate = app.add_subcommand("generate", "write a synthetic catalog and vector store");
    add_globals(generate);

    auto* search = app.add_subcommand("search", "rank peers for a query bond");
    add_globals(search);
    std::string query_id, variant_arg;
    std::size_t k_arg = 0;
    search->add_option("--query", query_id, "query bond id")->required();
    search->add_option("--k", k_arg, "number of neighbors");
    search->add_option("--variant", variant_arg, "model variant");

    auto* augment = app.add_subcommand("augment", "write an issuer's augmented catalog");
    add_globals(augment);
    std::string issuer_arg;
    augment->add_option("--issuer", issuer_arg, "issuer id")->required();

    auto* fit = app.add_subcommand("fit", "fit a spread curve for one issuer");
    add_globals(fit);
    std::string fit_issuer;
    bool fit_augment = false;
    fit->add_option("--issuer", fit_issuer, "issuer id")->required();
    fit->add_flag("--augment", fit_augment, "include retrieved peers in the fit");

    auto* evaluate = app.add_subcommand("evaluate", "run the sparsity evaluation for one variant");
    add_globals(evaluate);
    int threads_arg = 0;
    evaluate->add_option("--threads", threads_arg, "worker threads");

    auto* bench = app.add_subcommand("benchmark", "compare variants under identical draws");
    add_globals(bench);
    int bench_threads = 0;
    bench->add_option("--threads", bench_threads, "worker threads");

    auto* project = app.add_subcommand("project", "2-D projection of one feature's embeddings");
    add_globals(project);
    std::string feature_arg, reference_arg, method_arg;
    project->add_option("--feature", feature_arg, "feature name")->required();
    project->add_option("--reference", reference_arg, "reference category")->required();
    project->add_option("--method", method_arg, "pca or first_dims");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(args, catalog_arg, format_arg);
        if (generate->parsed()) return cmd_generate(args);
        if (search->parsed()) return cmd_search(args, query_id, k_arg, variant_arg);
        if (augment->parsed()) return cmd_augment(args, issuer_arg);
        if (fit->parsed()) return cmd_fit(args, fit_issuer, fit_augment);
        if (evaluate->parsed()) return cmd_evaluate(args, threads_arg);
        if (bench->parsed()) return cmd_benchmark(args, bench_threads);
        if (project->parsed()) return cmd_project(args, feature_arg, reference_arg, method_arg);
    } catch (const bondkit::CatalogLoadError& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (const auto& issue : e.issues())
            std::cerr << "  row " << issue.line << " [" << issue.field << "]: " << issue.detail
                      << "\n";
        return kExitRuntime;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.message << "\n";
        return kExitConfig;
    } catch (const bondkit::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}
