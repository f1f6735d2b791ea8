#include "bondkit/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bondkit/errors.hpp"

namespace bondkit {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& context, const std::string& what) {
    throw Error(ErrorCode::InvalidConfig, context + ": " + what);
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& context) {
    if (!obj.is_object()) bad(context, "expected an object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) bad(context, "unknown key '" + key + "'");
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& context) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        bad(context, std::string("bad value for '") + key + "'");
    }
}

std::optional<double> get_opt_double(const json& obj, const char* key, const std::string& context) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) bad(context, std::string("'") + key + "' must be a number or null");
    return it->get<double>();
}

void parse_filters(const json& obj, FilterConfig& filters) {
    const std::string ctx = "filters";
    check_keys(obj,
               {"enforce_currency", "maturity_lower_years", "maturity_upper_years",
                "maturity_mode", "rating_tolerance_notches"},
               ctx);
    filters.enforce_currency = get_or(obj, "enforce_currency", filters.enforce_currency, ctx);
    filters.maturity_lower_years = get_opt_double(obj, "maturity_lower_years", ctx);
    filters.maturity_upper_years = get_opt_double(obj, "maturity_upper_years", ctx);
    if (obj.contains("maturity_mode")) {
        const std::string mode = obj["maturity_mode"].get<std::string>();
        if (mode == "relative") filters.maturity_mode = MaturityWindowMode::RelativeToQuery;
        else if (mode == "absolute") filters.maturity_mode = MaturityWindowMode::Absolute;
        else bad(ctx, "maturity_mode must be 'relative' or 'absolute'");
    }
    if (obj.contains("rating_tolerance_notches") && !obj["rating_tolerance_notches"].is_null()) {
        if (!obj["rating_tolerance_notches"].is_number_integer())
            bad(ctx, "rating_tolerance_notches must be an integer or null");
        filters.rating_tolerance_notches = obj["rating_tolerance_notches"].get<int>();
    } else if (obj.contains("rating_tolerance_notches")) {
        filters.rating_tolerance_notches.reset();
    }
    filters.validate();
}

void parse_vectors(const json& obj, RunConfig& cfg) {
    const std::string ctx = "vectors";
    check_keys(obj, {"path", "synthetic"}, ctx);
    VectorSourceConfig v;
    const bool has_path = obj.contains("path") && !obj["path"].is_null();
    const bool has_synth = obj.contains("synthetic") && !obj["synthetic"].is_null();
    if (has_path == has_synth) bad(ctx, "specify exactly one of 'path' or 'synthetic'");
    if (has_path) {
        v.path = obj["path"].get<std::string>();
    } else {
        v.synthetic = true;
        const json& s = obj["synthetic"];
        check_keys(s, {"dimension", "epsilon", "seed"}, "vectors.synthetic");
        v.dimension = get_or<std::size_t>(s, "dimension", v.dimension, ctx);
        v.epsilon = get_or<double>(s, "epsilon", v.epsilon, ctx);
        if (s.contains("seed") && !s["seed"].is_null())
            v.seed = s["seed"].get<std::uint64_t>();
        if (v.dimension < 2) bad(ctx, "synthetic dimension must be at least 2");
        if (v.epsilon < 0.0) bad(ctx, "synthetic epsilon must be nonnegative");
    }
    cfg.vectors = v;
}

void parse_weights(const json& obj, RunConfig& cfg) {
    std::map<FeatureName, double> w;
    for (const auto& [key, value] : obj.items()) {
        FeatureName f;
        try {
            f = feature_from_string(key);
        } catch (const Error&) {
            bad("weights", "unknown feature '" + key + "'");
        }
        if (!value.is_number()) bad("weights", "weight for '" + key + "' must be a number");
        w[f] = value.get<double>();
    }
    try {
        cfg.weights = FeatureWeights::from_map(w);
    } catch (const Error& e) {
        bad("weights", e.what());
    }
}

void parse_evaluation(const json& obj, RunConfig& cfg) {
    const std::string ctx = "evaluation";
    check_keys(obj,
               {"min_bonds", "drop_fractions", "drop_counts", "bins", "sparsity_mode", "threads"},
               ctx);
    cfg.min_bonds = get_or<std::size_t>(obj, "min_bonds", cfg.min_bonds, ctx);
    if (obj.contains("drop_fractions"))
        cfg.drop_fractions = obj["drop_fractions"].get<std::vector<double>>();
    if (obj.contains("drop_counts"))
        cfg.drop_counts = obj["drop_counts"].get<std::vector<std::size_t>>();
    cfg.n_bins = get_or<std::size_t>(obj, "bins", cfg.n_bins, ctx);
    if (obj.contains("sparsity_mode")) {
        const std::string mode = obj["sparsity_mode"].get<std::string>();
        if (mode == "complement") cfg.sparsity_mode = SparsityMode::Complement;
        else if (mode == "paper_formula") cfg.sparsity_mode = SparsityMode::PaperFormula;
        else bad(ctx, "sparsity_mode must be 'complement' or 'paper_formula'");
    }
    cfg.threads = get_or<int>(obj, "threads", cfg.threads, ctx);
    if (cfg.threads < 1) bad(ctx, "threads must be positive");
}

void parse_variant_options(const json& obj, RunConfig& cfg) {
    const std::string ctx = "variant_options";
    check_keys(obj, {"rules", "shortlist_size", "exclude_query_issuer", "profile"}, ctx);
    if (obj.contains("rules")) {
        cfg.rules.clear();
        for (const auto& r : obj["rules"]) {
            try {
                cfg.rules.push_back(feature_from_string(r.get<std::string>()));
            } catch (const Error&) {
                bad(ctx, "unknown rule feature");
            }
        }
        if (cfg.rules.empty()) bad(ctx, "rules must not be empty");
    }
    cfg.shortlist_size = get_or<std::size_t>(obj, "shortlist_size", cfg.shortlist_size, ctx);
    cfg.exclude_query_issuer =
        get_or<bool>(obj, "exclude_query_issuer", cfg.exclude_query_issuer, ctx);
    if (obj.contains("profile")) {
        const json& p = obj["profile"];
        check_keys(p, {"use_maturity", "use_rating"}, "variant_options.profile");
        cfg.profile_use_maturity = get_or<bool>(p, "use_maturity", true, ctx);
        cfg.profile_use_rating = get_or<bool>(p, "use_rating", true, ctx);
        if (!cfg.profile_use_maturity && !cfg.profile_use_rating)
            bad(ctx, "numerical profile needs at least one component");
    }
}

void parse_synthetic(const json& obj, RunConfig& cfg) {
    const std::string ctx = "synthetic_catalog";
    check_keys(obj,
               {"n_issuers", "bonds_per_issuer", "n_sectors", "groups_per_sector",
                "subgroups_per_group", "n_regions", "countries_per_region", "n_market_types",
                "maturity_min_years", "maturity_max_years", "noise_sigma_bps", "group_sigma_bps",
                "subgroup_sigma_bps", "issuer_sigma_bps", "region_shift_bps", "country_sigma_bps",
                "market_sigma_bps", "rating_noise_notches", "alt_currency_fraction", "alt_currency_basis_bps", "base_currency", "alt_currency",
                "observation_date", "embedding_dim", "embedding_epsilon"},
               ctx);
    SyntheticConfig s;
    s.n_issuers = get_or<int>(obj, "n_issuers", s.n_issuers, ctx);
    s.bonds_per_issuer = get_or<int>(obj, "bonds_per_issuer", s.bonds_per_issuer, ctx);
    s.n_sectors = get_or<int>(obj, "n_sectors", s.n_sectors, ctx);
    s.groups_per_sector = get_or<int>(obj, "groups_per_sector", s.groups_per_sector, ctx);
    s.subgroups_per_group = get_or<int>(obj, "subgroups_per_group", s.subgroups_per_group, ctx);
    s.n_regions = get_or<int>(obj, "n_regions", s.n_regions, ctx);
    s.countries_per_region = get_or<int>(obj, "countries_per_region", s.countries_per_region, ctx);
    s.n_market_types = get_or<int>(obj, "n_market_types", s.n_market_types, ctx);
    s.maturity_min_years = get_or<double>(obj, "maturity_min_years", s.maturity_min_years, ctx);
    s.maturity_max_years = get_or<double>(obj, "maturity_max_years", s.maturity_max_years, ctx);
    s.noise_sigma_bps = get_or<double>(obj, "noise_sigma_bps", s.noise_sigma_bps, ctx);
    s.group_sigma_bps = get_or<double>(obj, "group_sigma_bps", s.group_sigma_bps, ctx);
    s.subgroup_sigma_bps = get_or<double>(obj, "subgroup_sigma_bps", s.subgroup_sigma_bps, ctx);
    s.issuer_sigma_bps = get_or<double>(obj, "issuer_sigma_bps", s.issuer_sigma_bps, ctx);
    s.region_shift_bps = get_or<double>(obj, "region_shift_bps", s.region_shift_bps, ctx);
    s.country_sigma_bps = get_or<double>(obj, "country_sigma_bps", s.country_sigma_bps, ctx);
    s.market_sigma_bps = get_or<double>(obj, "market_sigma_bps", s.market_sigma_bps, ctx);
    s.rating_noise_notches =
        get_or<double>(obj, "rating_noise_notches", s.rating_noise_notches, ctx);
    s.alt_currency_fraction =
        get_or<double>(obj, "alt_currency_fraction", s.alt_currency_fraction, ctx);
    s.alt_currency_basis_bps =
        get_or<double>(obj, "alt_currency_basis_bps", s.alt_currency_basis_bps, ctx);
    s.base_currency = get_or<std::string>(obj, "base_currency", s.base_currency, ctx);
    s.alt_currency = get_or<std::string>(obj, "alt_currency", s.alt_currency, ctx);
    s.observation_date = get_or<std::string>(obj, "observation_date", s.observation_date, ctx);
    s.embedding_dim = get_or<int>(obj, "embedding_dim", s.embedding_dim, ctx);
    s.embedding_epsilon = get_or<double>(obj, "embedding_epsilon", s.embedding_epsilon, ctx);
    try {
        s.validate();
    } catch (const Error& e) {
        bad(ctx, e.what());
    }
    cfg.synthetic = s;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(doc,
               {"catalog", "vectors", "rating_scale_path", "weights", "filters", "k", "variant",
                "variants", "variant_options", "evaluation", "seed", "output_dir",
                "synthetic_catalog"},
               "config");

    RunConfig cfg;
    if (doc.contains("catalog")) {
        const json& c = doc["catalog"];
        check_keys(c, {"path", "format"}, "catalog");
        cfg.catalog_path = get_or<std::string>(c, "path", "", "catalog");
        const std::string format = get_or<std::string>(c, "format", "csv", "catalog");
        if (format == "csv") cfg.catalog_format = CatalogFormat::Csv;
        else if (format == "json") cfg.catalog_format = CatalogFormat::Json;
        else bad("catalog", "format must be 'csv' or 'json'");
    }
    if (doc.contains("vectors")) parse_vectors(doc["vectors"], cfg);
    if (doc.contains("rating_scale_path") && !doc["rating_scale_path"].is_null())
        cfg.rating_scale_path = doc["rating_scale_path"].get<std::string>();
    if (doc.contains("weights")) parse_weights(doc["weights"], cfg);
    if (doc.contains("filters")) parse_filters(doc["filters"], cfg.filters);
    cfg.k = get_or<std::size_t>(doc, "k", cfg.k, "config");
    if (cfg.k < 1) bad("config", "k must be positive");

    if (doc.contains("variant") && doc.contains("variants"))
        bad("config", "specify either 'variant' or 'variants', not both");
    if (doc.contains("variant"))
        cfg.variants = {variant_from_string(doc["variant"].get<std::string>())};
    if (doc.contains("variants")) {
        cfg.variants.clear();
        for (const auto& v : doc["variants"])
            cfg.variants.push_back(variant_from_string(v.get<std::string>()));
        if (cfg.variants.empty()) bad("config", "variants must not be empty");
    }
    if (doc.contains("variant_options")) parse_variant_options(doc["variant_options"], cfg);
    if (doc.contains("evaluation")) parse_evaluation(doc["evaluation"], cfg);
    cfg.seed = get_or<std::uint64_t>(doc, "seed", cfg.seed, "config");
    cfg.output_dir = get_or<std::string>(doc, "output_dir", cfg.output_dir, "config");
    if (doc.contains("synthetic_catalog")) parse_synthetic(doc["synthetic_catalog"], cfg);
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config(buffer.str());
}

}  // namespace bondkit
