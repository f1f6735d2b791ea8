#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bondkit/catalog.hpp"
#include "bondkit/evaluation.hpp"
#include "bondkit/filters.hpp"
#include "bondkit/search.hpp"
#include "bondkit/synthetic.hpp"

namespace bondkit {

/// Where category vectors come from: a file in the documented TSV format, or
/// a synthetic store drawn on the hierarchy inferred from the catalog.
struct VectorSourceConfig {
    std::string path;  // empty when synthetic
    bool synthetic = false;
    std::size_t dimension = 32;
    double epsilon = 0.3;
    std::optional<std::uint64_t> seed;  // defaults to the run seed
};

/// Parsed run-configuration file (JSON). The schema is strict: unknown keys
/// anywhere are rejected before any pipeline work.
struct RunConfig {
    std::string catalog_path;
    CatalogFormat catalog_format = CatalogFormat::Csv;
    std::optional<VectorSourceConfig> vectors;
    std::optional<std::string> rating_scale_path;

    FeatureWeights weights = FeatureWeights::uniform();
    FilterConfig filters;
    std::size_t k = 5;

    std::vector<VariantKind> variants = {VariantKind::XEmbedding};
    std::vector<FeatureName> rules = {FeatureName::IssuerIndustry, FeatureName::IndustryGroup};
    std::size_t shortlist_size = 0;
    bool exclude_query_issuer = false;
    bool profile_use_maturity = true;
    bool profile_use_rating = true;

    std::size_t min_bonds = 8;
    std::vector<double> drop_fractions = {0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85};
    std::vector<std::size_t> drop_counts;
    std::size_t n_bins = 10;
    SparsityMode sparsity_mode = SparsityMode::Complement;
    int threads = 1;

    std::uint64_t seed = 42;
    std::string output_dir = "out";

    std::optional<SyntheticConfig> synthetic;  // drives the generate command
};

/// Throws ParseError on malformed JSON and InvalidConfig on schema
/// violations (unknown keys, wrong types, bad values).
RunConfig load_run_config(const std::string& path);

RunConfig parse_run_config(const std::string& json_text);

}  // namespace bondkit
