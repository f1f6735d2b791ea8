#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "bondkit/catalog.hpp"
#include "bondkit/curve.hpp"
#include "bondkit/embedding.hpp"
#include "bondkit/hierarchy.hpp"

namespace bondkit {

/// Desk-scale synthetic catalog: a sector -> group -> subgroup industry tree
/// plus region -> country geography, with each issuer's spread curve drawn as
/// its sector's Nelson-Siegel base plus progressively smaller group, subgroup
/// and issuer perturbations. Closeness in the category tree therefore implies
/// closeness of curves, which is the property the retrieval models are
/// benchmarked on. Spreads observe NS(latent, tau) + N(0, noise_sigma).
struct SyntheticConfig {
    int n_issuers = 250;
    int bonds_per_issuer = 10;

    int n_sectors = 5;
    int groups_per_sector = 5;
    int subgroups_per_group = 8;  // > issuers per group / 2 leaves most subgroups singleton
    int n_regions = 4;
    int countries_per_region = 5;
    int n_market_types = 4;

    double maturity_min_years = 0.5;
    double maturity_max_years = 30.0;
    double noise_sigma_bps = 2.0;

    // sector-level base curve ranges
    double sector_level_lo_bps = 80.0, sector_level_hi_bps = 300.0;
    double sector_slope_lo_bps = -80.0, sector_slope_hi_bps = 30.0;
    double sector_curv_lo_bps = -40.0, sector_curv_hi_bps = 60.0;
    double sector_lambda_lo_years = 1.2, sector_lambda_hi_years = 3.5;

    // random-walk step scales applied to beta0 (beta1/beta2 get 0.6x)
    double group_sigma_bps = 35.0;
    double subgroup_sigma_bps = 18.0;
    double issuer_sigma_bps = 3.0;

    // geography: region base shift in [-region_shift, region_shift], country
    // walk steps of country_sigma along the region chain
    double region_shift_bps = 25.0;
    double country_sigma_bps = 8.0;

    // per-market-type level offset, so a market match is informative rather
    // than a pure confounder
    double market_sigma_bps = 4.0;

    // ratings are the latent level percentile blurred by this many notches;
    // zero makes the rating filter a near-perfect level oracle
    double rating_noise_notches = 2.0;

    // minority of issuers fund in the alternate currency at a basis premium
    double alt_currency_fraction = 0.1;
    double alt_currency_basis_bps = 40.0;
    std::string base_currency = "USD";
    std::string alt_currency = "EUR";

    std::string observation_date = "2024-12-13";

    // matching synthetic embedding store
    int embedding_dim = 768;
    double embedding_epsilon = 0.5;

    /// Throws InvalidConfig.
    void validate() const;
};

/// Catalog plus the ground truth behind it.
struct SyntheticBundle {
    Catalog catalog;
    CategoryHierarchy hierarchy;               // the generator's true category tree
    VectorStore store;                         // embeddings drawn on that tree
    std::map<std::string, NSParams> latent;    // issuer_id -> true curve (incl. country/basis shifts)
};

/// Deterministic per (config, seed).
Catalog generate_synthetic_catalog(const SyntheticConfig& config, std::uint64_t seed);

SyntheticBundle generate_synthetic_bundle(const SyntheticConfig& config, std::uint64_t seed);

}  // namespace bondkit
