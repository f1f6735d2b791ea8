#include "bondkit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>
#include <utility>
#include <vector>

#include "bondkit/errors.hpp"
#include "bondkit/rng.hpp"

namespace bondkit {

namespace {

std::string two_digits(int v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%02d", v);
    return buf;
}

std::string sector_name(int s) { return "SEC" + two_digits(s); }
std::string group_name(int s, int g) { return sector_name(s) + "_GRP" + two_digits(g); }
std::string subgroup_name(int s, int g, int u) { return group_name(s, g) + "_SUB" + two_digits(u); }
std::string region_name(int r) { return "REGION" + two_digits(r); }
std::string country_name(int r, int c) { return region_name(r) + "_CTY" + two_digits(c); }

std::string market_name(int m) {
    static const char* kNames[] = {"GLOBAL", "DOMESTIC", "EUROBOND", "PRIVATE", "YANKEE"};
    if (m < 5) return kNames[m];
    return "MKT" + two_digits(m);
}

std::string issuer_name(int i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "ISSUER_%04d", i);
    return buf;
}

std::string bond_name(int issuer, int bond) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "XS%04dB%02d", issuer, bond);
    return buf;
}

struct IssuerPlan {
    int index = 0;
    int sector = 0, group = 0, subgroup = 0;
    int region = 0, country = 0;
    int market = 0;
    bool alt_currency = false;
    NSParams latent;
};

}  // namespace

void SyntheticConfig::validate() const {
    auto positive = [](int v, const char* what) {
        if (v < 1) throw Error(ErrorCode::InvalidConfig, std::string(what) + " must be positive");
    };
    positive(n_issuers, "n_issuers");
    positive(bonds_per_issuer, "bonds_per_issuer");
    positive(n_sectors, "n_sectors");
    positive(groups_per_sector, "groups_per_sector");
    positive(subgroups_per_group, "subgroups_per_group");
    positive(n_regions, "n_regions");
    positive(countries_per_region, "countries_per_region");
    positive(n_market_types, "n_market_types");
    positive(embedding_dim, "embedding_dim");
    if (noise_sigma_bps < 0.0)
        throw Error(ErrorCode::InvalidConfig, "noise_sigma_bps must be nonnegative");
    if (!(maturity_min_years > 0.0) || maturity_max_years < maturity_min_years)
        throw Error(ErrorCode::InvalidConfig, "need 0 < maturity_min_years <= maturity_max_years");
    if (sector_level_hi_bps < sector_level_lo_bps || sector_slope_hi_bps < sector_slope_lo_bps ||
        sector_curv_hi_bps < sector_curv_lo_bps)
        throw Error(ErrorCode::InvalidConfig, "sector parameter ranges are inverted");
    if (!(sector_lambda_lo_years > 0.0) || sector_lambda_hi_years < sector_lambda_lo_years)
        throw Error(ErrorCode::InvalidConfig, "bad sector lambda range");
    if (group_sigma_bps < 0.0 || subgroup_sigma_bps < 0.0 || issuer_sigma_bps < 0.0 ||
        country_sigma_bps < 0.0 || region_shift_bps < 0.0 || market_sigma_bps < 0.0 ||
        rating_noise_notches < 0.0)
        throw Error(ErrorCode::InvalidConfig, "perturbation scales must be nonnegative");
    if (alt_currency_fraction < 0.0 || alt_currency_fraction > 1.0)
        throw Error(ErrorCode::InvalidConfig, "alt_currency_fraction must lie in [0, 1]");
    if (embedding_epsilon < 0.0)
        throw Error(ErrorCode::InvalidConfig, "embedding_epsilon must be nonnegative");
    if (!is_valid_iso_date(observation_date))
        throw Error(ErrorCode::InvalidConfig, "observation_date is not a valid ISO-8601 date");
}

SyntheticBundle generate_synthetic_bundle(const SyntheticConfig& cfg, std::uint64_t seed) {
    cfg.validate();

    // sector base curves
    std::vector<NSParams> sector_base(static_cast<std::size_t>(cfg.n_sectors));
    for (int s = 0; s < cfg.n_sectors; ++s) {
        Rng rng(derive_seed(seed, "sector", static_cast<std::uint64_t>(s)));
        NSParams p;
        p.beta0 = rng.uniform(cfg.sector_level_lo_bps, cfg.sector_level_hi_bps);
        p.beta1 = rng.uniform(cfg.sector_slope_lo_bps, cfg.sector_slope_hi_bps);
        p.beta2 = rng.uniform(cfg.sector_curv_lo_bps, cfg.sector_curv_hi_bps);
        p.lambda = rng.uniform(cfg.sector_lambda_lo_years, cfg.sector_lambda_hi_years);
        sector_base[static_cast<std::size_t>(s)] = p;
    }

    auto perturbed = [](const NSParams& base, Rng& rng, double sigma, double lambda_sigma) {
        NSParams p = base;
        p.beta0 += rng.gaussian(0.0, sigma);
        p.beta1 += rng.gaussian(0.0, 0.6 * sigma);
        p.beta2 += rng.gaussian(0.0, 0.6 * sigma);
        p.lambda *= std::exp(rng.gaussian(0.0, lambda_sigma));
        return p;
    };

    // Group and subgroup curves random-walk along the category chain, so
    // categories adjacent in the tree have closer curves than distant ones.
    // The embedding trees below mirror the same chains, which is what makes
    // graded categorical similarity informative about spreads.
    std::map<std::pair<int, int>, NSParams> group_curve;
    std::map<std::tuple<int, int, int>, NSParams> subgroup_curve;
    for (int s = 0; s < cfg.n_sectors; ++s) {
        NSParams walk = sector_base[static_cast<std::size_t>(s)];
        for (int g = 0; g < cfg.groups_per_sector; ++g) {
            Rng rng(derive_seed(seed, "group", static_cast<std::uint64_t>(s * 10000 + g)));
            walk = perturbed(walk, rng, cfg.group_sigma_bps, 0.10);
            group_curve[{s, g}] = walk;
            NSParams sub_walk = walk;
            for (int u = 0; u < cfg.subgroups_per_group; ++u) {
                Rng sub_rng(derive_seed(seed, "subgroup",
                                        static_cast<std::uint64_t>((s * 10000 + g) * 100 + u)));
                sub_walk = perturbed(sub_walk, sub_rng, cfg.subgroup_sigma_bps, 0.05);
                subgroup_curve[{s, g, u}] = sub_walk;
            }
        }
    }

    // geography level shifts, walking along the countries of a region
    std::vector<double> region_shift(static_cast<std::size_t>(cfg.n_regions));
    std::map<std::pair<int, int>, double> country_shift;
    for (int r = 0; r < cfg.n_regions; ++r) {
        Rng rng(derive_seed(seed, "region", static_cast<std::uint64_t>(r)));
        region_shift[static_cast<std::size_t>(r)] =
            rng.uniform(-cfg.region_shift_bps, cfg.region_shift_bps);
        double walk = region_shift[static_cast<std::size_t>(r)];
        for (int c = 0; c < cfg.countries_per_region; ++c) {
            Rng crng(derive_seed(seed, "country", static_cast<std::uint64_t>(r * 100 + c)));
            walk += crng.gaussian(0.0, cfg.country_sigma_bps);
            country_shift[{r, c}] = walk;
        }
    }

    // market-scope level offsets
    std::vector<double> market_shift(static_cast<std::size_t>(cfg.n_market_types));
    for (int m = 0; m < cfg.n_market_types; ++m) {
        Rng rng(derive_seed(seed, "market", static_cast<std::uint64_t>(m)));
        market_shift[static_cast<std::size_t>(m)] = rng.gaussian(0.0, cfg.market_sigma_bps);
    }

    // Issuer ids must carry no information about chain positions (real
    // identifiers are arbitrary), so slot indices go through seeded
    // permutations; otherwise id-based tie-breaks could correlate with the
    // latent walks.
    auto permutation = [&](const char* tag, std::uint64_t key, int n) {
        std::vector<int> p(static_cast<std::size_t>(n));
        for (int v = 0; v < n; ++v) p[static_cast<std::size_t>(v)] = v;
        Rng rng(derive_seed(seed, tag, key));
        rng.shuffle(p);
        return p;
    };
    std::map<int, std::vector<int>> group_perm;
    std::map<std::pair<int, int>, std::vector<int>> sub_perm;
    std::map<int, std::vector<int>> country_perm;
    for (int s = 0; s < cfg.n_sectors; ++s) {
        group_perm[s] = permutation("group_perm", static_cast<std::uint64_t>(s),
                                    cfg.groups_per_sector);
        for (int g = 0; g < cfg.groups_per_sector; ++g)
            sub_perm[{s, g}] = permutation("sub_perm", static_cast<std::uint64_t>(s * 100 + g),
                                           cfg.subgroups_per_group);
    }
    for (int r = 0; r < cfg.n_regions; ++r)
        country_perm[r] = permutation("country_perm", static_cast<std::uint64_t>(r),
                                      cfg.countries_per_region);

    // issuer plans
    std::vector<IssuerPlan> plans(static_cast<std::size_t>(cfg.n_issuers));
    for (int i = 0; i < cfg.n_issuers; ++i) {
        IssuerPlan& plan = plans[static_cast<std::size_t>(i)];
        plan.index = i;
        plan.sector = i % cfg.n_sectors;
        const int li = i / cfg.n_sectors;
        plan.group = group_perm[plan.sector][static_cast<std::size_t>(li % cfg.groups_per_sector)];
        plan.subgroup = sub_perm[{plan.sector, plan.group}][static_cast<std::size_t>(
            (li / cfg.groups_per_sector) % cfg.subgroups_per_group)];
        plan.region = i % cfg.n_regions;
        plan.country = country_perm[plan.region][static_cast<std::size_t>(
            (i / cfg.n_regions) % cfg.countries_per_region)];

        Rng rng(derive_seed(seed, "issuer", static_cast<std::uint64_t>(i)));
        plan.market = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.n_market_types)));
        plan.alt_currency = rng.uniform() < cfg.alt_currency_fraction;

        NSParams latent = subgroup_curve[{plan.sector, plan.group, plan.subgroup}];
        latent.beta0 += rng.gaussian(0.0, cfg.issuer_sigma_bps);
        latent.beta1 += rng.gaussian(0.0, 0.6 * cfg.issuer_sigma_bps);
        latent.beta2 += rng.gaussian(0.0, 0.6 * cfg.issuer_sigma_bps);
        latent.beta0 += country_shift[{plan.region, plan.country}];
        latent.beta0 += market_shift[static_cast<std::size_t>(plan.market)];
        if (plan.alt_currency) latent.beta0 += cfg.alt_currency_basis_bps;
        plan.latent = latent;
    }

    // ratings follow the 5y latent level: better rating for tighter spreads
    std::vector<int> order(plans.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double la = ns_spread(plans[static_cast<std::size_t>(a)].latent, 5.0);
        const double lb = ns_spread(plans[static_cast<std::size_t>(b)].latent, 5.0);
        return la < lb || (la == lb && a < b);
    });
    const RatingScale& scale = RatingScale::standard();
    const std::size_t notches = std::min<std::size_t>(16, scale.size());  // AAA .. B-
    std::vector<std::string> issuer_rating(plans.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const int issuer_idx = order[pos];
        Rng rng(derive_seed(seed, "rating", static_cast<std::uint64_t>(issuer_idx)));
        const double blur = rng.gaussian(0.0, cfg.rating_noise_notches);
        auto notch = static_cast<long long>(pos * notches / order.size()) +
                     static_cast<long long>(std::llround(blur));
        notch = std::clamp<long long>(notch, 0, static_cast<long long>(notches) - 1);
        issuer_rating[static_cast<std::size_t>(issuer_idx)] =
            scale.at(static_cast<std::size_t>(notch));
    }

    // bonds
    std::vector<Bond> bonds;
    bonds.reserve(plans.size() * static_cast<std::size_t>(cfg.bonds_per_issuer));
    std::map<std::string, NSParams> latent_map;
    const double log_lo = std::log(cfg.maturity_min_years);
    const double log_hi = std::log(cfg.maturity_max_years);
    for (const IssuerPlan& plan : plans) {
        const std::string issuer = issuer_name(plan.index);
        latent_map[issuer] = plan.latent;
        Rng rng(derive_seed(seed, "bonds", static_cast<std::uint64_t>(plan.index)));
        for (int j = 0; j < cfg.bonds_per_issuer; ++j) {
            Bond b;
            b.bond_id = bond_name(plan.index, j);
            b.issuer_id = issuer;
            b.set_feature(FeatureName::IssuerIndustry, sector_name(plan.sector));
            b.set_feature(FeatureName::MarketIssueType, market_name(plan.market));
            b.set_feature(FeatureName::IndustryGroup, group_name(plan.sector, plan.group));
            b.set_feature(FeatureName::IndustrySubgroup,
                          subgroup_name(plan.sector, plan.group, plan.subgroup));
            b.set_feature(FeatureName::CountryOfDomicile,
                          country_name(plan.region, plan.country));
            b.set_feature(FeatureName::IssuerIdentity, issuer);
            b.currency = plan.alt_currency ? cfg.alt_currency : cfg.base_currency;
            b.rating = issuer_rating[static_cast<std::size_t>(plan.index)];
            // jittered log-spaced tenor ladder keeps maturities distinct and
            // spanning the whole curve
            const double slot = cfg.bonds_per_issuer == 1
                                    ? 0.5
                                    : (static_cast<double>(j) + 0.15 + 0.7 * rng.uniform()) /
                                          static_cast<double>(cfg.bonds_per_issuer);
            b.maturity_years = std::exp(log_lo + (log_hi - log_lo) * slot);
            b.spread_bps = ns_spread(plan.latent, b.maturity_years) +
                           rng.gaussian(0.0, cfg.noise_sigma_bps);
            b.observation_date = cfg.observation_date;
            bonds.push_back(std::move(b));
        }
    }

    // the true category tree, used both for embeddings and by tests
    CategoryHierarchy h;
    {
        std::vector<CategoryNode> sectors;
        for (int s = 0; s < cfg.n_sectors; ++s) sectors.push_back({sector_name(s), {}});
        h.roots[FeatureName::IssuerIndustry] = std::move(sectors);

        std::vector<CategoryNode> markets;
        for (int m = 0; m < cfg.n_market_types; ++m) markets.push_back({market_name(m), {}});
        h.roots[FeatureName::MarketIssueType] = std::move(markets);

        // chains mirror the latent random walks: each category is the child
        // of its predecessor, so embedding similarity decays with chain
        // distance just as the curves drift apart
        auto chain = [](std::vector<std::string> names) {
            CategoryNode root{names.front(), {}};
            CategoryNode* tip = &root;
            for (std::size_t i = 1; i < names.size(); ++i) {
                tip->children.push_back({names[i], {}});
                tip = &tip->children.back();
            }
            return root;
        };

        std::vector<CategoryNode> groups;
        for (int s = 0; s < cfg.n_sectors; ++s) {
            std::vector<std::string> names;
            for (int g = 0; g < cfg.groups_per_sector; ++g) names.push_back(group_name(s, g));
            groups.push_back(chain(std::move(names)));
        }
        h.roots[FeatureName::IndustryGroup] = std::move(groups);

        std::vector<CategoryNode> subgroups;
        for (int s = 0; s < cfg.n_sectors; ++s) {
            for (int g = 0; g < cfg.groups_per_sector; ++g) {
                std::vector<std::string> names;
                for (int u = 0; u < cfg.subgroups_per_group; ++u)
                    names.push_back(subgroup_name(s, g, u));
                subgroups.push_back(chain(std::move(names)));
            }
        }
        h.roots[FeatureName::IndustrySubgroup] = std::move(subgroups);

        std::vector<CategoryNode> countries;
        for (int r = 0; r < cfg.n_regions; ++r) {
            std::vector<std::string> names;
            for (int c = 0; c < cfg.countries_per_region; ++c) names.push_back(country_name(r, c));
            countries.push_back(chain(std::move(names)));
        }
        h.roots[FeatureName::CountryOfDomicile] = std::move(countries);

        // identities cluster inside their subgroup
        std::map<std::tuple<int, int, int>, std::vector<int>> members;
        for (const IssuerPlan& plan : plans)
            members[{plan.sector, plan.group, plan.subgroup}].push_back(plan.index);
        std::vector<CategoryNode> identities;
        for (const auto& [key, issuers] : members) {
            CategoryNode root{issuer_name(issuers.front()), {}};
            for (std::size_t m = 1; m < issuers.size(); ++m)
                root.children.push_back({issuer_name(issuers[m]), {}});
            identities.push_back(std::move(root));
        }
        h.roots[FeatureName::IssuerIdentity] = std::move(identities);
    }

    SyntheticBundle bundle;
    bundle.catalog = Catalog::from_bonds(std::move(bonds));
    bundle.store = synthetic_embeddings(h, static_cast<std::size_t>(cfg.embedding_dim),
                                        derive_seed(seed, "embeddings"), cfg.embedding_epsilon);
    bundle.hierarchy = std::move(h);
    bundle.latent = std::move(latent_map);
    return bundle;
}

Catalog generate_synthetic_catalog(const SyntheticConfig& cfg, std::uint64_t seed) {
    return generate_synthetic_bundle(cfg, seed).catalog;
}

}  // namespace bondkit
