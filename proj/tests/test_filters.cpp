#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "bondkit/errors.hpp"
#include "bondkit/filters.hpp"
#include "bondkit/rng.hpp"
#include "helpers.hpp"

using namespace bondkit;
using testutil::make_bond;

namespace {

struct Fixture {
    Catalog catalog;
    Bond query;
    std::vector<RankedMatch> candidates;
};

RankedMatch match(const std::string& id, double score) {
    RankedMatch m;
    m.bond_id = id;
    m.score = score;
    return m;
}

// randomized candidate list over a catalog with mixed currencies, maturities
// and ratings
Fixture random_fixture(std::uint64_t seed, std::size_t n = 30) {
    Rng rng(seed);
    const RatingScale& scale = RatingScale::standard();
    std::vector<Bond> bonds;
    bonds.push_back(make_bond("QUERY", "IQ", 5.0, 100.0));
    for (std::size_t i = 0; i < n; ++i) {
        Bond b = make_bond("C" + std::to_string(100 + i), "I" + std::to_string(i),
                           0.5 + rng.uniform() * 29.0, rng.uniform(10.0, 400.0));
        b.currency = rng.below(3) == 0 ? "EUR" : "USD";
        b.rating = scale.at(rng.below(scale.size()));
        bonds.push_back(b);
    }
    Fixture f;
    f.catalog = Catalog::from_bonds(std::move(bonds));
    f.query = f.catalog.bond("QUERY");
    std::vector<std::string> ids;
    for (const Bond& b : f.catalog.bonds())
        if (b.bond_id != "QUERY") ids.push_back(b.bond_id);
    rng.shuffle(ids);
    double score = 1.0;
    for (const auto& id : ids) f.candidates.push_back(match(id, score -= 0.01));
    return f;
}

bool is_subsequence(const std::vector<RankedMatch>& sub, const std::vector<RankedMatch>& full) {
    std::size_t i = 0;
    for (const auto& m : full)
        if (i < sub.size() && sub[i].bond_id == m.bond_id) ++i;
    return i == sub.size();
}

std::vector<std::string> ids_of(const std::vector<RankedMatch>& ms) {
    std::vector<std::string> ids;
    for (const auto& m : ms) ids.push_back(m.bond_id);
    return ids;
}

}  // namespace

TEST_CASE("currency filter keeps same-currency candidates in order") {
    std::vector<Bond> bonds;
    bonds.push_back(make_bond("Q", "IQ", 5.0, 100.0));
    Bond usd1 = make_bond("A", "I1", 4.0, 90.0);
    Bond eur = make_bond("B", "I2", 5.0, 95.0);
    eur.currency = "EUR";
    Bond usd2 = make_bond("C", "I3", 6.0, 105.0);
    bonds.insert(bonds.end(), {usd1, eur, usd2});
    const Catalog cat = Catalog::from_bonds(std::move(bonds));
    const std::vector<RankedMatch> in{match("B", 0.9), match("A", 0.8), match("C", 0.7)};

    FilterConfig cfg;
    const auto out = currency_filter(cat.bond("Q"), in, cat, cfg);
    CHECK(ids_of(out) == std::vector<std::string>{"A", "C"});  // order preserved, EUR dropped

    SUBCASE("all same currency passes unchanged") {
        const std::vector<RankedMatch> same{match("A", 0.8), match("C", 0.7)};
        CHECK(ids_of(currency_filter(cat.bond("Q"), same, cat, cfg)) == ids_of(same));
    }
    SUBCASE("no survivor is a valid result") {
        const std::vector<RankedMatch> only_eur{match("B", 0.9)};
        CHECK(currency_filter(cat.bond("Q"), only_eur, cat, cfg).empty());
    }
    SUBCASE("disabled currency filter is the identity") {
        cfg.enforce_currency = false;
        CHECK(ids_of(currency_filter(cat.bond("Q"), in, cat, cfg)) == ids_of(in));
    }
}

TEST_CASE("maturity filter applies the window around the query") {
    std::vector<Bond> bonds;
    bonds.push_back(make_bond("Q", "IQ", 5.0, 100.0));
    bonds.push_back(make_bond("A", "I1", 3.0, 90.0));
    bonds.push_back(make_bond("B", "I2", 5.0, 95.0));
    bonds.push_back(make_bond("C", "I3", 8.0, 105.0));
    const Catalog cat = Catalog::from_bonds(std::move(bonds));
    const std::vector<RankedMatch> in{match("A", 0.9), match("B", 0.8), match("C", 0.7)};

    FilterConfig cfg;
    SUBCASE("absent bounds leave the list unchanged") {
        CHECK(ids_of(maturity_filter(cat.bond("Q"), in, cat, cfg)) == ids_of(in));
    }
    SUBCASE("two-year window around a five-year query keeps 3y and 5y") {
        cfg.maturity_lower_years = 2.0;
        cfg.maturity_upper_years = 2.0;
        CHECK(ids_of(maturity_filter(cat.bond("Q"), in, cat, cfg)) ==
              std::vector<std::string>{"A", "B"});
    }
    SUBCASE("zero window keeps exact maturities only") {
        cfg.maturity_lower_years = 0.0;
        cfg.maturity_upper_years = 0.0;
        CHECK(ids_of(maturity_filter(cat.bond("Q"), in, cat, cfg)) ==
              std::vector<std::string>{"B"});
    }
    SUBCASE("absolute mode bounds the maturity itself") {
        cfg.maturity_mode = MaturityWindowMode::Absolute;
        cfg.maturity_lower_years = 4.0;
        cfg.maturity_upper_years = 9.0;
        CHECK(ids_of(maturity_filter(cat.bond("Q"), in, cat, cfg)) ==
              std::vector<std::string>{"B", "C"});
    }
    SUBCASE("inverted absolute bounds are rejected") {
        cfg.maturity_mode = MaturityWindowMode::Absolute;
        cfg.maturity_lower_years = 9.0;
        cfg.maturity_upper_years = 4.0;
        CHECK_THROWS_AS(maturity_filter(cat.bond("Q"), in, cat, cfg), Error);
    }
}

TEST_CASE("rating filter uses notch distance on the given scale") {
    const RatingScale scale({"AAA", "AA+", "AA", "AA-", "A+"});
    std::vector<Bond> bonds;
    auto rated = [&](const std::string& id, const std::string& rating) {
        Bond b = make_bond(id, "I" + id, 5.0, 100.0);
        b.rating = rating;
        return b;
    };
    bonds.push_back(rated("Q", "AA"));
    bonds.push_back(rated("A", "AAA"));
    bonds.push_back(rated("B", "AA+"));
    bonds.push_back(rated("C", "AA"));
    bonds.push_back(rated("D", "AA-"));
    bonds.push_back(rated("E", "A+"));
    const Catalog cat = Catalog::from_bonds(std::move(bonds), scale);
    const std::vector<RankedMatch> in{match("A", 0.9), match("B", 0.8), match("C", 0.7),
                                      match("D", 0.6), match("E", 0.5)};

    FilterConfig cfg;
    cfg.rating_tolerance_notches = 1;
    CHECK(ids_of(rating_filter(cat.bond("Q"), in, cat, scale, cfg)) ==
          std::vector<std::string>{"B", "C", "D"});

    cfg.rating_tolerance_notches = 0;
    CHECK(ids_of(rating_filter(cat.bond("Q"), in, cat, scale, cfg)) ==
          std::vector<std::string>{"C"});

    cfg.rating_tolerance_notches = 10;  // spans the whole scale
    CHECK(ids_of(rating_filter(cat.bond("Q"), in, cat, scale, cfg)) == ids_of(in));

    cfg.rating_tolerance_notches = 1;
    Bond stranger = rated("X", "AA");
    stranger.rating = "NOT_A_RATING";
    CHECK_THROWS_AS(rating_filter(stranger, in, cat, scale, cfg), Error);
}

TEST_CASE("apply_filters equals the intersection of the three stages") {
    // each stage removes a distinct candidate
    std::vector<Bond> bonds;
    bonds.push_back(make_bond("Q", "IQ", 5.0, 100.0));
    Bond wrong_ccy = make_bond("A", "I1", 5.0, 90.0);
    wrong_ccy.currency = "EUR";
    Bond wrong_mat = make_bond("B", "I2", 20.0, 95.0);
    Bond wrong_rat = make_bond("C", "I3", 5.0, 105.0);
    wrong_rat.rating = "CCC";
    Bond fine = make_bond("D", "I4", 6.0, 100.0);
    bonds.insert(bonds.end(), {wrong_ccy, wrong_mat, wrong_rat, fine});
    const Catalog cat = Catalog::from_bonds(std::move(bonds));
    const std::vector<RankedMatch> in{match("A", 0.9), match("B", 0.8), match("C", 0.7),
                                      match("D", 0.6)};

    FilterConfig cfg;
    cfg.maturity_lower_years = 3.0;
    cfg.maturity_upper_years = 3.0;
    cfg.rating_tolerance_notches = 2;
    const auto out = apply_filters(cat.bond("Q"), in, cat, RatingScale::standard(), cfg);
    CHECK(ids_of(out) == std::vector<std::string>{"D"});

    SUBCASE("disabling everything is the identity pipeline") {
        const auto all = apply_filters(cat.bond("Q"), in, cat, RatingScale::standard(),
                                       FilterConfig::disabled());
        CHECK(ids_of(all) == ids_of(in));
    }
}

TEST_CASE("filters are order-preserving, idempotent, and order-independent") {
    const RatingScale& scale = RatingScale::standard();
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL, 6ULL, 7ULL, 8ULL}) {
        const Fixture f = random_fixture(seed);
        FilterConfig cfg;
        cfg.maturity_lower_years = 4.0;
        cfg.maturity_upper_years = 6.0;
        cfg.rating_tolerance_notches = 5;

        using Stage = std::vector<RankedMatch> (*)(const Bond&, const std::vector<RankedMatch>&,
                                                   const Catalog&, const RatingScale&,
                                                   const FilterConfig&);
        const auto cur = +[](const Bond& q, const std::vector<RankedMatch>& c, const Catalog& cat,
                             const RatingScale&, const FilterConfig& cfg) {
            return currency_filter(q, c, cat, cfg);
        };
        const auto mat = +[](const Bond& q, const std::vector<RankedMatch>& c, const Catalog& cat,
                             const RatingScale&, const FilterConfig& cfg) {
            return maturity_filter(q, c, cat, cfg);
        };
        const auto rat = +[](const Bond& q, const std::vector<RankedMatch>& c, const Catalog& cat,
                             const RatingScale& s, const FilterConfig& cfg) {
            return rating_filter(q, c, cat, s, cfg);
        };
        const std::vector<Stage> stages{cur, mat, rat};

        // each single stage: order preserving and idempotent
        for (const Stage stage : stages) {
            const auto once = stage(f.query, f.candidates, f.catalog, scale, cfg);
            CHECK(is_subsequence(once, f.candidates));
            const auto twice = stage(f.query, once, f.catalog, scale, cfg);
            CHECK(ids_of(twice) == ids_of(once));
        }

        // all six stage orderings agree with apply_filters
        const auto reference = apply_filters(f.query, f.candidates, f.catalog, scale, cfg);
        std::vector<int> order{0, 1, 2};
        do {
            auto result = f.candidates;
            for (int s : order) result = stages[(std::size_t)s](f.query, result, f.catalog, scale, cfg);
            CHECK(ids_of(result) == ids_of(reference));
        } while (std::next_permutation(order.begin(), order.end()));

        // apply_filters is idempotent too
        const auto again = apply_filters(f.query, reference, f.catalog, scale, cfg);
        CHECK(ids_of(again) == ids_of(reference));
    }
}

TEST_CASE("filter output shrinks monotonically as constraints tighten") {
    const RatingScale& scale = RatingScale::standard();
    const Fixture f = random_fixture(99, 40);
    std::size_t previous = f.candidates.size() + 1;
    for (int tolerance : {21, 8, 4, 2, 1, 0}) {
        FilterConfig cfg;
        cfg.rating_tolerance_notches = tolerance;
        const auto out = apply_filters(f.query, f.candidates, f.catalog, scale, cfg);
        CHECK(out.size() <= previous);
        previous = out.size();
    }
    previous = f.candidates.size() + 1;
    for (double window : {30.0, 10.0, 4.0, 1.0, 0.25}) {
        FilterConfig cfg;
        cfg.maturity_lower_years = window;
        cfg.maturity_upper_years = window;
        const auto out = apply_filters(f.query, f.candidates, f.catalog, scale, cfg);
        CHECK(out.size() <= previous);
        previous = out.size();
    }
}

TEST_CASE("filter config validation") {
    FilterConfig cfg;
    cfg.maturity_lower_years = -1.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = FilterConfig{};
    cfg.rating_tolerance_notches = -2;
    CHECK_THROWS_AS(cfg.validate(), Error);
}
