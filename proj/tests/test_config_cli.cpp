#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bondkit/config.hpp"
#include "bondkit/errors.hpp"
#include "bondkit/synthetic.hpp"
#include "helpers.hpp"

using namespace bondkit;
using testutil::TempDir;

namespace {

int run_cli(const std::string& args, const std::string& stdout_path = "/dev/null",
            const std::string& stderr_path = "/dev/null") {
    const std::string cmd = std::string(BONDKIT_CLI_PATH) + " " + args + " > " + stdout_path +
                            " 2> " + stderr_path;
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

const char* kHeader =
    "bond_id,issuer_id,issuer_industry,market_issue_type,industry_group,industry_subgroup,"
    "country_of_domicile,issuer_identity,currency,rating,maturity_years,spread_bps,"
    "observation_date\n";

}  // namespace

TEST_CASE("run config parses defaults and overrides") {
    const RunConfig cfg = parse_run_config(R"({
        "catalog": {"path": "cat.csv", "format": "csv"},
        "vectors": {"path": "vec.tsv"},
        "k": 7,
        "variants": ["XEmbedding", "OneHot"],
        "filters": {"enforce_currency": false, "rating_tolerance_notches": null},
        "evaluation": {"min_bonds": 6, "drop_fractions": [0.5], "sparsity_mode": "paper_formula"},
        "seed": 99,
        "output_dir": "results"
    })");
    CHECK(cfg.catalog_path == "cat.csv");
    CHECK(cfg.k == 7);
    CHECK(cfg.variants.size() == 2);
    CHECK_FALSE(cfg.filters.enforce_currency);
    CHECK_FALSE(cfg.filters.rating_tolerance_notches.has_value());
    CHECK(cfg.min_bonds == 6);
    CHECK(cfg.sparsity_mode == SparsityMode::PaperFormula);
    CHECK(cfg.seed == 99);
    CHECK(cfg.output_dir == "results");
}

TEST_CASE("run config rejects unknown keys anywhere") {
    CHECK_THROWS_AS(parse_run_config(R"({"catalog": {"path": "x"}, "mystery": 1})"), Error);
    CHECK_THROWS_AS(parse_run_config(R"({"catalog": {"path": "x", "nope": "csv"}})"), Error);
    CHECK_THROWS_AS(parse_run_config(R"({"filters": {"unknown_filter": true}})"), Error);
    CHECK_THROWS_AS(parse_run_config(R"({"evaluation": {"zzz": 1}})"), Error);
}

TEST_CASE("run config rejects malformed json and contradictory sections") {
    CHECK_THROWS_AS(parse_run_config("{not json"), Error);
    try {
        parse_run_config("{not json");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ParseError);
    }
    CHECK_THROWS_AS(parse_run_config(R"({"variant": "OneHot", "variants": ["OneHot"]})"), Error);
    CHECK_THROWS_AS(parse_run_config(R"({"vectors": {"path": "a", "synthetic": {}}})"), Error);
    CHECK_THROWS_AS(parse_run_config(R"({"vectors": {}})"), Error);
    CHECK_THROWS_AS(parse_run_config(R"({"weights": {"issuer_industry": -1}})"), Error);
    CHECK_THROWS_AS(parse_run_config(R"({"k": 0})"), Error);
}

TEST_CASE("synthetic catalog section feeds the generator config") {
    const RunConfig cfg = parse_run_config(R"({
        "synthetic_catalog": {"n_issuers": 10, "bonds_per_issuer": 4, "noise_sigma_bps": 1.0}
    })");
    REQUIRE(cfg.synthetic.has_value());
    CHECK(cfg.synthetic->n_issuers == 10);
    CHECK(cfg.synthetic->bonds_per_issuer == 4);
    CHECK_THROWS_AS(parse_run_config(R"({"synthetic_catalog": {"n_issuers": 0}})"), Error);
}

TEST_CASE("cli: ingest summarizes a valid catalog and rejects malformed files") {
    TempDir dir("cli");
    const std::string good = dir.file("good.csv");
    testutil::write_text(good, std::string(kHeader) +
                                   "B1,ACME,Ind,Global,M,T,US,ACME,USD,A,5,120,2024-12-13\n"
                                   "B2,ACME,Ind,Global,M,T,US,ACME,USD,A,7,130,2024-12-13\n");
    const std::string out = dir.file("stdout.json");
    CHECK(run_cli("ingest --catalog " + good + " --format csv", out) == 0);
    const auto summary = nlohmann::json::parse(testutil::read_text(out));
    CHECK(summary["bonds"] == 2);
    CHECK(summary["issuers"] == 1);
    CHECK(summary["density_histogram"]["2"] == 1);

    const std::string bad = dir.file("bad.csv");
    testutil::write_text(bad, std::string(kHeader) +
                                  "B1,ACME,Ind,Global,M,T,US,ACME,USD,A,-5,120,2024-12-13\n");
    const std::string err = dir.file("stderr.txt");
    CHECK(run_cli("ingest --catalog " + bad + " --format csv", "/dev/null", err) == 1);
    const std::string diagnostics = testutil::read_text(err);
    CHECK(diagnostics.find("row 2") != std::string::npos);

    // csv content declared as json is a parse error
    CHECK(run_cli("ingest --catalog " + good + " --format json") == 1);
    // bad flag value is a usage problem
    CHECK(run_cli("ingest --catalog " + good + " --format yaml") == 2);
}

TEST_CASE("cli: generate, search, project, fit, augment round trip") {
    TempDir dir("cli");
    const std::string cfg_path = dir.file("config.json");
    nlohmann::json cfg{
        {"catalog", {{"path", dir.file("out/catalog.csv")}, {"format", "csv"}}},
        {"vectors", {{"path", dir.file("out/vectors.tsv")}}},
        {"variants", {"XEmbedding"}},
        {"k", 4},
        {"seed", 4242},
        {"output_dir", dir.file("out")},
        {"synthetic_catalog",
         {{"n_issuers", 12}, {"bonds_per_issuer", 6}, {"embedding_dim", 16}}},
    };
    testutil::write_text(cfg_path, cfg.dump(2));

    REQUIRE(run_cli("generate --config " + cfg_path) == 0);
    REQUIRE(std::filesystem::exists(dir.file("out/catalog.csv")));
    REQUIRE(std::filesystem::exists(dir.file("out/vectors.tsv")));

    const Catalog cat = load_catalog(dir.file("out/catalog.csv"), CatalogFormat::Csv);
    const std::string query = cat.bonds()[0].bond_id;

    SUBCASE("search writes ranked results; k larger than the pool saturates") {
        const std::string out = dir.file("search_stdout.json");
        REQUIRE(run_cli("search --config " + cfg_path + " --query " + query + " --k 10000", out) ==
                0);
        const auto doc = nlohmann::json::parse(testutil::read_text(out));
        CHECK(doc["query_id"] == query);
        CHECK(doc["neighbors"].size() == cat.size() - 1);
        CHECK(std::filesystem::exists(dir.file("out/search_" + query + ".json")));
        CHECK(std::filesystem::exists(dir.file("out/search_" + query + ".csv")));
    }

    SUBCASE("search on an unknown bond exits 1") {
        CHECK(run_cli("search --config " + cfg_path + " --query NO_SUCH_BOND") == 1);
    }

    SUBCASE("an exact clone reports a similarity score of 1.00") {
        // append a categorical clone of the query bond under another issuer;
        // it ties the query's own sibling bonds at exactly 1.0
        std::vector<Bond> bonds = cat.bonds();
        Bond clone = cat.bond(query);
        clone.bond_id = "ZCLONE01";
        clone.issuer_id = "CLONEISSUER";
        bonds.push_back(clone);
        save_catalog_csv(Catalog::from_bonds(std::move(bonds)), dir.file("out/catalog.csv"));
        const std::string out = dir.file("clone_stdout.json");
        REQUIRE(run_cli("search --config " + cfg_path + " --query " + query + " --k 1000", out) ==
                0);
        const auto doc = nlohmann::json::parse(testutil::read_text(out));
        CHECK(doc["neighbors"][0]["score"].get<double>() == doctest::Approx(1.0));
        bool clone_at_one = false;
        for (const auto& n : doc["neighbors"])
            if (n["bond_id"] == "ZCLONE01") clone_at_one = n["score"].get<double>() == 1.0;
        CHECK(clone_at_one);
    }

    SUBCASE("project emits one row per category; missing reference exits 1") {
        const std::string ref = cat.bonds()[0].feature(FeatureName::IssuerIndustry);
        REQUIRE(run_cli("project --config " + cfg_path + " --feature issuer_industry --reference " +
                        ref + " --method pca") == 0);
        const std::string csv = testutil::read_text(dir.file("out/projection_issuer_industry.csv"));
        std::set<std::string> industries;
        for (const Bond& b : cat.bonds()) industries.insert(b.feature(FeatureName::IssuerIndustry));
        const std::size_t lines = std::count(csv.begin(), csv.end(), '\n');
        CHECK(lines == industries.size() + 1);  // header + one per category
        CHECK(run_cli("project --config " + cfg_path +
                      " --feature issuer_industry --reference NOPE") == 1);
        CHECK(run_cli("project --config " + cfg_path +
                      " --feature issuer_industry --reference " + ref + " --method bogus") == 2);
    }

    SUBCASE("fit writes a tenor-grid curve csv") {
        const std::string issuer = cat.bonds()[0].issuer_id;
        REQUIRE(run_cli("fit --config " + cfg_path + " --issuer " + issuer) == 0);
        const std::string csv = testutil::read_text(dir.file("out/curve_" + issuer + ".csv"));
        CHECK(csv.rfind("tau_years,spread_bps\n", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 121);
    }

    SUBCASE("augment writes a loadable catalog of own plus peer bonds") {
        const std::string issuer = cat.bonds()[0].issuer_id;
        REQUIRE(run_cli("augment --config " + cfg_path + " --issuer " + issuer) == 0);
        const Catalog augmented =
            load_catalog(dir.file("out/augmented_" + issuer + ".csv"), CatalogFormat::Csv);
        CHECK(augmented.size() >= cat.issuer_bond_ids(issuer).size());
        CHECK(augmented.has_issuer(issuer));
    }
}

TEST_CASE("cli: evaluate handles oversized drops gracefully, benchmark validates variants") {
    TempDir dir("cli");
    const std::string cfg_path = dir.file("config.json");
    nlohmann::json cfg{
        {"catalog", {{"path", dir.file("out/catalog.csv")}, {"format", "csv"}}},
        {"vectors", {{"path", dir.file("out/vectors.tsv")}}},
        {"variant", "OneHot"},
        {"k", 3},
        {"seed", 777},
        {"output_dir", dir.file("out")},
        {"evaluation", {{"min_bonds", 5}, {"drop_counts", {2, 99}}}},
        {"synthetic_catalog", {{"n_issuers", 8}, {"bonds_per_issuer", 5}, {"embedding_dim", 16}}},
    };
    testutil::write_text(cfg_path, cfg.dump(2));
    REQUIRE(run_cli("generate --config " + cfg_path) == 0);

    const std::string err = dir.file("stderr.txt");
    CHECK(run_cli("evaluate --config " + cfg_path, "/dev/null", err) == 0);
    CHECK(testutil::read_text(err).find("failed trial") != std::string::npos);
    CHECK(std::filesystem::exists(dir.file("out/report_OneHot.json")));
    CHECK(std::filesystem::exists(dir.file("out/trials_OneHot.csv")));
    CHECK(std::filesystem::exists(dir.file("out/bins_OneHot.csv")));

    // benchmark needs two variants
    CHECK(run_cli("benchmark --config " + cfg_path) == 2);

    // an embedding variant without any vectors section fails fast at exit 1
    nlohmann::json no_store = cfg;
    no_store.erase("vectors");
    no_store["variant"] = "XEmbedding";
    no_store["evaluation"] = {{"min_bonds", 5}, {"drop_counts", {2}}};
    const std::string cfg2 = dir.file("config2.json");
    testutil::write_text(cfg2, no_store.dump(2));
    CHECK(run_cli("evaluate --config " + cfg2) == 1);

    // a vectors path that does not exist also exits 1 before any trial
    nlohmann::json bad_store = cfg;
    bad_store["vectors"] = {{"path", dir.file("missing.tsv")}};
    bad_store["variant"] = "XEmbedding";
    const std::string cfg3 = dir.file("config3.json");
    testutil::write_text(cfg3, bad_store.dump(2));
    CHECK(run_cli("evaluate --config " + cfg3) == 1);
}

TEST_CASE("cli: config and usage errors exit 2") {
    TempDir dir("cli");
    CHECK(run_cli("evaluate") == 2);  // no --config
    const std::string broken = dir.file("broken.json");
    testutil::write_text(broken, "{\"unknown_key\": 1}");
    CHECK(run_cli("evaluate --config " + broken) == 2);
    const std::string invalid = dir.file("invalid.json");
    testutil::write_text(invalid, "not json at all");
    CHECK(run_cli("evaluate --config " + invalid) == 2);
    CHECK(run_cli("definitely-not-a-command") == 2);
}
