#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "bondkit/catalog.hpp"
#include "bondkit/embedding.hpp"

namespace testutil {

inline bondkit::Bond make_bond(const std::string& bond_id, const std::string& issuer,
                               double maturity, double spread,
                               const std::string& industry = "TECH",
                               const std::string& group = "SOFTWARE",
                               const std::string& subgroup = "SAAS",
                               const std::string& country = "US",
                               const std::string& market = "GLOBAL",
                               const std::string& currency = "USD",
                               const std::string& rating = "A") {
    bondkit::Bond b;
    b.bond_id = bond_id;
    b.issuer_id = issuer;
    b.set_feature(bondkit::FeatureName::IssuerIndustry, industry);
    b.set_feature(bondkit::FeatureName::MarketIssueType, market);
    b.set_feature(bondkit::FeatureName::IndustryGroup, group);
    b.set_feature(bondkit::FeatureName::IndustrySubgroup, subgroup);
    b.set_feature(bondkit::FeatureName::CountryOfDomicile, country);
    b.set_feature(bondkit::FeatureName::IssuerIdentity, issuer);
    b.currency = currency;
    b.rating = rating;
    b.maturity_years = maturity;
    b.spread_bps = spread;
    b.observation_date = "2024-12-13";
    return b;
}

/// Unique scratch directory under the build tree, cleaned on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("bondkit_test_" + tag + "_" + std::to_string(++counter) + "_" +
                 std::to_string(static_cast<unsigned>(::getpid())));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace testutil
