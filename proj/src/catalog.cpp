#include "bondkit/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bondkit/detail/text.hpp"
#include "bondkit/errors.hpp"
#include "bondkit/rng.hpp"

namespace bondkit {

namespace {

constexpr std::array<const char*, kFeatureCount> kFeatureIds = {
    "issuer_industry", "market_issue_type",   "industry_group",
    "industry_subgroup", "country_of_domicile", "issuer_identity",
};

constexpr std::array<const char*, 13> kCsvColumns = {
    "bond_id",          "issuer_id",         "issuer_industry",    "market_issue_type",
    "industry_group",   "industry_subgroup", "country_of_domicile", "issuer_identity",
    "currency",         "rating",            "maturity_years",     "spread_bps",
    "observation_date",
};

bool valid_iso_date_impl(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (s[i] < '0' || s[i] > '9') return false;
    const int y = std::stoi(s.substr(0, 4));
    const int m = std::stoi(s.substr(5, 2));
    const int d = std::stoi(s.substr(8, 2));
    if (m < 1 || m > 12 || d < 1) return false;
    static const int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int dim = days[m - 1];
    const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    if (m == 2 && leap) dim = 29;
    return d <= dim;
}

bool valid_currency(const std::string& s) {
    if (s.size() != 3) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
}

// RFC 4180-style split; quoted fields may contain commas and doubled quotes.
// Newlines inside quotes are not supported (the writer never emits them).
std::optional<std::vector<std::string>> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                current += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    if (in_quotes) return std::nullopt;
    fields.push_back(std::move(current));
    return fields;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

struct RowProblem {
    ErrorCode code;
    RowIssue issue;
};

// Raw string cells for one record, in kCsvColumns order.
using RawRow = std::array<std::string, 13>;

std::optional<Bond> build_bond(const RawRow& raw, std::size_t line, const RatingScale& scale,
                               std::vector<RowProblem>& problems) {
    Bond b;
    bool ok = true;
    auto flag = [&](ErrorCode code, const char* field, std::string detail) {
        problems.push_back({code, {line, field, std::move(detail)}});
        ok = false;
    };

    b.bond_id = detail::trim(raw[0]);
    if (b.bond_id.empty()) flag(ErrorCode::MalformedRow, "bond_id", "empty bond_id");
    b.issuer_id = detail::trim(raw[1]);
    if (b.issuer_id.empty()) flag(ErrorCode::MalformedRow, "issuer_id", "empty issuer_id");

    for (std::size_t f = 0; f < kFeatureCount; ++f)
        b.features[f] = canonical_category(raw[2 + f]);

    b.currency = detail::to_upper(detail::trim(raw[8]));
    if (!valid_currency(b.currency))
        flag(ErrorCode::MalformedRow, "currency", "not an ISO-4217 code: '" + raw[8] + "'");

    b.rating = detail::trim(raw[9]);
    if (!scale.contains(b.rating))
        flag(ErrorCode::UnknownRating, "rating", "rating not in configured scale: '" + b.rating + "'");

    if (auto m = detail::parse_double(detail::trim(raw[10])); m && *m > 0.0) {
        b.maturity_years = *m;
    } else {
        flag(ErrorCode::MalformedRow, "maturity_years",
             "maturity_years must be a positive real, got '" + raw[10] + "'");
    }

    if (auto s = detail::parse_double(detail::trim(raw[11]))) {
        b.spread_bps = *s;
    } else {
        flag(ErrorCode::MalformedRow, "spread_bps", "spread_bps is not a number: '" + raw[11] + "'");
    }

    b.observation_date = detail::trim(raw[12]);
    if (!is_valid_iso_date(b.observation_date))
        flag(ErrorCode::MalformedRow, "observation_date",
             "not an ISO-8601 date: '" + raw[12] + "'");

    if (!ok) return std::nullopt;
    return b;
}

[[noreturn]] void throw_load_error(std::vector<RowProblem> problems) {
    std::vector<RowIssue> issues;
    issues.reserve(problems.size());
    std::ostringstream msg;
    msg << problems.size() << " invalid row(s):";
    for (std::size_t i = 0; i < problems.size(); ++i) {
        if (i < 8) {
            msg << " [line " << problems[i].issue.line << ", " << problems[i].issue.field << ": "
                << problems[i].issue.detail << "]";
        }
        issues.push_back(problems[i].issue);
    }
    if (problems.size() > 8) msg << " ...";
    throw CatalogLoadError(problems.front().code, msg.str(), std::move(issues));
}

std::vector<Bond> parse_csv(std::istream& in, const RatingScale& scale) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty file, header required");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_csv_line(line);
    if (!header) throw Error(ErrorCode::ParseError, "unterminated quote in header");

    // header must carry exactly the documented columns (any order)
    std::array<int, 13> col_of;
    col_of.fill(-1);
    for (std::size_t i = 0; i < header->size(); ++i) {
        const std::string name = detail::trim((*header)[i]);
        bool known = false;
        for (std::size_t c = 0; c < kCsvColumns.size(); ++c) {
            if (name == kCsvColumns[c]) {
                if (col_of[c] != -1)
                    throw Error(ErrorCode::ParseError, "duplicate column: " + name);
                col_of[c] = static_cast<int>(i);
                known = true;
                break;
            }
        }
        if (!known) throw Error(ErrorCode::ParseError, "unknown column: '" + name + "'");
    }
    for (std::size_t c = 0; c < kCsvColumns.size(); ++c)
        if (col_of[c] == -1)
            throw Error(ErrorCode::ParseError, std::string("missing column: ") + kCsvColumns[c]);

    std::vector<Bond> bonds;
    std::vector<RowProblem> problems;
    std::set<std::string> seen_ids;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (!fields || fields->size() != header->size()) {
            problems.push_back({ErrorCode::MalformedRow,
                                {line_no, "",
                                 !fields ? "unterminated quote"
                                         : "expected " + std::to_string(header->size()) +
                                               " fields, got " + std::to_string(fields->size())}});
            continue;
        }
        RawRow raw;
        for (std::size_t c = 0; c < 13; ++c) raw[c] = (*fields)[static_cast<std::size_t>(col_of[c])];
        if (auto bond = build_bond(raw, line_no, scale, problems)) {
            if (!seen_ids.insert(bond->bond_id).second) {
                problems.push_back({ErrorCode::DuplicateBondId,
                                    {line_no, "bond_id", "duplicate bond_id: " + bond->bond_id}});
                continue;
            }
            bonds.push_back(std::move(*bond));
        }
    }
    if (!problems.empty()) throw_load_error(std::move(problems));
    return bonds;
}

std::vector<Bond> parse_json(std::istream& in, const RatingScale& scale) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    if (!doc.is_array()) throw Error(ErrorCode::ParseError, "expected a JSON array of bond objects");

    std::vector<Bond> bonds;
    std::vector<RowProblem> problems;
    std::set<std::string> seen_ids;
    std::size_t index = 0;
    for (const auto& obj : doc) {
        ++index;  // 1-based record number stands in for the line number
        if (!obj.is_object()) {
            problems.push_back({ErrorCode::MalformedRow, {index, "", "record is not an object"}});
            continue;
        }
        RawRow raw;
        bool shape_ok = true;
        for (std::size_t c = 0; c < 13; ++c) {
            const auto it = obj.find(kCsvColumns[c]);
            if (it == obj.end()) {
                problems.push_back({ErrorCode::MalformedRow,
                                    {index, kCsvColumns[c], "missing field"}});
                shape_ok = false;
                continue;
            }
            if (it->is_string()) raw[c] = it->get<std::string>();
            else if (it->is_number()) raw[c] = detail::format_double(it->get<double>());
            else if (it->is_null()) raw[c] = "";
            else {
                problems.push_back({ErrorCode::MalformedRow,
                                    {index, kCsvColumns[c], "field is neither string nor number"}});
                shape_ok = false;
            }
        }
        if (!shape_ok) continue;
        if (auto bond = build_bond(raw, index, scale, problems)) {
            if (!seen_ids.insert(bond->bond_id).second) {
                problems.push_back({ErrorCode::DuplicateBondId,
                                    {index, "bond_id", "duplicate bond_id: " + bond->bond_id}});
                continue;
            }
            bonds.push_back(std::move(*bond));
        }
    }
    if (!problems.empty()) throw_load_error(std::move(problems));
    return bonds;
}

}  // namespace

bool is_valid_iso_date(const std::string& date) { return valid_iso_date_impl(date); }

const char* to_string(FeatureName feature) {
    return kFeatureIds[static_cast<std::size_t>(feature)];
}

FeatureName feature_from_string(const std::string& name) {
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        if (name == kFeatureIds[i]) return static_cast<FeatureName>(i);
    throw Error(ErrorCode::ParseError, "unknown feature name: '" + name + "'");
}

std::string canonical_category(const std::string& raw) {
    std::string c = detail::to_upper(detail::trim(raw));
    if (c.empty()) return kUnknownCategory;
    return c;
}

Catalog Catalog::from_bonds(std::vector<Bond> bonds, const RatingScale& scale) {
    std::vector<RowProblem> problems;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < bonds.size(); ++i) {
        Bond& b = bonds[i];
        const std::size_t record = i + 1;
        for (auto& f : b.features)
            f = canonical_category(f);
        if (b.bond_id.empty())
            problems.push_back({ErrorCode::MalformedRow, {record, "bond_id", "empty bond_id"}});
        else if (!ids.insert(b.bond_id).second)
            problems.push_back({ErrorCode::DuplicateBondId,
                                {record, "bond_id", "duplicate bond_id: " + b.bond_id}});
        if (b.issuer_id.empty())
            problems.push_back({ErrorCode::MalformedRow, {record, "issuer_id", "empty issuer_id"}});
        if (!(b.maturity_years > 0.0))
            problems.push_back({ErrorCode::MalformedRow,
                                {record, "maturity_years", "maturity_years must be > 0"}});
        if (!scale.contains(b.rating))
            problems.push_back({ErrorCode::UnknownRating,
                                {record, "rating", "rating not in configured scale: '" + b.rating + "'"}});
    }
    if (!problems.empty()) throw_load_error(std::move(problems));

    std::sort(bonds.begin(), bonds.end(),
              [](const Bond& a, const Bond& b) { return a.bond_id < b.bond_id; });

    Catalog c;
    c.bonds_ = std::move(bonds);
    for (std::size_t i = 0; i < c.bonds_.size(); ++i) {
        c.by_id_[c.bonds_[i].bond_id] = i;
        c.issuer_index_[c.bonds_[i].issuer_id].push_back(c.bonds_[i].bond_id);
    }
    return c;
}

bool Catalog::has_bond(const std::string& bond_id) const { return by_id_.count(bond_id) > 0; }

const Bond& Catalog::bond(const std::string& bond_id) const {
    const auto it = by_id_.find(bond_id);
    if (it == by_id_.end()) throw Error(ErrorCode::UnknownBond, "no such bond: " + bond_id);
    return bonds_[it->second];
}

bool Catalog::has_issuer(const std::string& issuer_id) const {
    return issuer_index_.count(issuer_id) > 0;
}

const std::vector<std::string>& Catalog::issuer_bond_ids(const std::string& issuer_id) const {
    const auto it = issuer_index_.find(issuer_id);
    if (it == issuer_index_.end())
        throw Error(ErrorCode::UnknownIssuer, "no such issuer: " + issuer_id);
    return it->second;
}

std::vector<std::string> Catalog::issuer_ids() const {
    std::vector<std::string> out;
    out.reserve(issuer_index_.size());
    for (const auto& [issuer, _] : issuer_index_) out.push_back(issuer);
    return out;
}

std::map<std::string, std::size_t> Catalog::issuer_densities() const {
    std::map<std::string, std::size_t> out;
    for (const auto& [issuer, ids] : issuer_index_) out[issuer] = ids.size();
    return out;
}

std::map<std::size_t, std::size_t> Catalog::density_histogram() const {
    std::map<std::size_t, std::size_t> out;
    for (const auto& [_, ids] : issuer_index_) ++out[ids.size()];
    return out;
}

Catalog Catalog::without_bonds(const std::vector<std::string>& bond_ids) const {
    const std::set<std::string> drop(bond_ids.begin(), bond_ids.end());
    std::vector<Bond> kept;
    kept.reserve(bonds_.size());
    for (const auto& b : bonds_)
        if (!drop.count(b.bond_id)) kept.push_back(b);
    Catalog c;
    c.bonds_ = std::move(kept);
    for (std::size_t i = 0; i < c.bonds_.size(); ++i) {
        c.by_id_[c.bonds_[i].bond_id] = i;
        c.issuer_index_[c.bonds_[i].issuer_id].push_back(c.bonds_[i].bond_id);
    }
    return c;
}

Catalog load_catalog(const std::string& path, CatalogFormat format, const RatingScale& scale) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open catalog file: " + path);
    std::vector<Bond> bonds =
        format == CatalogFormat::Csv ? parse_csv(in, scale) : parse_json(in, scale);
    return Catalog::from_bonds(std::move(bonds), scale);
}

std::string catalog_to_csv(const Catalog& catalog) {
    std::ostringstream out;
    for (std::size_t c = 0; c < kCsvColumns.size(); ++c)
        out << (c ? "," : "") << kCsvColumns[c];
    out << '\n';
    for (const Bond& b : catalog.bonds()) {
        out << csv_escape(b.bond_id) << ',' << csv_escape(b.issuer_id);
        for (const auto& f : b.features) out << ',' << csv_escape(f);
        out << ',' << b.currency << ',' << csv_escape(b.rating) << ','
            << detail::format_double(b.maturity_years) << ','
            << detail::format_double(b.spread_bps) << ',' << b.observation_date << '\n';
    }
    return out.str();
}

void save_catalog_csv(const Catalog& catalog, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write catalog file: " + path);
    out << catalog_to_csv(catalog);
}

SparsifyOutcome sparsify_issuer(const Catalog& catalog, const std::string& issuer_id,
                                std::size_t n_drop, std::uint64_t seed) {
    const std::vector<std::string>& ids = catalog.issuer_bond_ids(issuer_id);
    if (n_drop >= ids.size())
        throw Error(ErrorCode::DropTooLarge,
                    "n_drop=" + std::to_string(n_drop) + " but issuer " + issuer_id + " has " +
                        std::to_string(ids.size()) + " bond(s); at least one must remain");

    std::vector<std::string> pool = ids;  // ascending, deterministic start state
    Rng rng(seed);
    rng.shuffle(pool);
    std::vector<std::string> dropped(pool.begin(), pool.begin() + static_cast<long>(n_drop));
    std::vector<std::string> retained(pool.begin() + static_cast<long>(n_drop), pool.end());
    std::sort(dropped.begin(), dropped.end());
    std::sort(retained.begin(), retained.end());

    SparsifyOutcome out;
    out.sparse_catalog = catalog.without_bonds(dropped);
    out.retained = std::move(retained);
    out.dropped = std::move(dropped);
    return out;
}

}  // namespace bondkit
