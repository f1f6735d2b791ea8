#include "bondkit/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <Eigen/Dense>

#include "bondkit/detail/text.hpp"
#include "bondkit/errors.hpp"
#include "bondkit/rng.hpp"

namespace bondkit {

namespace {

std::string key_label(FeatureName feature, const std::string& category) {
    return std::string(to_string(feature)) + "/" + category;
}

void check_entries_finite(const EmbeddingVector& v, const std::string& label) {
    for (double x : v.values)
        if (!std::isfinite(x))
            throw Error(ErrorCode::ParseError, "non-finite embedding entry for " + label);
}

}  // namespace

double EmbeddingVector::norm() const {
    double acc = 0.0;
    for (double x : values) acc += x * x;
    return std::sqrt(acc);
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dimension() != b.dimension())
        throw Error(ErrorCode::DimensionMismatch,
                    "cosine over dimensions " + std::to_string(a.dimension()) + " and " +
                        std::to_string(b.dimension()));
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0)
        throw Error(ErrorCode::ZeroNorm, "cosine undefined for a zero vector");
    double dot = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
    return std::clamp(dot / (na * nb), -1.0, 1.0);
}

VectorStore VectorStore::from_entries(
    std::vector<std::tuple<FeatureName, std::string, EmbeddingVector>> entries) {
    VectorStore store;
    for (auto& [feature, category, vector] : entries) {
        const std::string canon = canonical_category(category);
        const std::string label = key_label(feature, canon);
        check_entries_finite(vector, label);
        if (vector.norm() == 0.0)
            throw Error(ErrorCode::ZeroNorm, "zero vector for " + label);
        if (store.dimension_ == 0) {
            store.dimension_ = vector.dimension();
        } else if (vector.dimension() != store.dimension_) {
            throw Error(ErrorCode::DimensionMismatch,
                        label + " has dimension " + std::to_string(vector.dimension()) +
                            ", store dimension is " + std::to_string(store.dimension_));
        }
        if (!store.entries_.emplace(std::make_pair(feature, canon), std::move(vector)).second)
            throw Error(ErrorCode::DuplicateKey, "duplicate entry for " + label);
    }
    return store;
}

bool VectorStore::contains(FeatureName feature, const std::string& category) const {
    return entries_.count({feature, canonical_category(category)}) > 0;
}

const EmbeddingVector& VectorStore::vector_for(FeatureName feature,
                                               const std::string& category) const {
    const auto it = entries_.find({feature, canonical_category(category)});
    if (it == entries_.end())
        throw Error(ErrorCode::MissingEmbedding,
                    "no embedding for " + key_label(feature, canonical_category(category)));
    return it->second;
}

std::vector<std::string> VectorStore::categories(FeatureName feature) const {
    std::vector<std::string> out;
    for (const auto& [key, _] : entries_)
        if (key.first == feature) out.push_back(key.second);
    return out;  // map order is already ascending per feature
}

VectorStore load_vector_store(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open vector file: " + path);

    std::vector<std::tuple<FeatureName, std::string, EmbeddingVector>> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab1 = line.find('\t');
        const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
        if (tab2 == std::string::npos)
            throw Error(ErrorCode::ParseError,
                        "line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
        FeatureName feature;
        try {
            feature = feature_from_string(detail::trim(line.substr(0, tab1)));
        } catch (const Error& e) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
        }
        const std::string category = line.substr(tab1 + 1, tab2 - tab1 - 1);

        EmbeddingVector vec;
        std::size_t start = tab2 + 1;
        while (start <= line.size()) {
            std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) comma = line.size();
            const auto value = detail::parse_double(detail::trim(line.substr(start, comma - start)));
            if (!value || !std::isfinite(*value))
                throw Error(ErrorCode::ParseError,
                            "line " + std::to_string(line_no) + ": bad float '" +
                                line.substr(start, comma - start) + "'");
            vec.values.push_back(*value);
            start = comma + 1;
        }
        if (vec.values.empty())
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": empty vector");
        entries.emplace_back(feature, category, std::move(vec));
    }
    return VectorStore::from_entries(std::move(entries));
}

void save_vector_store(const VectorStore& store, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write vector file: " + path);
    for (FeatureName feature : all_features()) {
        for (const std::string& category : store.categories(feature)) {
            const EmbeddingVector& v = store.vector_for(feature, category);
            out << to_string(feature) << '\t' << category << '\t';
            for (std::size_t i = 0; i < v.values.size(); ++i)
                out << (i ? "," : "") << detail::format_double(v.values[i]);
            out << '\n';
        }
    }
}

namespace {

void emit_subtree(const CategoryNode& node, FeatureName feature,
                  const EmbeddingVector* parent, std::size_t dimension, double epsilon, Rng& rng,
                  std::vector<std::tuple<FeatureName, std::string, EmbeddingVector>>& out,
                  std::size_t depth) {
    if (depth > 64)
        throw Error(ErrorCode::InvalidHierarchy, "category tree deeper than 64 levels");
    if (detail::trim(node.name).empty())
        throw Error(ErrorCode::InvalidHierarchy, "empty category name");

    EmbeddingVector v;
    v.values.resize(dimension);
    const double scale = epsilon / std::sqrt(static_cast<double>(dimension));
    if (parent == nullptr) {
        for (double& x : v.values) x = rng.gaussian();
    } else {
        for (std::size_t i = 0; i < dimension; ++i)
            v.values[i] = parent->values[i] + scale * rng.gaussian();
    }
    const double n = v.norm();
    if (n == 0.0) {
        // astronomically unlikely; keep the contract airtight
        v.values[0] = 1.0;
    } else {
        for (double& x : v.values) x /= n;
    }
    out.emplace_back(feature, node.name, v);
    for (const CategoryNode& child : node.children)
        emit_subtree(child, feature, &v, dimension, epsilon, rng, out, depth + 1);
}

}  // namespace

VectorStore synthetic_embeddings(const CategoryHierarchy& hierarchy, std::size_t dimension,
                                 std::uint64_t seed, double epsilon) {
    if (hierarchy.empty())
        throw Error(ErrorCode::InvalidHierarchy, "hierarchy has no features");
    if (dimension < 2)
        throw Error(ErrorCode::InvalidConfig, "embedding dimension must be at least 2");
    if (epsilon < 0.0)
        throw Error(ErrorCode::InvalidConfig, "epsilon must be nonnegative");

    std::vector<std::tuple<FeatureName, std::string, EmbeddingVector>> entries;
    for (const auto& [feature, roots] : hierarchy.roots) {
        if (roots.empty())
            throw Error(ErrorCode::InvalidHierarchy,
                        std::string("feature ") + to_string(feature) + " has no categories");
        Rng rng(derive_seed(seed, to_string(feature)));
        for (const CategoryNode& root : roots)
            emit_subtree(root, feature, nullptr, dimension, epsilon, rng, entries, 0);
    }
    return VectorStore::from_entries(std::move(entries));
}

CategoryHierarchy hierarchy_from_catalog(const Catalog& catalog) {
    CategoryHierarchy h;
    const auto flat = [&](FeatureName feature) {
        std::set<std::string> values;
        for (const Bond& b : catalog.bonds()) values.insert(b.feature(feature));
        std::vector<CategoryNode> roots;
        for (const auto& v : values) roots.push_back({v, {}});
        return roots;
    };
    const auto nested = [&](FeatureName parent, FeatureName child) {
        // child category -> (parent category -> count)
        std::map<std::string, std::map<std::string, std::size_t>> cooc;
        for (const Bond& b : catalog.bonds()) ++cooc[b.feature(child)][b.feature(parent)];
        std::map<std::string, std::vector<std::string>> children_of;
        for (const auto& [cat, parents] : cooc) {
            const std::string* best = nullptr;
            std::size_t best_count = 0;
            for (const auto& [p, count] : parents) {
                if (count > best_count) {  // ties fall to the lexically smaller parent
                    best = &p;
                    best_count = count;
                }
            }
            children_of[*best].push_back(cat);
        }
        std::vector<CategoryNode> roots;
        for (const auto& [anchor, members] : children_of) {
            CategoryNode root{anchor, {}};
            for (const auto& m : members)
                if (m != anchor) root.children.push_back({m, {}});
            roots.push_back(std::move(root));
        }
        return roots;
    };

    h.roots[FeatureName::IssuerIndustry] = flat(FeatureName::IssuerIndustry);
    h.roots[FeatureName::MarketIssueType] = flat(FeatureName::MarketIssueType);
    h.roots[FeatureName::IndustryGroup] =
        nested(FeatureName::IssuerIndustry, FeatureName::IndustryGroup);
    h.roots[FeatureName::IndustrySubgroup] =
        nested(FeatureName::IndustryGroup, FeatureName::IndustrySubgroup);
    h.roots[FeatureName::CountryOfDomicile] = flat(FeatureName::CountryOfDomicile);
    h.roots[FeatureName::IssuerIdentity] =
        nested(FeatureName::IndustrySubgroup, FeatureName::IssuerIdentity);
    return h;
}

Projection2D project_2d(const VectorStore& store, FeatureName feature,
                        const std::string& reference, ProjectionMethod method) {
    const std::vector<std::string> cats = store.categories(feature);
    if (cats.size() < 2)
        throw Error(ErrorCode::TooFewCategories,
                    std::string("feature ") + to_string(feature) + " has " +
                        std::to_string(cats.size()) + " categories, need at least 2");
    const std::string ref = canonical_category(reference);
    if (!store.contains(feature, ref))
        throw Error(ErrorCode::MissingReference,
                    "reference category not in store: " + key_label(feature, ref));
    const EmbeddingVector& ref_vec = store.vector_for(feature, ref);

    const std::size_t n = cats.size();
    const std::size_t d = store.dimension();

    Projection2D out;
    out.points.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.points[i].category = cats[i];
        out.points[i].reference_similarity =
            cosine_similarity(store.vector_for(feature, cats[i]), ref_vec);
    }

    if (method == ProjectionMethod::FirstDims) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto& v = store.vector_for(feature, cats[i]).values;
            out.points[i].x = v[0];
            out.points[i].y = d > 1 ? v[1] : 0.0;
        }
        return out;
    }

    // PCA scores via the Gram matrix: for centered X = U S V^T the score
    // matrix is X V = U S, recovered from the eigen-decomposition of X X^T.
    Eigen::MatrixXd x(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& v = store.vector_for(feature, cats[i]).values;
        for (std::size_t j = 0; j < d; ++j) x(static_cast<long>(i), static_cast<long>(j)) = v[j];
    }
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    const Eigen::MatrixXd gram = x * x.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success)
        throw Error(ErrorCode::InvalidArgument, "eigen decomposition failed");

    // eigenvalues ascending; take the last two
    for (int pc = 0; pc < 2; ++pc) {
        const long idx = static_cast<long>(n) - 1 - pc;
        const double lambda = idx >= 0 ? std::max(eig.eigenvalues()(idx), 0.0) : 0.0;
        Eigen::VectorXd scores = idx >= 0
                                     ? Eigen::VectorXd(eig.eigenvectors().col(idx) * std::sqrt(lambda))
                                     : Eigen::VectorXd::Zero(static_cast<long>(n));
        // deterministic sign: largest-magnitude score positive
        long arg_max = 0;
        for (long i = 1; i < scores.size(); ++i)
            if (std::abs(scores(i)) > std::abs(scores(arg_max))) arg_max = i;
        if (scores(arg_max) < 0.0) scores = -scores;
        for (std::size_t i = 0; i < n; ++i) {
            if (pc == 0) out.points[i].x = scores(static_cast<long>(i));
            else out.points[i].y = scores(static_cast<long>(i));
        }
    }
    return out;
}

std::string projection_to_csv(const Projection2D& projection) {
    std::ostringstream out;
    out << "category,x,y,reference_similarity\n";
    for (const auto& p : projection.points) {
        out << p.category << ',' << detail::format_double(p.x) << ',' << detail::format_double(p.y)
            << ',' << detail::format_double(p.reference_similarity) << '\n';
    }
    return out.str();
}

}  // namespace bondkit
