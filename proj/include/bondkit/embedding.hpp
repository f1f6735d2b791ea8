#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bondkit/catalog.hpp"
#include "bondkit/hierarchy.hpp"

namespace bondkit {

/// Dense vector for one categorical value. Entries must be finite with a
/// strictly positive L2 norm (enforced at load/build time).
struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dimension() const { return values.size(); }
    double norm() const;

    bool operator==(const EmbeddingVector&) const = default;
};

/// cos(a, b) = <a,b> / (|a| |b|), clamped to [-1, 1] against rounding.
/// Throws DimensionMismatch / ZeroNorm.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Immutable (feature, category) -> vector map with a single dimension d.
/// Category keys are canonicalized (trimmed, upper-cased) on insert and
/// lookup.
class VectorStore {
public:
    VectorStore() = default;

    /// Throws DuplicateKey / DimensionMismatch / ZeroNorm.
    static VectorStore from_entries(
        std::vector<std::tuple<FeatureName, std::string, EmbeddingVector>> entries);

    std::size_t dimension() const { return dimension_; }
    std::size_t size() const { return entries_.size(); }

    bool contains(FeatureName feature, const std::string& category) const;

    /// Throws MissingEmbedding naming the feature and category.
    const EmbeddingVector& vector_for(FeatureName feature, const std::string& category) const;

    /// Canonical category strings stored for one feature, ascending.
    std::vector<std::string> categories(FeatureName feature) const;

    bool operator==(const VectorStore&) const = default;

private:
    std::map<std::pair<FeatureName, std::string>, EmbeddingVector> entries_;
    std::size_t dimension_ = 0;
};

/// Loads the tab-separated vector format: feature_name TAB category TAB
/// comma-separated floats, one record per line. Throws ParseError /
/// DimensionMismatch / DuplicateKey / ZeroNorm with line numbers.
VectorStore load_vector_store(const std::string& path);

/// Writes the same format (round-trips through load_vector_store).
void save_vector_store(const VectorStore& store, const std::string& path);

/// Builds a store in which siblings are closer than cross-branch pairs: each
/// root direction is an independent Gaussian unit vector and every child is
/// unit-normalized(parent + epsilon * g) with g scaled to unit expected norm,
/// so epsilon is the expected perturbation size regardless of dimension.
/// Deterministic per seed. Throws InvalidHierarchy / DuplicateKey.
VectorStore synthetic_embeddings(const CategoryHierarchy& hierarchy, std::size_t dimension,
                                 std::uint64_t seed, double epsilon = 0.3);

enum class ProjectionMethod { Pca, FirstDims };

struct Projection2D {
    struct Point {
        std::string category;
        double x = 0.0;
        double y = 0.0;
        double reference_similarity = 0.0;  // full-dimension cosine to the reference
    };
    std::vector<Point> points;  // ascending category name
};

/// 2-D view of one feature's embedding space. pca projects onto the top two
/// principal components (deterministic sign convention); first_dims takes raw
/// dimensions 0 and 1. reference_similarity is always computed in full
/// dimension. Throws TooFewCategories / MissingReference.
Projection2D project_2d(const VectorStore& store, FeatureName feature,
                        const std::string& reference, ProjectionMethod method);

/// CSV with header category,x,y,reference_similarity.
std::string projection_to_csv(const Projection2D& projection);

}  // namespace bondkit
