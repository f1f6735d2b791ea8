#pragma once

#include <map>
#include <string>
#include <vector>

#include "bondkit/catalog.hpp"

namespace bondkit {

/// Rooted category tree. Roots of one feature are mutually independent;
/// children inherit their parent's embedding direction (see
/// synthetic_embeddings).
struct CategoryNode {
    std::string name;
    std::vector<CategoryNode> children;
};

/// Per-feature forests describing which categories are semantically close.
struct CategoryHierarchy {
    std::map<FeatureName, std::vector<CategoryNode>> roots;

    bool empty() const { return roots.empty(); }
};

/// Derives a hierarchy from the catalog itself using the natural nesting
/// chain industry -> group -> subgroup -> identity: each parent-feature value
/// becomes an anchor root whose children are the child-feature categories
/// observed with it (ties on co-occurrence resolved toward the lexically
/// smaller parent). MarketIssueType and CountryOfDomicile carry no observable
/// nesting and stay flat.
CategoryHierarchy hierarchy_from_catalog(const Catalog& catalog);

}  // namespace bondkit
