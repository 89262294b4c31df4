#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace snp {

/// Multi-index alpha in N_0^d selecting one Hermite order per coordinate.
struct MultiIndex {
    std::vector<int> entries;

    int total_degree() const {
        int t = 0;
        for (int e : entries) t += e;
        return t;
    }
    bool operator==(const MultiIndex&) const = default;
};

/// Ordered set of multi-indices with 2 <= |alpha| <= K and their factorial
/// weights alpha! = prod_j alpha_j!. The order is graded lexicographic
/// (ascending total degree, lexicographic within a degree), which fixes the
/// layout of every coefficient vector built against the set. Immutable after
/// construction.
class MultiIndexSet {
public:
    /// Largest supported order; keeps every alpha! inside int64.
    static constexpr int kMaxOrder = 20;

    MultiIndexSet(int dimension, int order);

    /// Wrap an explicit index list (as read from a density file). Validates
    /// membership bounds, uniqueness, and completeness; the given order is
    /// preserved even if it is not the canonical one.
    MultiIndexSet(int dimension, int order, std::vector<MultiIndex> indices);

    int dimension() const { return dimension_; }
    int order() const { return order_; }
    std::size_t size() const { return indices_.size(); }

    const std::vector<MultiIndex>& indices() const { return indices_; }
    const MultiIndex& index(std::size_t m) const { return indices_[m]; }
    const std::vector<std::int64_t>& weights() const { return weights_; }
    std::int64_t weight(std::size_t m) const { return weights_[m]; }

    bool operator==(const MultiIndexSet&) const = default;

private:
    void compute_weights();
    void validate() const;

    int dimension_ = 0;
    int order_ = 0;
    std::vector<MultiIndex> indices_;
    std::vector<std::int64_t> weights_;
};

/// All multi-indices with 2 <= |alpha| <= K in graded lexicographic order.
MultiIndexSet build_index_set(int dimension, int order);

/// M = C(d+K, K) - 1 - d, the coefficient count of the set above.
std::int64_t coefficient_count(int dimension, int order);

}  // namespace snp
