#include "snp/indexset.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "snp/errors.hpp"
#include "snp/hermite.hpp"

namespace snp {

namespace {

void check_bounds(int dimension, int order) {
    if (dimension < 1) throw UsageError("index set: dimension must be >= 1");
    if (order < 2) {
        throw UsageError(
            "index set: order must be >= 2 (whitened densities drop orders 0 and 1)");
    }
    if (order > MultiIndexSet::kMaxOrder) {
        throw UsageError("index set: order above " +
                         std::to_string(MultiIndexSet::kMaxOrder) +
                         " would overflow the factorial weights");
    }
}

// Append all alpha with the given suffix sum, lexicographically ascending.
void emit_degree(int remaining_coords, int remaining_sum, std::vector<int>& prefix,
                 std::vector<MultiIndex>& out) {
    if (remaining_coords == 1) {
        prefix.push_back(remaining_sum);
        out.push_back(MultiIndex{prefix});
        prefix.pop_back();
        return;
    }
    for (int a = 0; a <= remaining_sum; ++a) {
        prefix.push_back(a);
        emit_degree(remaining_coords - 1, remaining_sum - a, prefix, out);
        prefix.pop_back();
    }
}

}  // namespace

MultiIndexSet::MultiIndexSet(int dimension, int order)
    : dimension_(dimension), order_(order) {
    check_bounds(dimension, order);
    std::vector<int> prefix;
    prefix.reserve(static_cast<std::size_t>(dimension));
    for (int degree = 2; degree <= order; ++degree) {
        emit_degree(dimension, degree, prefix, indices_);
    }
    compute_weights();
}

MultiIndexSet::MultiIndexSet(int dimension, int order, std::vector<MultiIndex> indices)
    : dimension_(dimension), order_(order), indices_(std::move(indices)) {
    check_bounds(dimension, order);
    validate();
    compute_weights();
}

void MultiIndexSet::compute_weights() {
    weights_.resize(indices_.size());
    for (std::size_t m = 0; m < indices_.size(); ++m) {
        std::int64_t w = 1;
        for (int e : indices_[m].entries) w *= factorial64(e);
        weights_[m] = w;
    }
}

void MultiIndexSet::validate() const {
    std::set<std::vector<int>> seen;
    for (const MultiIndex& alpha : indices_) {
        if (static_cast<int>(alpha.entries.size()) != dimension_) {
            throw UsageError("index set: index dimension mismatch");
        }
        for (int e : alpha.entries) {
            if (e < 0) throw UsageError("index set: negative entry");
        }
        const int degree = alpha.total_degree();
        if (degree < 2 || degree > order_) {
            throw UsageError("index set: total degree " + std::to_string(degree) +
                             " outside [2, " + std::to_string(order_) + "]");
        }
        if (!seen.insert(alpha.entries).second) {
            throw UsageError("index set: duplicate index");
        }
    }
    if (static_cast<std::int64_t>(indices_.size()) != coefficient_count(dimension_, order_)) {
        throw UsageError("index set: incomplete index list (" +
                         std::to_string(indices_.size()) + " of " +
                         std::to_string(coefficient_count(dimension_, order_)) + ")");
    }
}

MultiIndexSet build_index_set(int dimension, int order) {
    return MultiIndexSet(dimension, order);
}

std::int64_t coefficient_count(int dimension, int order) {
    check_bounds(dimension, order);
    return binomial64(dimension + order, order) - 1 - dimension;
}

}  // namespace snp
