#pragma once

#include <cstdint>
#include <memory>
#include <vector>

namespace nullforge {

using MultiIndex = std::vector<int>;

inline int mi_order(const MultiIndex& b) {
  int s = 0;
  for (int e : b) s += e;
  return s;
}

// Number of multi-indices of total order between 1 and m in d variables,
// eta = sum_{k=1..m} C(d+k-1, k).
std::int64_t derivative_tuple_size(int d, int m);

// All multi-indices with 0 <= |beta| <= m in graded-lexicographic order
// (ascending total order; within an order, descending on the first axis).
// This fixes the layout used by derivative bundles and measurement vectors.
class MultiIndexTable {
 public:
  MultiIndexTable(int dim, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(indices_.size()); }

  const MultiIndex& at(int i) const { return indices_[i]; }
  const std::vector<MultiIndex>& all() const { return indices_; }

  // position of a multi-index; -1 if |beta| > order
  int position(const MultiIndex& beta) const;

  // position of alpha + beta; -1 if the sum exceeds the order
  int product_position(int a, int b) const { return product_[a * size() + b]; }

  double factorial_of(int i) const { return factorials_[i]; }

  static std::shared_ptr<const MultiIndexTable> get(int dim, int order);

 private:
  int dim_, order_;
  std::vector<MultiIndex> indices_;
  std::vector<int> product_;
  std::vector<double> factorials_;
};

}  // namespace nullforge
