#include "nullforge/multiindex.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>

namespace nullforge {

namespace {

std::int64_t binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void enumerate_order(int dim, int k, MultiIndex& cur, int pos, std::vector<MultiIndex>& out) {
  if (pos == dim - 1) {
    cur[pos] = k;
    out.push_back(cur);
    return;
  }
  // descending on the leading axis
  for (int e = k; e >= 0; --e) {
    cur[pos] = e;
    enumerate_order(dim, k - e, cur, pos + 1, out);
  }
}

}  // namespace

std::int64_t derivative_tuple_size(int d, int m) {
  std::int64_t eta = 0;
  for (int k = 1; k <= m; ++k) eta += binom(d + k - 1, k);
  return eta;
}

MultiIndexTable::MultiIndexTable(int dim, int order) : dim_(dim), order_(order) {
  if (dim < 1) throw std::invalid_argument("MultiIndexTable: dim must be >= 1");
  if (order < 0) throw std::invalid_argument("MultiIndexTable: order must be >= 0");
  MultiIndex cur(dim, 0);
  for (int k = 0; k <= order; ++k) enumerate_order(dim, k, cur, 0, indices_);

  const int n = size();
  product_.assign(static_cast<std::size_t>(n) * n, -1);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      MultiIndex s(dim);
      for (int i = 0; i < dim; ++i) s[i] = indices_[a][i] + indices_[b][i];
      product_[a * n + b] = position(s);
    }
  }

  factorials_.resize(n);
  for (int i = 0; i < n; ++i) {
    double f = 1.0;
    for (int e : indices_[i])
      for (int j = 2; j <= e; ++j) f *= j;
    factorials_[i] = f;
  }
}

int MultiIndexTable::position(const MultiIndex& beta) const {
  if (mi_order(beta) > order_) return -1;
  auto it = std::find(indices_.begin(), indices_.end(), beta);
  if (it == indices_.end()) return -1;
  return static_cast<int>(it - indices_.begin());
}

std::shared_ptr<const MultiIndexTable> MultiIndexTable::get(int dim, int order) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const MultiIndexTable>> cache;
  std::scoped_lock lock(mu);
  auto key = std::make_pair(dim, order);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto t = std::make_shared<const MultiIndexTable>(dim, order);
  cache[key] = t;
  return t;
}

}  // namespace nullforge
