#include "clonekit/tuples.hpp"

#include <string>

namespace clonekit {

std::size_t tuple_count(int d, int n) {
  if (d < 0 || n < 0) throw std::invalid_argument("negative domain size or arity");
  std::size_t r = 1;
  for (int i = 0; i < n; ++i) {
    r *= static_cast<std::size_t>(d);
    if (r > (std::size_t{1} << 40)) throw std::length_error("tuple space too large: " + std::to_string(d) + "^" + std::to_string(n));
  }
  return r;
}

std::size_t rank_tuple(int d, const Tuple& t) {
  std::size_t r = 0;
  for (Value v : t) {
    if (v < 0 || v >= d) throw std::out_of_range("tuple entry " + std::to_string(v) + " outside domain of size " + std::to_string(d));
    r = r * static_cast<std::size_t>(d) + static_cast<std::size_t>(v);
  }
  return r;
}

Tuple unrank_tuple(int d, int n, std::size_t index) {
  Tuple t(static_cast<std::size_t>(n), 0);
  for (int i = n - 1; i >= 0; --i) {
    t[static_cast<std::size_t>(i)] = static_cast<Value>(index % static_cast<std::size_t>(d));
    index /= static_cast<std::size_t>(d);
  }
  return t;
}

bool next_tuple(Tuple& t, int d) {
  for (std::size_t i = t.size(); i-- > 0;) {
    if (++t[i] < d) return true;
    t[i] = 0;
  }
  return false;
}

bool next_index_tuple(std::vector<std::size_t>& t, std::size_t bound) {
  for (std::size_t i = t.size(); i-- > 0;) {
    if (++t[i] < bound) return true;
    t[i] = 0;
  }
  return false;
}

std::vector<std::vector<int>> combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > n) return out;
  std::vector<int> c(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) c[static_cast<std::size_t>(i)] = i;
  while (true) {
    out.push_back(c);
    int i = k - 1;
    while (i >= 0 && c[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++c[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

}  // namespace clonekit
