#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace clonekit {

using Value = int;
using Tuple = std::vector<Value>;

// d^n, throws on overflow past 2^40.
std::size_t tuple_count(int d, int n);

// Lexicographic rank over {0..d-1}^n, first coordinate most significant.
std::size_t rank_tuple(int d, const Tuple& t);
Tuple unrank_tuple(int d, int n, std::size_t index);

// Advance t to the next tuple in lexicographic order; false after the last one.
bool next_tuple(Tuple& t, int d);

// Odometer over {0..bound-1}^k; false after the last tuple.
bool next_index_tuple(std::vector<std::size_t>& t, std::size_t bound);

// All k-element subsets of {0..n-1} as sorted index vectors, in lexicographic order.
std::vector<std::vector<int>> combinations(int n, int k);

}  // namespace clonekit
