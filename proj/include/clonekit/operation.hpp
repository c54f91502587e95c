#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "clonekit/tuples.hpp"

namespace clonekit {

// Raised when compose() is handed arguments that do not fit.
class CompositionError : public std::invalid_argument {
 public:
  CompositionError(const std::string& what, int argument_index)
      : std::invalid_argument(what), argument_index_(argument_index) {}
  // 0-based position in the argument list, -1 when the outer operation is at fault.
  int argument_index() const { return argument_index_; }

 private:
  int argument_index_;
};

// An operation {0..d-1}^n -> {0..d-1} stored as its full value table.
class FiniteOperation {
 public:
  FiniteOperation() = default;
  FiniteOperation(int domain_size, int arity, std::vector<Value> table);

  static FiniteOperation projection(int d, int n, int k);  // k is 1-based
  static FiniteOperation constant(int d, int n, Value c);
  static FiniteOperation from_function(int d, int n, const std::function<Value(const Tuple&)>& fn);

  int domain_size() const { return d_; }
  int arity() const { return n_; }
  const std::vector<Value>& table() const { return table_; }
  Value at(std::size_t index) const { return table_[index]; }
  Value operator()(const Tuple& x) const;

  bool is_constant() const;
  // Returns k (1-based) if this is the k-th projection, else 0.
  int projection_index() const;

  std::string to_string() const;  // "d/n:table digits"

  friend bool operator==(const FiniteOperation& a, const FiniteOperation& b) {
    return a.d_ == b.d_ && a.n_ == b.n_ && a.table_ == b.table_;
  }
  friend bool operator!=(const FiniteOperation& a, const FiniteOperation& b) { return !(a == b); }
  friend bool operator<(const FiniteOperation& a, const FiniteOperation& b);

 private:
  int d_ = 0;
  int n_ = 0;
  std::vector<Value> table_;
};

struct OperationHash {
  std::size_t operator()(const FiniteOperation& f) const;
};

// f(g_1, ..., g_n): all g_i share one arity m, the result has arity m.
FiniteOperation compose(const FiniteOperation& f, const std::vector<FiniteOperation>& gs);

// Unary composition helper f∘g.
FiniteOperation compose_unary(const FiniteOperation& f, const FiniteOperation& g);

}  // namespace clonekit
