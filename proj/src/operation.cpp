#include "clonekit/operation.hpp"

#include <algorithm>
#include <sstream>

namespace clonekit {

FiniteOperation::FiniteOperation(int domain_size, int arity, std::vector<Value> table)
    : d_(domain_size), n_(arity), table_(std::move(table)) {
  if (d_ < 1) throw std::invalid_argument("domain size must be positive");
  if (n_ < 1) throw std::invalid_argument("arity must be at least 1");
  if (table_.size() != tuple_count(d_, n_)) {
    throw std::invalid_argument("table length " + std::to_string(table_.size()) + " does not match " +
                                std::to_string(d_) + "^" + std::to_string(n_));
  }
  for (std::size_t i = 0; i < table_.size(); ++i) {
    if (table_[i] < 0 || table_[i] >= d_) {
      throw std::invalid_argument("table entry " + std::to_string(i) + " = " + std::to_string(table_[i]) +
                                  " outside domain");
    }
  }
}

FiniteOperation FiniteOperation::projection(int d, int n, int k) {
  if (k < 1 || k > n) throw std::invalid_argument("projection index out of range");
  return from_function(d, n, [k](const Tuple& x) { return x[static_cast<std::size_t>(k - 1)]; });
}

FiniteOperation FiniteOperation::constant(int d, int n, Value c) {
  return FiniteOperation(d, n, std::vector<Value>(tuple_count(d, n), c));
}

FiniteOperation FiniteOperation::from_function(int d, int n, const std::function<Value(const Tuple&)>& fn) {
  std::vector<Value> table;
  table.reserve(tuple_count(d, n));
  Tuple x(static_cast<std::size_t>(n), 0);
  do {
    table.push_back(fn(x));
  } while (next_tuple(x, d));
  return FiniteOperation(d, n, std::move(table));
}

Value FiniteOperation::operator()(const Tuple& x) const {
  if (static_cast<int>(x.size()) != n_) throw std::invalid_argument("argument count does not match arity");
  return table_[rank_tuple(d_, x)];
}

bool FiniteOperation::is_constant() const {
  return std::all_of(table_.begin(), table_.end(), [&](Value v) { return v == table_.front(); });
}

int FiniteOperation::projection_index() const {
  for (int k = 1; k <= n_; ++k) {
    bool ok = true;
    Tuple x(static_cast<std::size_t>(n_), 0);
    std::size_t i = 0;
    do {
      if (table_[i++] != x[static_cast<std::size_t>(k - 1)]) {
        ok = false;
        break;
      }
    } while (next_tuple(x, d_));
    if (ok) return k;
  }
  return 0;
}

std::string FiniteOperation::to_string() const {
  std::ostringstream os;
  os << d_ << '/' << n_ << ':';
  for (std::size_t i = 0; i < table_.size(); ++i) {
    if (d_ > 10 && i > 0) os << ',';
    os << table_[i];
  }
  return os.str();
}

bool operator<(const FiniteOperation& a, const FiniteOperation& b) {
  if (a.d_ != b.d_) return a.d_ < b.d_;
  if (a.n_ != b.n_) return a.n_ < b.n_;
  return a.table_ < b.table_;
}

std::size_t OperationHash::operator()(const FiniteOperation& f) const {
  std::size_t h = static_cast<std::size_t>(f.domain_size()) * 1000003u + static_cast<std::size_t>(f.arity());
  for (Value v : f.table()) h = h * 1099511628211ull + static_cast<std::size_t>(v) + 0x9e3779b9u;
  return h;
}

FiniteOperation compose(const FiniteOperation& f, const std::vector<FiniteOperation>& gs) {
  if (static_cast<int>(gs.size()) != f.arity()) {
    throw CompositionError("outer operation has arity " + std::to_string(f.arity()) + " but " +
                               std::to_string(gs.size()) + " arguments were given",
                           -1);
  }
  const int d = f.domain_size();
  const int m = gs.front().arity();
  for (std::size_t i = 0; i < gs.size(); ++i) {
    if (gs[i].domain_size() != d) {
      throw CompositionError("argument " + std::to_string(i) + " has domain size " +
                                 std::to_string(gs[i].domain_size()) + ", expected " + std::to_string(d),
                             static_cast<int>(i));
    }
    if (gs[i].arity() != m) {
      throw CompositionError("argument " + std::to_string(i) + " has arity " + std::to_string(gs[i].arity()) +
                                 ", expected " + std::to_string(m),
                             static_cast<int>(i));
    }
  }
  const std::size_t size = tuple_count(d, m);
  std::vector<Value> table(size);
  for (std::size_t x = 0; x < size; ++x) {
    std::size_t r = 0;
    for (const auto& g : gs) r = r * static_cast<std::size_t>(d) + static_cast<std::size_t>(g.at(x));
    table[x] = f.at(r);
  }
  return FiniteOperation(d, m, std::move(table));
}

FiniteOperation compose_unary(const FiniteOperation& f, const FiniteOperation& g) { return compose(f, {g}); }

}  // namespace clonekit
