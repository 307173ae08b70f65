#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgbp {

using Index = std::int64_t;
using Scope = std::vector<int>;

/// Sorted-set helpers on scopes. Every scope in this library is kept sorted
/// ascending and duplicate-free.
inline Scope scope_union(const Scope& a, const Scope& b) {
  Scope out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline Scope scope_intersection(const Scope& a, const Scope& b) {
  Scope out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline Scope scope_difference(const Scope& a, const Scope& b) {
  Scope out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline bool scope_includes(const Scope& super, const Scope& sub) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

inline bool is_sorted_unique(std::span<const int> s) {
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i - 1] >= s[i]) return false;
  return true;
}

inline Index ipow(Index base, std::size_t exp) {
  Index r = 1;
  for (std::size_t i = 0; i < exp; ++i) r *= base;
  return r;
}

/// Row-major strides of a table over `scope`: the first variable is the
/// slowest-varying axis.
inline std::vector<Index> row_major_strides(std::size_t rank, int d) {
  std::vector<Index> s(rank, 1);
  for (std::size_t k = rank; k-- > 1;) s[k - 1] = s[k] * d;
  return s;
}

/// For each variable of `loop`, the stride of that variable inside a table over
/// `table_scope` (0 when the table does not depend on it).
inline std::vector<Index> strides_in(const Scope& table_scope, std::span<const int> loop, int d) {
  const auto own = row_major_strides(table_scope.size(), d);
  std::vector<Index> out(loop.size(), 0);
  for (std::size_t k = 0; k < loop.size(); ++k) {
    auto it = std::lower_bound(table_scope.begin(), table_scope.end(), loop[k]);
    if (it != table_scope.end() && *it == loop[k]) out[k] = own[static_cast<std::size_t>(it - table_scope.begin())];
  }
  return out;
}

/// Visits every assignment of `rank` variables with alphabet `d` in
/// lexicographic order (first axis slowest), keeping N linear offsets in sync.
/// `fn(offsets)` is called d^rank times; the loop counter itself is the
/// row-major index over the loop order.
template <std::size_t N, class Fn>
void for_each_assignment(int d, std::size_t rank, const std::array<std::vector<Index>, N>& strides,
                         std::array<Index, N> base, Fn&& fn) {
  std::array<Index, N> off = base;
  if (rank == 0) {
    fn(off);
    return;
  }
  std::vector<int> digit(rank, 0);
  const std::size_t inner = rank - 1;
  while (true) {
    for (int v = 0; v < d; ++v) {
      fn(off);
      for (std::size_t t = 0; t < N; ++t) off[t] += strides[t][inner];
    }
    for (std::size_t t = 0; t < N; ++t) off[t] -= d * strides[t][inner];
    std::size_t k = inner;
    while (true) {
      if (k == 0) return;
      --k;
      if (++digit[k] < d) {
        for (std::size_t t = 0; t < N; ++t) off[t] += strides[t][k];
        break;
      }
      digit[k] = 0;
      for (std::size_t t = 0; t < N; ++t) off[t] -= (d - 1) * strides[t][k];
    }
  }
}

/// Dense nonnegative table over the joint states of a sorted variable scope,
/// stored lexicographically with the first scope variable slowest.
template <class Scalar>
class Table {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Table() = default;

  Table(Scope scope, int alphabet, Scalar fill = Scalar(1))
      : scope_(std::move(scope)), d_(alphabet), values_(Vector::Constant(ipow(alphabet, scope_.size()), fill)) {
    check_scope();
  }

  Table(Scope scope, int alphabet, Vector values) : scope_(std::move(scope)), d_(alphabet), values_(std::move(values)) {
    check_scope();
    if (values_.size() != ipow(d_, scope_.size()))
      throw std::invalid_argument("table length " + std::to_string(values_.size()) + " does not match d^|scope| = " +
                                  std::to_string(ipow(d_, scope_.size())));
  }

  const Scope& scope() const { return scope_; }
  int alphabet() const { return d_; }
  std::size_t rank() const { return scope_.size(); }
  Index size() const { return values_.size(); }

  const Vector& values() const { return values_; }
  Vector& values() { return values_; }

  Scalar operator[](Index i) const { return values_[i]; }
  Scalar& operator[](Index i) { return values_[i]; }

  /// Linear index of a local assignment (one state per scope variable).
  Index linearize(std::span<const int> local) const {
    Index idx = 0;
    for (std::size_t k = 0; k < scope_.size(); ++k) idx = idx * d_ + local[k];
    return idx;
  }

  std::vector<int> delinearize(Index idx) const {
    std::vector<int> local(scope_.size());
    for (std::size_t k = scope_.size(); k-- > 0;) {
      local[k] = static_cast<int>(idx % d_);
      idx /= d_;
    }
    return local;
  }

  /// Value at a global assignment indexed by variable id.
  Scalar at_global(std::span<const int> global) const {
    Index idx = 0;
    for (int v : scope_) idx = idx * d_ + global[static_cast<std::size_t>(v)];
    return values_[idx];
  }

  Scalar sum() const { return values_.sum(); }

 private:
  void check_scope() const {
    if (d_ < 1) throw std::invalid_argument("alphabet size must be positive");
    if (!is_sorted_unique(scope_)) throw std::invalid_argument("table scope must be sorted and duplicate-free");
  }

  Scope scope_;
  int d_ = 2;
  Vector values_;
};

using FactorTable = Table<double>;

/// Evaluates `a` broadcast onto `target` (a superset of a's scope).
template <class Scalar>
Table<Scalar> broadcast(const Table<Scalar>& a, const Scope& target) {
  if (!scope_includes(target, a.scope())) throw std::invalid_argument("broadcast target must contain the table scope");
  const int d = a.alphabet();
  Table<Scalar> out(target, d, Scalar(0));
  std::array<std::vector<Index>, 1> st{strides_in(a.scope(), target, d)};
  Index i = 0;
  for_each_assignment<1>(d, target.size(), st, {0}, [&](const std::array<Index, 1>& o) { out[i++] = a[o[0]]; });
  return out;
}

enum class PointwiseOp { multiply, divide };

/// Pointwise product or quotient under broadcasting; the result lives on the
/// sorted union of both scopes. Division treats 0/0 as 0 and rejects x/0 for
/// nonzero x.
template <class Scalar>
Table<Scalar> pointwise(PointwiseOp op, const Table<Scalar>& a, const Table<Scalar>& b) {
  if (a.alphabet() != b.alphabet()) throw std::invalid_argument("alphabet mismatch in pointwise operation");
  const int d = a.alphabet();
  Scope u = scope_union(a.scope(), b.scope());
  Table<Scalar> out(u, d, Scalar(0));
  std::array<std::vector<Index>, 2> st{strides_in(a.scope(), u, d), strides_in(b.scope(), u, d)};
  Index i = 0;
  for_each_assignment<2>(d, u.size(), st, {0, 0}, [&](const std::array<Index, 2>& o) {
    const Scalar x = a[o[0]];
    const Scalar y = b[o[1]];
    if (op == PointwiseOp::multiply) {
      out[i] = x * y;
    } else if (y == Scalar(0)) {
      if (x != Scalar(0)) throw std::domain_error("division of a nonzero entry by zero");
      out[i] = Scalar(0);
    } else {
      out[i] = x / y;
    }
    ++i;
  });
  return out;
}

template <class Scalar>
Table<Scalar> operator*(const Table<Scalar>& a, const Table<Scalar>& b) {
  return pointwise(PointwiseOp::multiply, a, b);
}

/// Sums out every variable of `a` not in `keep` (keep must be a subset).
template <class Scalar>
Table<Scalar> marginalize(const Table<Scalar>& a, const Scope& keep) {
  if (!scope_includes(a.scope(), keep)) throw std::invalid_argument("marginal scope must be a subset of the table scope");
  const int d = a.alphabet();
  Table<Scalar> out(keep, d, Scalar(0));
  std::array<std::vector<Index>, 1> st{strides_in(keep, a.scope(), d)};
  Index i = 0;
  for_each_assignment<1>(d, a.rank(), st, {0}, [&](const std::array<Index, 1>& o) { out[o[0]] += a[i++]; });
  return out;
}

/// Scales the table to sum 1. Returns false (and leaves it untouched) when the
/// sum is not positive.
template <class Scalar>
bool normalize(Table<Scalar>& t) {
  const Scalar s = t.sum();
  if (!(s > Scalar(0))) return false;
  t.values() /= s;
  return true;
}

}  // namespace sgbp
