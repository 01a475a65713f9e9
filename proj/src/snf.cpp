#include <bogomolov/homology.hpp>

#include <algorithm>
#include <limits>

namespace bogomolov {

namespace {

struct Overflow {};

// --- scalar kernels ------------------------------------------------------------

inline bool is_zero(std::int64_t a) { return a == 0; }
inline bool is_zero(const mpz_class& a) { return sgn(a) == 0; }
inline bool is_unit(std::int64_t a) { return a == 1 || a == -1; }
inline bool is_unit(const mpz_class& a) { return mpz_cmpabs_ui(a.get_mpz_t(), 1) == 0; }
inline int sign(std::int64_t a) { return (a > 0) - (a < 0); }
inline int sign(const mpz_class& a) { return sgn(a); }

inline std::int64_t abs_checked(std::int64_t a) {
  if (a == std::numeric_limits<std::int64_t>::min()) throw Overflow{};
  return a < 0 ? -a : a;
}
inline mpz_class abs_checked(const mpz_class& a) { return abs(a); }

inline bool abs_less(std::int64_t a, std::int64_t b) {
  return abs_checked(a) < abs_checked(b);
}
inline bool abs_less(const mpz_class& a, const mpz_class& b) { return mpz_cmpabs(a.get_mpz_t(), b.get_mpz_t()) < 0; }

// a - q*b
inline std::int64_t sub_mul(std::int64_t a, std::int64_t q, std::int64_t b) {
  std::int64_t prod, out;
  if (__builtin_mul_overflow(q, b, &prod) || __builtin_sub_overflow(a, prod, &out))
    throw Overflow{};
  return out;
}
inline mpz_class sub_mul(const mpz_class& a, const mpz_class& q, const mpz_class& b) {
  return a - q * b;
}

inline std::int64_t add_checked(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out)) throw Overflow{};
  return out;
}
inline mpz_class add_checked(const mpz_class& a, const mpz_class& b) { return a + b; }

inline std::int64_t neg(std::int64_t a) {
  if (a == std::numeric_limits<std::int64_t>::min()) throw Overflow{};
  return -a;
}
inline mpz_class neg(const mpz_class& a) { return -a; }

// truncated quotient
inline std::int64_t quot(std::int64_t a, std::int64_t b) {
  if (a == std::numeric_limits<std::int64_t>::min() && b == -1) throw Overflow{};
  return a / b;
}
inline mpz_class quot(const mpz_class& a, const mpz_class& b) { return a / b; }

inline bool divides(std::int64_t d, std::int64_t a) { return a % d == 0; }
inline bool divides(const mpz_class& d, const mpz_class& a) {
  return mpz_divisible_p(a.get_mpz_t(), d.get_mpz_t()) != 0;
}

// g = gcd(a, b) = s*a + t*b with g > 0; a != 0
inline void ext_gcd(std::int64_t a, std::int64_t b, std::int64_t& g, std::int64_t& s,
                    std::int64_t& t) {
  std::int64_t r0 = a, r1 = b, s0 = 1, s1 = 0, t0 = 0, t1 = 1;
  while (r1 != 0) {
    std::int64_t q = quot(r0, r1);
    std::int64_t r2 = sub_mul(r0, q, r1), s2 = sub_mul(s0, q, s1), t2 = sub_mul(t0, q, t1);
    r0 = r1, r1 = r2, s0 = s1, s1 = s2, t0 = t1, t1 = t2;
  }
  if (r0 < 0) r0 = neg(r0), s0 = neg(s0), t0 = neg(t0);
  g = r0, s = s0, t = t0;
}
inline void ext_gcd(const mpz_class& a, const mpz_class& b, mpz_class& g, mpz_class& s,
                    mpz_class& t) {
  mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
}

inline mpz_class to_mpz(std::int64_t a) { return mpz_class(static_cast<long>(a)); }
inline mpz_class to_mpz(const mpz_class& a) { return a; }

// --- dense SNF -------------------------------------------------------------------

template <class T>
struct DenseSnf {
  std::vector<std::vector<T>> a;
  std::size_t m = 0, n = 0;
  bool track = false;
  std::vector<std::vector<T>> left, left_inv, right;

  void init_transforms() {
    auto eye = [](std::size_t k) {
      std::vector<std::vector<T>> e(k, std::vector<T>(k, T(0)));
      for (std::size_t i = 0; i < k; ++i) e[i][i] = T(1);
      return e;
    };
    left = eye(m);
    left_inv = eye(m);
    right = eye(n);
  }

  // row_i += q * row_t
  void row_add(std::size_t i, std::size_t t, const T& q) {
    if (is_zero(q)) return;
    const T nq = neg(q);
    for (std::size_t j = 0; j < n; ++j)
      if (!is_zero(a[t][j])) a[i][j] = sub_mul(a[i][j], nq, a[t][j]);
    if (track) {
      for (std::size_t j = 0; j < m; ++j)
        if (!is_zero(left[t][j])) left[i][j] = sub_mul(left[i][j], nq, left[t][j]);
      // inverse: col_t -= q * col_i
      for (std::size_t j = 0; j < m; ++j)
        if (!is_zero(left_inv[j][i]))
          left_inv[j][t] = sub_mul(left_inv[j][t], q, left_inv[j][i]);
    }
  }
  // col_j += q * col_t
  void col_add(std::size_t j, std::size_t t, const T& q) {
    if (is_zero(q)) return;
    const T nq = neg(q);
    for (std::size_t i = 0; i < m; ++i)
      if (!is_zero(a[i][t])) a[i][j] = sub_mul(a[i][j], nq, a[i][t]);
    if (track)
      for (std::size_t i = 0; i < n; ++i)
        if (!is_zero(right[i][t])) right[i][j] = sub_mul(right[i][j], nq, right[i][t]);
  }
  void swap_rows(std::size_t i, std::size_t t) {
    std::swap(a[i], a[t]);
    if (track) {
      std::swap(left[i], left[t]);
      for (auto& row : left_inv) std::swap(row[i], row[t]);
    }
  }
  void swap_cols(std::size_t j, std::size_t t) {
    for (auto& row : a) std::swap(row[j], row[t]);
    if (track)
      for (auto& row : right) std::swap(row[j], row[t]);
  }
  void negate_row(std::size_t t) {
    for (auto& x : a[t]) x = neg(x);
    if (track) {
      for (auto& x : left[t]) x = neg(x);
      for (auto& row : left_inv) row[t] = neg(row[t]);
    }
  }

  std::vector<T> run() {
    if (track) init_transforms();
    std::vector<T> diag;
    for (std::size_t t = 0; t < std::min(m, n); ++t) {
      // smallest non-zero entry of the trailing block
      std::size_t pr = m, pc = n;
      for (std::size_t i = t; i < m; ++i)
        for (std::size_t j = t; j < n; ++j)
          if (!is_zero(a[i][j]) && (pr == m || abs_less(a[i][j], a[pr][pc]))) {
            pr = i;
            pc = j;
          }
      if (pr == m) break;
      if (pr != t) swap_rows(pr, t);
      if (pc != t) swap_cols(pc, t);
      while (true) {
        bool changed = false;
        for (std::size_t i = t + 1; i < m; ++i)
          while (!is_zero(a[i][t])) {
            row_add(i, t, neg(quot(a[i][t], a[t][t])));
            if (!is_zero(a[i][t])) {
              swap_rows(i, t);
              changed = true;
            }
          }
        for (std::size_t j = t + 1; j < n; ++j)
          while (!is_zero(a[t][j])) {
            col_add(j, t, neg(quot(a[t][j], a[t][t])));
            if (!is_zero(a[t][j])) {
              swap_cols(j, t);
              changed = true;
            }
          }
        if (changed) continue;
        bool fixed = false;
        for (std::size_t i = t + 1; i < m && !fixed; ++i)
          for (std::size_t j = t + 1; j < n && !fixed; ++j)
            if (!divides(a[t][t], a[i][j])) {
              row_add(t, i, T(1));
              fixed = true;
            }
        if (!fixed) break;
      }
      if (sign(a[t][t]) < 0) negate_row(t);
      diag.push_back(a[t][t]);
    }
    return diag;
  }
};

DenseMatrix to_mpz_matrix(const std::vector<std::vector<std::int64_t>>& d) {
  DenseMatrix out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    for (auto v : d[i]) out[i].push_back(to_mpz(v));
  return out;
}

template <class T>
SnfResult finish_dense(std::vector<T> diag) {
  SnfResult r;
  r.rank = diag.size();
  for (auto& d : diag) r.invariants.push_back(to_mpz(d));
  return r;
}

// --- sparse unit-pivot elimination -------------------------------------------------

template <class T>
struct SparseRow {
  std::vector<std::uint32_t> cols;
  std::vector<T> vals;
  bool empty() const { return cols.empty(); }
};

// Unit pivots kept in fully reduced form: every pivot row has a 1 in its own
// column and no entries in any other pivot column, so reducing a new row
// takes one subtraction per pivot column it touches.
template <class T>
class UnitEliminator {
 public:
  explicit UnitEliminator(std::size_t ncols)
      : pivot_of_col_(ncols, -1), acc_(ncols, T(0)), touched_flag_(ncols, 0) {}

  enum class Outcome { Zero, Pivot, Leftover };

  Outcome insert(const SparseRow<T>& row, SparseRow<T>& leftover) {
    SparseRow<T> r = reduce(row);
    if (r.empty()) return Outcome::Zero;
    // unit entry in the sparsest column position: first one found
    std::size_t best = r.cols.size();
    for (std::size_t k = 0; k < r.cols.size(); ++k)
      if (is_unit(r.vals[k])) {
        best = k;
        break;
      }
    if (best == r.cols.size()) {
      leftover = std::move(r);
      return Outcome::Leftover;
    }
    if (sign(r.vals[best]) < 0)
      for (auto& v : r.vals) v = neg(v);
    const std::uint32_t c = r.cols[best];
    // clear column c from the existing pivot rows
    for (auto& p : pivots_) {
      auto it = std::lower_bound(p.cols.begin(), p.cols.end(), c);
      if (it == p.cols.end() || *it != c) continue;
      const T f = p.vals[it - p.cols.begin()];
      p = combine(p, f, r);
    }
    pivot_of_col_[c] = std::int32_t(pivots_.size());
    pivots_.push_back(std::move(r));
    return Outcome::Pivot;
  }

  std::size_t pivot_count() const { return pivots_.size(); }
  bool is_pivot_col(std::uint32_t c) const { return pivot_of_col_[c] >= 0; }

 private:
  // a - f * b
  static SparseRow<T> combine(const SparseRow<T>& a, const T& f, const SparseRow<T>& b) {
    SparseRow<T> out;
    std::size_t i = 0, j = 0;
    while (i < a.cols.size() || j < b.cols.size()) {
      if (j == b.cols.size() || (i < a.cols.size() && a.cols[i] < b.cols[j])) {
        out.cols.push_back(a.cols[i]);
        out.vals.push_back(a.vals[i++]);
      } else if (i == a.cols.size() || b.cols[j] < a.cols[i]) {
        out.cols.push_back(b.cols[j]);
        out.vals.push_back(sub_mul(T(0), f, b.vals[j++]));
      } else {
        T v = sub_mul(a.vals[i], f, b.vals[j]);
        if (!is_zero(v)) {
          out.cols.push_back(a.cols[i]);
          out.vals.push_back(std::move(v));
        }
        ++i, ++j;
      }
    }
    return out;
  }

  void add(std::uint32_t c, const T& v) {
    if (!touched_flag_[c]) {
      touched_flag_[c] = 1;
      touched_.push_back(c);
      acc_[c] = T(0);
    }
    acc_[c] = add_checked(acc_[c], v);
  }

  SparseRow<T> reduce(const SparseRow<T>& row) {
    for (std::size_t k = 0; k < row.cols.size(); ++k) add(row.cols[k], row.vals[k]);
    for (std::size_t k = 0; k < row.cols.size(); ++k) {
      const std::int32_t pi = pivot_of_col_[row.cols[k]];
      if (pi < 0) continue;
      const T f = acc_[row.cols[k]];
      if (is_zero(f)) continue;
      const auto& p = pivots_[pi];
      for (std::size_t e = 0; e < p.cols.size(); ++e) add(p.cols[e], sub_mul(T(0), f, p.vals[e]));
    }
    SparseRow<T> out;
    std::sort(touched_.begin(), touched_.end());
    for (auto c : touched_) {
      if (!is_zero(acc_[c])) {
        out.cols.push_back(c);
        out.vals.push_back(acc_[c]);
      }
      touched_flag_[c] = 0;
    }
    touched_.clear();
    return out;
  }

  std::vector<std::int32_t> pivot_of_col_;
  std::vector<SparseRow<T>> pivots_;
  std::vector<T> acc_;
  std::vector<char> touched_flag_;
  std::vector<std::uint32_t> touched_;
};

template <class T>
SnfResult sparse_snf(const SparseIntMatrix& m) {
  UnitEliminator<T> elim(m.cols);
  std::vector<SparseRow<T>> leftovers;
  SparseRow<T> row, left;
  auto flush = [&] {
    if (row.empty()) return;
    if (elim.insert(row, left) == UnitEliminator<T>::Outcome::Leftover)
      leftovers.push_back(std::move(left));
    row = {};
  };
  std::uint32_t current = std::numeric_limits<std::uint32_t>::max();
  for (const auto& t : m.entries) {
    if (t.row != current) {
      flush();
      current = t.row;
    }
    if (t.value == 0) continue;
    row.cols.push_back(t.col);
    row.vals.push_back(T(t.value));
  }
  flush();

  // Pivots found later may reduce earlier leftovers.
  bool changed = true;
  while (changed && !leftovers.empty()) {
    changed = false;
    std::vector<SparseRow<T>> next;
    for (auto& l : leftovers) {
      switch (elim.insert(l, left)) {
        case UnitEliminator<T>::Outcome::Pivot:
          changed = true;
          break;
        case UnitEliminator<T>::Outcome::Leftover:
          next.push_back(std::move(left));
          break;
        case UnitEliminator<T>::Outcome::Zero:
          break;
      }
    }
    leftovers = std::move(next);
  }

  SnfResult r;
  r.unit_pivots = elim.pivot_count();
  r.leftover_rows = leftovers.size();
  std::vector<mpz_class> tail;
  if (!leftovers.empty()) {
    std::vector<std::uint32_t> used;
    for (auto& l : leftovers)
      for (auto c : l.cols) used.push_back(c);
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    // Row echelon form of the leftovers over the remaining columns, built
    // with unimodular 2x2 gcd steps; at most used.size() rows survive.
    const std::size_t k = used.size();
    std::vector<std::vector<T>> echelon(k);
    for (auto& l : leftovers) {
      std::vector<T> v(k, T(0));
      for (std::size_t e = 0; e < l.cols.size(); ++e) {
        if (elim.is_pivot_col(l.cols[e]))
          throw Error(ErrorKind::InternalError, "leftover hits a pivot column");
        v[std::lower_bound(used.begin(), used.end(), l.cols[e]) - used.begin()] = l.vals[e];
      }
      for (std::size_t c = 0; c < k; ++c) {
        if (is_zero(v[c])) continue;
        auto& b = echelon[c];
        if (b.empty()) {
          if (sign(v[c]) < 0)
            for (auto& x : v) x = neg(x);
          b = std::move(v);
          break;
        }
        T g, s, t;
        ext_gcd(b[c], v[c], g, s, t);
        const T a_g = quot(b[c], g), v_g = quot(v[c], g);
        for (std::size_t j = c; j < k; ++j) {
          T top = add_checked(sub_mul(T(0), neg(s), b[j]), sub_mul(T(0), neg(t), v[j]));
          T bottom = sub_mul(sub_mul(T(0), neg(a_g), v[j]), v_g, b[j]);
          b[j] = std::move(top);
          v[j] = std::move(bottom);
        }
      }
    }
    DenseSnf<T> d;
    d.n = k;
    for (auto& row : echelon)
      if (!row.empty()) d.a.push_back(std::move(row));
    d.m = d.a.size();
    for (auto& v : d.run()) tail.push_back(to_mpz(v));
  }
  r.rank = r.unit_pivots + tail.size();
  r.invariants.assign(r.unit_pivots, mpz_class(1));
  r.invariants.insert(r.invariants.end(), tail.begin(), tail.end());
  return r;
}

}  // namespace

// --- SparseIntMatrix ---------------------------------------------------------------

void SparseIntMatrix::normalize() {
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<Triplet> out;
  for (const auto& t : entries) {
    if (t.row >= rows || t.col >= cols)
      throw Error(ErrorKind::DimensionMismatch, "triplet outside matrix bounds");
    if (!out.empty() && out.back().row == t.row && out.back().col == t.col)
      out.back().value += t.value;
    else
      out.push_back(t);
  }
  out.erase(std::remove_if(out.begin(), out.end(), [](const Triplet& t) { return t.value == 0; }),
            out.end());
  entries = std::move(out);
}

std::vector<std::vector<std::int64_t>> SparseIntMatrix::dense() const {
  std::vector<std::vector<std::int64_t>> d(rows, std::vector<std::int64_t>(cols, 0));
  for (const auto& t : entries) d[t.row][t.col] += t.value;
  return d;
}

SparseIntMatrix SparseIntMatrix::from_dense(const std::vector<std::vector<std::int64_t>>& d) {
  SparseIntMatrix m;
  m.rows = d.size();
  m.cols = d.empty() ? 0 : d[0].size();
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d[i].size(); ++j)
      if (d[i][j]) m.entries.push_back({std::uint32_t(i), std::uint32_t(j), d[i][j]});
  return m;
}

SparseIntMatrix SparseIntMatrix::transposed() const {
  SparseIntMatrix t;
  t.rows = cols;
  t.cols = rows;
  for (const auto& e : entries) t.entries.push_back({e.col, e.row, e.value});
  t.normalize();
  return t;
}

SparseIntMatrix SparseIntMatrix::stacked(const SparseIntMatrix& below) const {
  if (below.cols != cols)
    throw Error(ErrorKind::DimensionMismatch, "stacking matrices with different widths");
  SparseIntMatrix s = *this;
  s.rows = rows + below.rows;
  for (const auto& e : below.entries)
    s.entries.push_back({std::uint32_t(e.row + rows), e.col, e.value});
  return s;
}

AbelianInvariants SnfResult::torsion() const {
  std::vector<std::uint64_t> out;
  for (const auto& d : invariants) {
    if (d == 1) continue;
    if (!d.fits_ulong_p())
      throw Error(ErrorKind::InternalError, "invariant factor exceeds 64 bits");
    out.push_back(d.get_ui());
  }
  return AbelianInvariants{std::move(out)};
}

SnfResult smith_normal_form_dense(DenseMatrix m, bool want_transforms) {
  DenseSnf<mpz_class> s;
  s.m = m.size();
  s.n = m.empty() ? 0 : m[0].size();
  s.a = std::move(m);
  s.track = want_transforms;
  auto diag = s.run();
  SnfResult r = finish_dense(std::move(diag));
  r.used_bignum = true;
  if (want_transforms) {
    r.left = std::move(s.left);
    r.left_inverse = std::move(s.left_inv);
    r.right = std::move(s.right);
  }
  return r;
}

SnfResult smith_normal_form(const SparseIntMatrix& m, bool want_transforms,
                            SnfStrategy strategy) {
  if (want_transforms || strategy == SnfStrategy::Dense)
    return smith_normal_form_dense(to_mpz_matrix(m.dense()), want_transforms);
  SparseIntMatrix sorted = m;
  sorted.normalize();
  try {
    return sparse_snf<std::int64_t>(sorted);
  } catch (const Overflow&) {
    SnfResult r = sparse_snf<mpz_class>(sorted);
    r.used_bignum = true;
    return r;
  }
}

}  // namespace bogomolov
