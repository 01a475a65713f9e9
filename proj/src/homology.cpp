#include <bogomolov/homology.hpp>

#include <algorithm>

namespace bogomolov {

namespace {

void check_cap(const GroupTable& g, std::size_t cap) {
  if (g.order() > cap)
    throw Error(ErrorKind::CapExceeded,
                "group of order " + std::to_string(g.order()) +
                    " exceeds the homology cap of " + std::to_string(cap));
}

struct Term {
  std::uint32_t col;
  std::int64_t value;
};

// Appends one boundary row, merging repeated columns.
void push_row(SparseIntMatrix& m, std::uint32_t row, std::vector<Term>& terms) {
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.col < b.col; });
  for (std::size_t k = 0; k < terms.size();) {
    std::int64_t v = 0;
    std::size_t e = k;
    for (; e < terms.size() && terms[e].col == terms[k].col; ++e) v += terms[e].value;
    if (v) m.entries.push_back({row, terms[k].col, v});
    k = e;
  }
}

}  // namespace

std::size_t bar_index(const GroupTable& g, std::initializer_list<Elem> tuple) {
  const std::size_t base = g.order() - 1;
  std::size_t idx = 0;
  for (Elem x : tuple) {
    if (x == 0 || x >= g.order())
      throw Error(ErrorKind::IndexOutOfRange, "bar tuple contains the identity");
    idx = idx * base + (x - 1);
  }
  return idx;
}

SparseIntMatrix bar_boundary(const GroupTable& g, int k, std::size_t cap) {
  check_cap(g, cap);
  const std::size_t m = g.order() - 1;
  SparseIntMatrix d;
  std::vector<Term> terms;
  switch (k) {
    case 1:
      // d₁[x] = [] - [] = 0
      d.rows = m;
      d.cols = 1;
      break;
    case 2:
      d.rows = m * m;
      d.cols = m;
      for (Elem x = 1; x <= m; ++x)
        for (Elem y = 1; y <= m; ++y) {
          terms.clear();
          terms.push_back({y - 1, 1});
          if (Elem xy = g.mul(x, y)) terms.push_back({xy - 1, -1});
          terms.push_back({x - 1, 1});
          push_row(d, std::uint32_t((x - 1) * m + (y - 1)), terms);
        }
      break;
    case 3:
      d.rows = m * m * m;
      d.cols = m * m;
      if (d.rows > std::numeric_limits<std::uint32_t>::max())
        throw Error(ErrorKind::CapExceeded, "C₃ basis too large");
      d.entries.reserve(d.rows * 4);
      for (Elem x = 1; x <= m; ++x)
        for (Elem y = 1; y <= m; ++y) {
          const Elem xy = g.mul(x, y);
          for (Elem z = 1; z <= m; ++z) {
            terms.clear();
            terms.push_back({std::uint32_t((y - 1) * m + (z - 1)), 1});
            if (xy) terms.push_back({std::uint32_t((xy - 1) * m + (z - 1)), -1});
            if (Elem yz = g.mul(y, z)) terms.push_back({std::uint32_t((x - 1) * m + (yz - 1)), 1});
            terms.push_back({std::uint32_t((x - 1) * m + (y - 1)), -1});
            push_row(d, std::uint32_t(((x - 1) * m + (y - 1)) * m + (z - 1)), terms);
          }
        }
      break;
    default:
      throw Error(ErrorKind::ValidationError, "bar_boundary supports k = 1, 2, 3");
  }
  return d;
}

HomologyResult homology_h1(const GroupTable& g, std::size_t cap) {
  HomologyResult r;
  r.degree = 1;
  if (g.order() == 1) return r;
  auto snf = smith_normal_form(bar_boundary(g, 2, cap));
  if (snf.rank != g.order() - 1)
    throw Error(ErrorKind::InternalError, "H₁ has a free part; d₂ rank " + std::to_string(snf.rank));
  r.invariants = snf.torsion();
  r.boundary_rank = snf.rank;
  return r;
}

HomologyResult homology_h2(const GroupTable& g, std::size_t cap, SnfStrategy strategy) {
  HomologyResult r;
  r.degree = 2;
  if (g.order() == 1) return r;
  const std::size_t m = g.order() - 1;
  auto snf2 = smith_normal_form(bar_boundary(g, 2, cap), false, strategy);
  auto snf3 = smith_normal_form(bar_boundary(g, 3, cap), false, strategy);
  if (snf3.rank != m * m - snf2.rank)
    throw Error(ErrorKind::InternalError,
                "rank d₃ = " + std::to_string(snf3.rank) + " but dim ker d₂ = " +
                    std::to_string(m * m - snf2.rank));
  r.invariants = snf3.torsion();
  r.boundary_rank = snf3.rank;
  return r;
}

SparseIntMatrix commuting_wedge_cycles(const GroupTable& g, std::size_t cap) {
  check_cap(g, cap);
  const std::size_t m = g.order() - 1;
  SparseIntMatrix w;
  w.cols = m * m;
  std::uint32_t row = 0;
  for (Elem x = 1; x <= m; ++x)
    for (Elem y = x + 1; y <= m; ++y) {
      if (!g.commute(x, y)) continue;
      // d₂([x|y] - [y|x]) = ([y] - [xy] + [x]) - ([x] - [yx] + [y])
      if (g.mul(x, y) != g.mul(y, x))
        throw Error(ErrorKind::InternalError, "wedge row is not a cycle");
      w.entries.push_back({row, std::uint32_t((x - 1) * m + (y - 1)), 1});
      w.entries.push_back({row, std::uint32_t((y - 1) * m + (x - 1)), -1});
      ++row;
    }
  w.rows = row;
  return w;
}

B0Result b0_homological(const GroupTable& g, std::size_t cap, SnfStrategy strategy) {
  B0Result r;
  r.order = g.order();
  if (g.order() == 1) return r;
  const std::size_t m = g.order() - 1;
  auto d2 = bar_boundary(g, 2, cap);
  auto d3 = bar_boundary(g, 3, cap);
  auto w = commuting_wedge_cycles(g, cap);
  // every wedge row must be annihilated by d₂
  {
    auto dd = d2.dense();
    for (std::size_t k = 0; k + 1 < w.entries.size(); k += 2) {
      for (std::size_t c = 0; c < m; ++c)
        if (dd[w.entries[k].col][c] + -dd[w.entries[k + 1].col][c] != 0)
          throw Error(ErrorKind::InternalError, "wedge row outside ker d₂");
    }
  }
  auto snf2 = smith_normal_form(d2, false, strategy);
  auto snf3 = smith_normal_form(d3, false, strategy);
  if (snf3.rank != m * m - snf2.rank)
    throw Error(ErrorKind::InternalError, "H₂ is not finite: rank mismatch");
  auto snfw = smith_normal_form(d3.stacked(w), false, strategy);
  if (snfw.rank != snf3.rank)
    throw Error(ErrorKind::InternalError, "wedge rows leave ker d₂");
  r.h2 = snf3.torsion();
  r.invariants = snfw.torsion();
  return r;
}

namespace {

struct KernelCoordinates {
  std::size_t dim = 0;              // rank of ker d₂
  std::size_t rank_d2 = 0;
  DenseMatrix basis;                // rows span ker d₂
  DenseMatrix to_coords;            // left_inverse columns rank_d2..
};

KernelCoordinates kernel_of_d2(const GroupTable& g, std::size_t cap) {
  auto snf = smith_normal_form(bar_boundary(g, 2, cap), true);
  KernelCoordinates k;
  k.rank_d2 = snf.rank;
  const auto& left = *snf.left;
  k.dim = left.size() - snf.rank;
  for (std::size_t i = snf.rank; i < left.size(); ++i) k.basis.push_back(left[i]);
  k.to_coords = *snf.left_inverse;
  return k;
}

// Coordinates of each row of `rows` in the kernel basis; rows must be cycles.
SparseIntMatrix in_kernel_basis(const SparseIntMatrix& rows, const KernelCoordinates& k) {
  SparseIntMatrix out;
  out.rows = rows.rows;
  out.cols = k.dim;
  SparseIntMatrix sorted = rows;
  sorted.normalize();
  std::size_t e = 0;
  const std::size_t n = k.to_coords.size();
  for (std::uint32_t r = 0; r < rows.rows; ++r) {
    std::vector<mpz_class> y(n, 0);
    for (; e < sorted.entries.size() && sorted.entries[e].row == r; ++e) {
      const auto& t = sorted.entries[e];
      mpz_class v(static_cast<long>(t.value));
      for (std::size_t c = 0; c < n; ++c) y[c] += v * k.to_coords[t.col][c];
    }
    for (std::size_t c = 0; c < n; ++c) {
      if (c < k.rank_d2) {
        if (y[c] != 0) throw Error(ErrorKind::InternalError, "row is not a cycle");
        continue;
      }
      if (y[c] == 0) continue;
      if (!y[c].fits_slong_p())
        throw Error(ErrorKind::InternalError, "kernel coordinate exceeds 64 bits");
      out.entries.push_back({r, std::uint32_t(c - k.rank_d2), y[c].get_si()});
    }
  }
  return out;
}

}  // namespace

HomologyResult homology_h2_kernel(const GroupTable& g, std::size_t cap) {
  HomologyResult r;
  r.degree = 2;
  if (g.order() == 1) {
    r.cycle_basis.emplace();
    return r;
  }
  check_cap(g, cap);
  auto k = kernel_of_d2(g, cap);
  auto coords = in_kernel_basis(bar_boundary(g, 3, cap), k);
  auto snf = smith_normal_form(coords);
  if (snf.rank != k.dim)
    throw Error(ErrorKind::InternalError, "H₂ has a free part in the kernel route");
  r.invariants = snf.torsion();
  r.boundary_rank = snf.rank;
  r.cycle_basis = k.basis;
  return r;
}

AbelianInvariants b0_kernel_route(const GroupTable& g, std::size_t cap) {
  if (g.order() == 1) return {};
  check_cap(g, cap);
  auto k = kernel_of_d2(g, cap);
  auto coords = in_kernel_basis(bar_boundary(g, 3, cap).stacked(commuting_wedge_cycles(g, cap)), k);
  auto snf = smith_normal_form(coords);
  if (snf.rank != k.dim)
    throw Error(ErrorKind::InternalError, "quotient has a free part in the kernel route");
  return snf.torsion();
}

void write_triplets(std::ostream& out, const SparseIntMatrix& m) {
  out << m.rows << ' ' << m.cols << '\n';
  for (const auto& t : m.entries) out << t.row << ' ' << t.col << ' ' << t.value << '\n';
}

}  // namespace bogomolov
