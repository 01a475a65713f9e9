#pragma once

// Integral homology of finite groups through the normalized bar complex, and
// B₀(G) as H₂(G) modulo the classes of commuting pairs.
//
// Chains are row vectors: row k of d_k is the boundary of the k-th basis
// tuple of C_k, expressed in the basis of C_{k-1}. Basis tuples are
// non-identity elements in lexicographic order.

#include <bogomolov/groupcore.hpp>

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace bogomolov {

inline constexpr std::size_t kDefaultHomologyCap = 64;

struct Triplet {
  std::uint32_t row;
  std::uint32_t col;
  std::int64_t value;
};

struct SparseIntMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Triplet> entries;

  // Sorts by (row, col), sums duplicates and drops zeros.
  void normalize();
  // Row-major dense copy; for tests and small matrices.
  std::vector<std::vector<std::int64_t>> dense() const;
  static SparseIntMatrix from_dense(const std::vector<std::vector<std::int64_t>>& d);
  SparseIntMatrix transposed() const;
  // Rows of `below` appended under this matrix (column counts must agree).
  SparseIntMatrix stacked(const SparseIntMatrix& below) const;
};

using DenseMatrix = std::vector<std::vector<mpz_class>>;

struct SnfResult {
  // Non-zero diagonal entries d1 | d2 | ... | dr, all positive.
  std::vector<mpz_class> invariants;
  std::size_t rank = 0;
  // When requested (dense route only): left * M * right is diagonal, and
  // left_inverse * left = 1.
  std::optional<DenseMatrix> left;
  std::optional<DenseMatrix> left_inverse;
  std::optional<DenseMatrix> right;
  // Diagnostics from the sparse route.
  std::size_t unit_pivots = 0;
  std::size_t leftover_rows = 0;
  bool used_bignum = false;

  // Invariant factors > 1 as AbelianInvariants (the torsion of the cokernel).
  AbelianInvariants torsion() const;
};

enum class SnfStrategy { Auto, Sparse, Dense };

// Exact Smith normal form. Sparse elimination with unit pivots first, a dense
// pass on what remains; 64-bit arithmetic with a GMP fallback on overflow.
// Transforms force the dense route.
SnfResult smith_normal_form(const SparseIntMatrix& m, bool want_transforms = false,
                            SnfStrategy strategy = SnfStrategy::Auto);
SnfResult smith_normal_form_dense(DenseMatrix m, bool want_transforms);

// d_k of the normalized bar complex, k in {1, 2, 3}.
SparseIntMatrix bar_boundary(const GroupTable& g, int k,
                             std::size_t cap = kDefaultHomologyCap);

// Index of a basis tuple of non-identity elements.
std::size_t bar_index(const GroupTable& g, std::initializer_list<Elem> tuple);

struct HomologyResult {
  int degree = 0;
  AbelianInvariants invariants;
  std::size_t boundary_rank = 0;  // rank of d_{degree+1}
  // Basis of the cycle lattice ker d_degree, over the chain basis.
  std::optional<std::vector<std::vector<mpz_class>>> cycle_basis;
};

HomologyResult homology_h1(const GroupTable& g, std::size_t cap = kDefaultHomologyCap);
// Torsion of C₂ / im d₃; finite because H₂ of a finite group is finite, which
// is asserted through rank d₃ = (N-1)² - rank d₂.
HomologyResult homology_h2(const GroupTable& g, std::size_t cap = kDefaultHomologyCap,
                           SnfStrategy strategy = SnfStrategy::Auto);
// Kernel-lattice route: integer basis of ker d₂ from a dense SNF with
// transforms, d₃ rows rewritten in that basis, SNF of the coefficients.
// Returns the cycle basis too. Dense, so only for small groups.
HomologyResult homology_h2_kernel(const GroupTable& g, std::size_t cap = 16);

// One row [x|y] - [y|x] per unordered commuting pair of distinct
// non-identity elements. Every row is checked to lie in ker d₂.
SparseIntMatrix commuting_wedge_cycles(const GroupTable& g,
                                       std::size_t cap = kDefaultHomologyCap);

struct B0Result {
  AbelianInvariants invariants;
  AbelianInvariants h2;
  std::string method = "homology";
  std::size_t order = 0;
};

B0Result b0_homological(const GroupTable& g, std::size_t cap = kDefaultHomologyCap,
                        SnfStrategy strategy = SnfStrategy::Auto);
// Same quotient computed in the kernel lattice coordinates (small groups).
AbelianInvariants b0_kernel_route(const GroupTable& g, std::size_t cap = 16);

// "rows cols" header then one "row col value" line per entry.
void write_triplets(std::ostream& out, const SparseIntMatrix& m);

}  // namespace bogomolov
