#pragma once

// Upper unitriangular matrices over F_p, transvections t_ij(λ), and the
// families UT_n, UT_n^ℓ and Γ_{n,ℓ}.
//
// Indices are 1-based, as in the matrix notation. Only the strictly upper
// part is stored; the diagonal is implicit.

#include <bogomolov/groupcore.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

namespace bogomolov {

inline constexpr int kMaxDegree = 12;
inline constexpr std::uint32_t kMaxPrime = 65535;

bool is_prime(std::uint64_t p);

struct Transvection {
  int i = 1;
  int j = 2;
  std::uint32_t lambda = 0;

  friend bool operator==(const Transvection&, const Transvection&) = default;
};

struct MatrixEntry {
  int i;
  int j;
  std::uint32_t value;

  friend bool operator==(const MatrixEntry&, const MatrixEntry&) = default;
};

class UtMatrix {
 public:
  // 𝟏_n over F_p. Throws ValidationError for n outside [1, kMaxDegree] or
  // p not a prime below 2^16.
  UtMatrix(int n, std::uint32_t p);
  UtMatrix() : UtMatrix(2, 2) {}

  int n() const noexcept { return n_; }
  std::uint32_t p() const noexcept { return p_; }

  std::uint32_t get(int i, int j) const;
  void set(int i, int j, std::int64_t value);

  // Non-zero entries, row-major.
  std::vector<MatrixEntry> entries() const;
  bool is_identity() const noexcept;
  // Smallest j - i over non-zero entries (n for the identity).
  int level() const noexcept;
  bool is_transvection() const noexcept { return entries().size() == 1; }
  std::string to_string() const;

  std::uint64_t hash() const noexcept;
  friend bool operator==(const UtMatrix& a, const UtMatrix& b) noexcept {
    return a.n_ == b.n_ && a.p_ == b.p_ && a.e_ == b.e_;
  }

  // Raw access by packed index, for the arithmetic kernels.
  static constexpr int packed(int n, int i, int j) noexcept {
    return (i - 1) * n - (i - 1) * i / 2 + (j - i - 1);
  }
  std::uint16_t raw(int k) const noexcept { return e_[k]; }
  std::uint16_t& raw(int k) noexcept { return e_[k]; }

 private:
  void check_index(int i, int j) const;

  int n_;
  std::uint32_t p_;
  std::array<std::uint16_t, kMaxDegree*(kMaxDegree - 1) / 2> e_{};
};

struct UtMatrixHash {
  std::size_t operator()(const UtMatrix& m) const noexcept { return m.hash(); }
};

UtMatrix transvection_matrix(const Transvection& t, int n, std::uint32_t p);
inline UtMatrix tv(int n, std::uint32_t p, int i, int j, std::int64_t lambda) {
  UtMatrix m(n, p);
  m.set(i, j, lambda);
  return m;
}

UtMatrix ut_mul(const UtMatrix& a, const UtMatrix& b);
UtMatrix ut_inv(const UtMatrix& a);
// [a, b] = a^-1 b^-1 a b
UtMatrix ut_comm(const UtMatrix& a, const UtMatrix& b);
// a^b = b^-1 a b
UtMatrix ut_conj(const UtMatrix& a, const UtMatrix& b);
UtMatrix ut_pow(const UtMatrix& a, std::int64_t k);

// Closed form of [t_ik(α), t_mj(β)].
UtMatrix transvection_commutator(int i, int k, std::uint32_t alpha, int m,
                                 int j, std::uint32_t beta, int n,
                                 std::uint32_t p);

// Canonical factorization: level j - i ascending, then i ascending.
std::vector<Transvection> factor_transvections(const UtMatrix& a);
UtMatrix recompose(const std::vector<Transvection>& factors, int n,
                   std::uint32_t p);

// --- families ----------------------------------------------------------------

enum class Family { UT, UTsub, Gamma };

std::string_view to_string(Family f);

struct UtFamilySpec {
  Family family = Family::UT;
  int n = 2;
  std::uint32_t p = 2;
  int ell = 1;  // ignored for UT

  // n >= 2, p prime, UTsub ell >= 1, Gamma 1 <= ell <= n-1.
  void validate() const;
  // Number of free matrix positions, i.e. log_p of the order.
  int dimension() const;
  // Whether position (i, j) carries a free coordinate.
  bool position_free(int i, int j) const;
  std::string render() const;

  friend bool operator==(const UtFamilySpec&, const UtFamilySpec&) = default;
};

// Matrix arithmetic inside one family member. Gamma elements are the
// canonical coset representatives (entries at levels >= ℓ zeroed).
class UtGroup {
 public:
  explicit UtGroup(UtFamilySpec spec);

  const UtFamilySpec& spec() const noexcept { return spec_; }
  int n() const noexcept { return spec_.n; }
  std::uint32_t p() const noexcept { return spec_.p; }

  UtMatrix identity() const { return UtMatrix(spec_.n, spec_.p); }
  UtMatrix mul(const UtMatrix& a, const UtMatrix& b) const;
  UtMatrix inv(const UtMatrix& a) const;
  UtMatrix comm(const UtMatrix& a, const UtMatrix& b) const;
  UtMatrix conj(const UtMatrix& a, const UtMatrix& b) const;
  UtMatrix truncate(UtMatrix a) const;

  // Matrix has the right shape for this group (and is canonical for Gamma).
  bool contains(const UtMatrix& a) const;
  std::vector<Transvection> factor(const UtMatrix& a) const;
  // Transvection t_ij(λ) in this group's representation.
  UtMatrix t(int i, int j, std::int64_t lambda) const;
  UtMatrix random_element(std::mt19937_64& rng) const;
  // t_ij(1) for every free position, level then row order.
  std::vector<UtMatrix> generators() const;

  ElementDomain<UtMatrix> domain() const;

 private:
  UtFamilySpec spec_;
};

struct FamilyBuild {
  std::vector<UtMatrix> generators;
  std::optional<GroupTable> table;
  // Matrix for each table index (Gamma: coset representatives).
  std::vector<UtMatrix> elements;
};

// Builds the generators and, if requested, the multiplication table.
// Gamma tables come from the quotient of UT_n by UT_n^ℓ when UT_n itself fits
// under table_cap, otherwise from closure on truncated matrices.
FamilyBuild build_family(const UtFamilySpec& spec, bool want_table,
                         std::size_t closure_cap = kDefaultClosureCap,
                         std::size_t table_cap = kDefaultTableCap);

// All elements of UT_n^ℓ(F_p), enumerated coordinate-wise (no closure).
std::vector<UtMatrix> enumerate_ut_level(int n, std::uint32_t p, int ell,
                                         std::size_t cap = kDefaultClosureCap);

// γ_1 ⊇ γ_2 ⊇ ... ⊇ {1} of UT_n(F_p), each γ_{ℓ+1} = [γ_ℓ, G] computed by
// normal closure. Each set is sorted by packed entries.
std::vector<std::vector<UtMatrix>> lower_central_series(
    int n, std::uint32_t p, std::size_t cap = kDefaultClosureCap);

// Subgroup generated by `gens` (matrix level, no table).
std::vector<UtMatrix> subgroup_elements(const std::vector<UtMatrix>& gens,
                                        std::size_t cap = kDefaultClosureCap);

// ⟨[x, y] : x a generator of UT_n^r, y a generator of UT_n^s⟩.
std::vector<UtMatrix> commutator_level_subgroup(int n, std::uint32_t p, int r,
                                                int s,
                                                std::size_t cap = kDefaultClosureCap);

void sort_matrices(std::vector<UtMatrix>& v);

// θ: UT_{n-1}(F_p) → UT_n(F_p), t_1j(α) ↦ s_{1,j+1}(α), t_ij(α) ↦ s_{i+1,j+1}(α)
// for i >= 2, extended through the canonical factorization.
UtMatrix theta_apply(const UtMatrix& a);
// Composite UT_k → UT_n of repeated θ.
UtMatrix theta_chain(const UtMatrix& a, int target_n);

struct ThetaEmbedding {
  int n = 0;
  std::uint32_t p = 0;
  std::size_t source_order = 0;
  std::size_t checked_products = 0;
  // Present when both groups fit under the table cap.
  std::optional<Homomorphism> table_map;
  UtMatrix image_of_corner;  // θ(t_{1,n-1}(1))
};

// Verifies θ is an injective homomorphism: θ(xs) = θ(x)θ(s) for every source
// element x and generator s, plus the table-level check when tables fit.
// Throws NotHomomorphism on failure.
ThetaEmbedding theta_embedding(int n, std::uint32_t p,
                               std::size_t closure_cap = kDefaultClosureCap,
                               std::size_t table_cap = kDefaultTableCap);

}  // namespace bogomolov
