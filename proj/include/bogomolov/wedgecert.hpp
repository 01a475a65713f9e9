#pragma once

// Rewriting certificates for M*(G) = M₀*(G) over the unitriangular families.
//
// A wedge word is a product of atoms [u, v^φ]^ε in [G, G^φ] ≅ G∧G. The
// generator rewrites a word with trivial commutator image into nothing,
// dropping only atoms whose slots commute. Every step names one primitive
// rule; verify_certificate replays the steps with matrix arithmetic alone.

#include <bogomolov/unitriangular.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bogomolov {

struct WedgeAtom {
  UtMatrix u;
  UtMatrix v;
  int eps = 1;

  friend bool operator==(const WedgeAtom&, const WedgeAtom&) = default;
};

struct WedgeWord {
  UtFamilySpec context;
  std::vector<WedgeAtom> atoms;
};

enum class Rule {
  Self,          // (u, u, ε) → ·
  Cancel,        // (u, v, ε)(u, v, -ε) → ·
  InvNorm,       // (u, v, -1) → (u⁻¹, v^u, +1)
  BiaddL,        // (xy, z) ↔ (x^y, z^y)(y, z)
  BiaddR,        // (x, yz) ↔ (x, z)(x^z, y^z)
  Swap,          // A B → B A (κA, κB, +1)
  PowerCollect,  // (x, y, ε)^m → (x^m, y, ε) when [x, y] = 1
  Discard,       // drop an atom with [u, v] = 1
  Insert,        // insert an atom with [u, v] = 1
  Antisym,       // (u, v, ε) → (v, u, -ε)
};

inline constexpr Rule kAllRules[] = {Rule::Self,    Rule::Cancel,       Rule::InvNorm,
                                     Rule::BiaddL,  Rule::BiaddR,       Rule::Swap,
                                     Rule::PowerCollect, Rule::Discard, Rule::Insert,
                                     Rule::Antisym};

std::string_view to_string(Rule r);
std::optional<Rule> rule_from_string(std::string_view s);

// BIADD steps either split one atom into two or merge two into one.
enum class Direction { Split, Merge };

struct RewriteStep {
  Rule rule = Rule::Self;
  std::size_t position = 0;
  Direction direction = Direction::Split;
  // BIADD-L split: x, y with xy = u.  BIADD-R split: y, z with yz = v.
  std::vector<UtMatrix> params;
  // DISCARD / INSERT: the atom.  SWAP: the correction atom (κA, κB, +1).
  std::optional<WedgeAtom> atom;
  // POWER-COLLECT run length.
  std::uint32_t count = 0;
  // Which stage of the proof produced the step; ignored by the verifier.
  std::string macro;
};

// Ordered product of [u_i, v_i]^ε_i in G.
UtMatrix kappa(const WedgeWord& w);
UtMatrix kappa(const UtGroup& g, const std::vector<WedgeAtom>& atoms);

// Applies one step in place. Throws PatternMismatch when the atoms at the
// position do not have the required shape, SideConditionFailed when a
// matrix identity the rule relies on fails.
void apply_step(const UtGroup& g, std::vector<WedgeAtom>& atoms, const RewriteStep& s);
WedgeWord apply_step(WedgeWord w, const RewriteStep& s);

struct RewriteTrace {
  WedgeWord word;
  std::vector<RewriteStep> steps;
  std::vector<WedgeAtom> discarded;
};

// Every atom rewritten to (t_ab(λ), t_cd(μ), +1); atoms with an identity slot
// dropped.
RewriteTrace expand_to_transvection_atoms(const WedgeWord& w);

struct NormalForm {
  struct Entry {
    int i, j, k;  // atom [t_ij(c), t_{j,i+k}^φ]; k = level of its commutator
    std::uint32_t value;
    friend bool operator==(const Entry&, const Entry&) = default;
  };
  UtFamilySpec context;
  std::vector<Entry> exponents;  // sorted by (k, i, j), zero values omitted
  std::size_t discarded = 0;

  std::uint32_t n(int i, int j, int k) const;
  // m(i, k) = Σ_j n(i, j, k) mod p
  std::uint32_t row_sum(int i, int k) const;
  std::map<std::pair<int, int>, std::uint32_t> row_sums() const;
  // The canonical word ∏ (t_ij(c), t_{j,i+k}(1), +1).
  WedgeWord word() const;
};

struct CollectResult {
  NormalForm form;
  RewriteTrace trace;
};

// Input atoms must be transvection pairs with ε = +1 (NonTransvectionInput).
CollectResult collect_normal_form(const WedgeWord& w);

// Rewrites nf.word() to the empty word. Throws NonZeroRowSum(i, k) when some
// m(i, k) ≠ 0, i.e. the word is not in M*(G).
RewriteTrace eliminate_zero_sums(const NormalForm& nf);

struct Certificate {
  WedgeWord input;
  std::vector<RewriteStep> steps;
  std::vector<WedgeAtom> discarded;
  WedgeWord residual;
};

struct CertifyStats {
  std::size_t steps = 0;
  std::size_t discarded = 0;
  std::size_t swaps = 0;
  std::size_t peak_length = 0;
  std::size_t chain_atoms = 0;  // non-zero exponents after collection
};

// Throws UnsupportedContext outside the unitriangular families with
// 1 <= ℓ <= n-2 for Gamma, NotInMStar when κ(w) ≠ 1.
Certificate certify_trivial(const WedgeWord& w, CertifyStats* stats = nullptr);
void check_certifiable(const UtFamilySpec& spec);

struct VerifyReport {
  bool ok = false;
  std::size_t steps_checked = 0;
  std::size_t discards_checked = 0;
  std::optional<std::size_t> failed_step;
  std::optional<ErrorKind> failure_kind;
  std::string reason;
};

VerifyReport verify_certificate(const Certificate& c);

// Seeded word with κ = 1: `length` random atoms, then closing atoms
// (t_im(α), t_mj(1), +1) cancelling the canonical factors of the inverse
// commutator image.
WedgeWord random_m_star(const UtFamilySpec& spec, std::size_t length, std::uint64_t seed);

std::string certificate_to_json(const Certificate& c);
Certificate certificate_from_json(std::string_view text);

}  // namespace bogomolov
