#pragma once

// Finite groups as dense multiplication tables.
//
// Elements are indices 0..N-1 with 0 the identity. Everything downstream
// (homology, the CLI) works on GroupTable; concrete element domains such as
// unitriangular matrices are turned into tables by closure().

#include <bogomolov/errors.hpp>

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace bogomolov {

using Elem = std::uint32_t;

// Sorted, duplicate-free list of element indices.
using Subset = std::vector<Elem>;

inline constexpr std::size_t kDefaultClosureCap = 1'000'000;
// Largest order for which a full N x N table is materialized.
inline constexpr std::size_t kDefaultTableCap = 4096;
// Exhaustive associativity checks up to this order, sampling above.
inline constexpr std::size_t kExhaustiveAssociativityLimit = 256;

class GroupTable {
 public:
  // Trivial group.
  GroupTable();

  // Validates the four table invariants; throws NotAGroup on failure.
  // The identity must already sit at index 0.
  GroupTable(std::size_t order, std::vector<Elem> mul,
             std::vector<std::string> labels = {});

  std::size_t order() const noexcept { return order_; }
  static constexpr Elem identity() noexcept { return 0; }

  Elem mul(Elem a, Elem b) const noexcept { return mul_[a * order_ + b]; }
  Elem inv(Elem a) const noexcept { return inv_[a]; }
  // [a, b] = a^-1 b^-1 a b
  Elem commutator(Elem a, Elem b) const noexcept {
    return mul(mul(inv(a), inv(b)), mul(a, b));
  }
  // a^b = b^-1 a b
  Elem conj(Elem a, Elem b) const noexcept { return mul(mul(inv(b), a), b); }
  Elem power(Elem a, std::int64_t k) const;
  std::size_t element_order(Elem a) const;

  bool commute(Elem a, Elem b) const noexcept { return mul(a, b) == mul(b, a); }
  bool is_abelian() const;

  std::span<const Elem> table() const noexcept { return mul_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::string label(Elem a) const;

 private:
  std::size_t order_;
  std::vector<Elem> mul_;
  std::vector<Elem> inv_;
  std::vector<std::string> labels_;
};

using GroupPtr = std::shared_ptr<const GroupTable>;

struct Homomorphism {
  GroupPtr source;
  GroupPtr target;
  std::vector<Elem> map;

  Elem operator()(Elem g) const { return map[g]; }
};

// Invariant factors d1 | d2 | ... | dk, each >= 2. Empty = trivial group.
struct AbelianInvariants {
  std::vector<std::uint64_t> factors;

  bool trivial() const noexcept { return factors.empty(); }
  // Product of the factors (saturates at UINT64_MAX).
  std::uint64_t order() const;
  std::string to_string() const;

  // Canonical form from any list of cyclic orders (1s and 0s dropped).
  static AbelianInvariants from_cyclic_orders(std::vector<std::uint64_t> orders);

  friend bool operator==(const AbelianInvariants&,
                         const AbelianInvariants&) = default;
};

// Table checks used by the constructor and by ingestion. Returns an empty
// string when all invariants hold, otherwise a description of the first
// violation (including the offending triple for associativity).
std::string check_group_table(std::size_t order, std::span<const Elem> mul,
                              std::uint64_t seed = 0x5eed);

// --- closure ---------------------------------------------------------------

template <class T>
struct ElementDomain {
  std::function<T(const T&, const T&)> mul;
  std::function<T(const T&)> inv;
  T identity;
};

template <class T>
struct Closure {
  std::vector<T> elements;  // element k is table index k
  GroupTable table;
};

// Breadth-first enumeration of <gens> from the identity, generators tried in
// the given order. Element 0 is the identity. Throws CapExceeded past `cap`.
template <class T, class Hash = std::hash<T>>
std::vector<T> enumerate_closure(const std::vector<T>& gens,
                                 const ElementDomain<T>& ops,
                                 std::size_t cap = kDefaultClosureCap) {
  std::vector<T> elements{ops.identity};
  std::unordered_map<T, Elem, Hash> index;
  index.emplace(ops.identity, 0);
  for (std::size_t head = 0; head < elements.size(); ++head) {
    for (const T& g : gens) {
      T y = ops.mul(elements[head], g);
      if (index.find(y) != index.end()) continue;
      if (elements.size() >= cap)
        throw Error(ErrorKind::CapExceeded,
                    "closure exceeds cap of " + std::to_string(cap) +
                        " elements");
      index.emplace(y, static_cast<Elem>(elements.size()));
      elements.push_back(std::move(y));
    }
  }
  return elements;
}

// Multiplication table over an already closed element list.
template <class T, class Hash = std::hash<T>>
GroupTable table_from_elements(const std::vector<T>& elements,
                               const ElementDomain<T>& ops,
                               std::vector<std::string> labels = {}) {
  const std::size_t n = elements.size();
  std::unordered_map<T, Elem, Hash> index;
  index.reserve(n);
  for (std::size_t k = 0; k < n; ++k) index.emplace(elements[k], Elem(k));
  std::vector<Elem> mul(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      auto it = index.find(ops.mul(elements[a], elements[b]));
      if (it == index.end())
        throw Error(ErrorKind::InconsistentOps,
                    "product of elements " + std::to_string(a) + " and " +
                        std::to_string(b) + " left the enumerated set");
      mul[a * n + b] = it->second;
    }
  }
  if (auto bad = check_group_table(n, mul); !bad.empty())
    throw Error(ErrorKind::InconsistentOps, bad);
  return GroupTable(n, std::move(mul), std::move(labels));
}

template <class T, class Hash = std::hash<T>>
Closure<T> closure(const std::vector<T>& gens, const ElementDomain<T>& ops,
                   std::size_t cap = kDefaultClosureCap,
                   std::size_t table_cap = kDefaultTableCap) {
  auto elements = enumerate_closure<T, Hash>(gens, ops, cap);
  if (elements.size() > table_cap)
    throw Error(ErrorKind::CapExceeded,
                "group of order " + std::to_string(elements.size()) +
                    " is too large for a multiplication table (cap " +
                    std::to_string(table_cap) + ")");
  GroupTable table = table_from_elements<T, Hash>(elements, ops);
  return {std::move(elements), std::move(table)};
}

// --- table-level operations ------------------------------------------------

GroupTable cyclic_group(std::size_t m);
GroupTable direct_product(const GroupTable& a, const GroupTable& b);
// Direct product of cyclic groups of the given orders.
GroupTable abelian_group(std::span<const std::uint64_t> orders);

// Parses the Table file format and validates the result. If the identity is
// not at index 0 it is swapped there and `notice` (if given) is filled in.
GroupTable ingest_table(std::string_view raw, std::string* notice = nullptr);
std::string render_table(const GroupTable& g);

// All ordered pairs (g, h) with gh = hg, lexicographic.
std::vector<std::pair<Elem, Elem>> commuting_pairs(const GroupTable& g);

// Subgroup generated by `gens` inside g.
Subset subgroup_closure(const GroupTable& g, std::span<const Elem> gens);
Subset center(const GroupTable& g);
Subset commutator_subgroup(const GroupTable& g);

bool is_subgroup(const GroupTable& g, const Subset& s);
bool is_normal(const GroupTable& g, const Subset& s);
bool is_central(const GroupTable& g, const Subset& s);

struct Quotient {
  GroupTable group;
  Homomorphism projection;
};

// G/N for normal N; cosets numbered by their minimal element index.
Quotient quotient_normal(const GroupPtr& g, const Subset& n);
// As quotient_normal, but N must be central (NotCentral otherwise).
Quotient quotient_central(const GroupPtr& g, const Subset& n);

// (G1 x G2)/{(a, theta(a)^-1)}. theta is given as pairs (a, theta(a)) for
// every a in K1.
GroupTable central_product(const GroupTable& g1, const Subset& k1,
                           const GroupTable& g2, const Subset& k2,
                           std::span<const std::pair<Elem, Elem>> theta);

// Validates a candidate map; throws NotHomomorphism naming the first bad pair.
Homomorphism verify_homomorphism(std::vector<Elem> map, const GroupPtr& source,
                                 const GroupPtr& target);

AbelianInvariants abelian_invariants(const GroupTable& abelian);
AbelianInvariants abelianization(const GroupTable& g);

// Renumbers elements through `perm` (perm[old] = new, perm[0] must be 0).
GroupTable relabel(const GroupTable& g, std::span<const Elem> perm);

}  // namespace bogomolov
