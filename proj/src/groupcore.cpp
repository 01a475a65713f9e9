#include <bogomolov/groupcore.hpp>

#include <algorithm>
#include <charconv>
#include <limits>
#include <map>
#include <random>
#include <sstream>

namespace bogomolov {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::CapExceeded: return "CapExceeded";
    case ErrorKind::InconsistentOps: return "InconsistentOps";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::NotAGroup: return "NotAGroup";
    case ErrorKind::NotCentral: return "NotCentral";
    case ErrorKind::NotSubgroup: return "NotSubgroup";
    case ErrorKind::NotNormal: return "NotNormal";
    case ErrorKind::NotIsomorphism: return "NotIsomorphism";
    case ErrorKind::NotHomomorphism: return "NotHomomorphism";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::PatternMismatch: return "PatternMismatch";
    case ErrorKind::SideConditionFailed: return "SideConditionFailed";
    case ErrorKind::NonTransvectionInput: return "NonTransvectionInput";
    case ErrorKind::NonZeroRowSum: return "NonZeroRowSum";
    case ErrorKind::NotInMStar: return "NotInMStar";
    case ErrorKind::UnsupportedContext: return "UnsupportedContext";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::InternalError: return "InternalError";
  }
  return "Unknown";
}

namespace {

std::vector<std::pair<std::uint64_t, int>> factor_integer(std::uint64_t n) {
  std::vector<std::pair<std::uint64_t, int>> out;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    out.emplace_back(p, e);
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

std::string triple(Elem a, Elem b, Elem c) {
  return "(" + std::to_string(a) + ", " + std::to_string(b) + ", " +
         std::to_string(c) + ")";
}

}  // namespace

// --- AbelianInvariants -------------------------------------------------------

std::uint64_t AbelianInvariants::order() const {
  std::uint64_t r = 1;
  for (auto d : factors) {
    if (d != 0 && r > std::numeric_limits<std::uint64_t>::max() / d)
      return std::numeric_limits<std::uint64_t>::max();
    r *= d;
  }
  return r;
}

std::string AbelianInvariants::to_string() const {
  std::string s = "[";
  for (std::size_t k = 0; k < factors.size(); ++k) {
    if (k) s += ", ";
    s += std::to_string(factors[k]);
  }
  return s + "]";
}

AbelianInvariants AbelianInvariants::from_cyclic_orders(
    std::vector<std::uint64_t> orders) {
  std::map<std::uint64_t, std::vector<int>> by_prime;
  for (auto m : orders) {
    if (m <= 1) continue;
    for (auto [p, e] : factor_integer(m)) by_prime[p].push_back(e);
  }
  std::size_t width = 0;
  for (auto& [p, es] : by_prime) {
    std::sort(es.rbegin(), es.rend());
    width = std::max(width, es.size());
  }
  // largest factor first, then reverse
  std::vector<std::uint64_t> out(width, 1);
  for (auto& [p, es] : by_prime)
    for (std::size_t t = 0; t < es.size(); ++t)
      for (int k = 0; k < es[t]; ++k) out[t] *= p;
  std::reverse(out.begin(), out.end());
  return AbelianInvariants{std::move(out)};
}

// --- GroupTable --------------------------------------------------------------

std::string check_group_table(std::size_t n, std::span<const Elem> mul,
                              std::uint64_t seed) {
  if (n == 0) return "empty table";
  if (mul.size() != n * n) return "table has wrong size";
  std::vector<char> seen(n);
  for (std::size_t a = 0; a < n; ++a) {
    std::fill(seen.begin(), seen.end(), 0);
    for (std::size_t b = 0; b < n; ++b) {
      Elem v = mul[a * n + b];
      if (v >= n) return "entry out of range in row " + std::to_string(a);
      if (seen[v]) return "row " + std::to_string(a) + " is not a permutation";
      seen[v] = 1;
    }
  }
  for (std::size_t b = 0; b < n; ++b) {
    std::fill(seen.begin(), seen.end(), 0);
    for (std::size_t a = 0; a < n; ++a) {
      Elem v = mul[a * n + b];
      if (seen[v])
        return "column " + std::to_string(b) + " is not a permutation";
      seen[v] = 1;
    }
  }
  for (std::size_t g = 0; g < n; ++g)
    if (mul[g] != g || mul[g * n] != g)
      return "element 0 is not an identity (fails at " + std::to_string(g) +
             ")";
  // Latin rows guarantee a right inverse; check it is two-sided.
  for (std::size_t g = 0; g < n; ++g) {
    std::size_t h = 0;
    while (mul[g * n + h] != 0) ++h;
    if (mul[h * n + g] != 0)
      return "element " + std::to_string(g) + " has no two-sided inverse";
  }
  auto assoc = [&](Elem a, Elem b, Elem c) {
    return mul[mul[a * n + b] * n + c] == mul[a * n + mul[b * n + c]];
  };
  if (n <= kExhaustiveAssociativityLimit) {
    for (Elem a = 0; a < n; ++a)
      for (Elem b = 0; b < n; ++b)
        for (Elem c = 0; c < n; ++c)
          if (!assoc(a, b, c)) return "associativity fails at " + triple(a, b, c);
  } else {
    std::mt19937_64 rng(seed);
    const std::uint64_t samples = 10 * std::uint64_t(n) * n;
    for (std::uint64_t s = 0; s < samples; ++s) {
      Elem a = Elem(rng() % n), b = Elem(rng() % n), c = Elem(rng() % n);
      if (!assoc(a, b, c)) return "associativity fails at " + triple(a, b, c);
    }
  }
  return {};
}

GroupTable::GroupTable() : order_(1), mul_{0}, inv_{0} {}

GroupTable::GroupTable(std::size_t order, std::vector<Elem> mul,
                       std::vector<std::string> labels)
    : order_(order), mul_(std::move(mul)), labels_(std::move(labels)) {
  if (auto bad = check_group_table(order_, mul_); !bad.empty())
    throw Error(ErrorKind::NotAGroup, bad);
  if (!labels_.empty() && labels_.size() != order_)
    throw Error(ErrorKind::ValidationError, "label count does not match order");
  inv_.resize(order_);
  for (Elem g = 0; g < order_; ++g) {
    Elem h = 0;
    while (this->mul(g, h) != 0) ++h;
    inv_[g] = h;
  }
}

Elem GroupTable::power(Elem a, std::int64_t k) const {
  if (k < 0) {
    a = inv(a);
    k = -k;
  }
  Elem r = 0;
  Elem base = a;
  while (k) {
    if (k & 1) r = mul(r, base);
    base = mul(base, base);
    k >>= 1;
  }
  return r;
}

std::size_t GroupTable::element_order(Elem a) const {
  std::size_t k = 1;
  for (Elem x = a; x != 0; x = mul(x, a)) ++k;
  return k;
}

bool GroupTable::is_abelian() const {
  for (Elem a = 0; a < order_; ++a)
    for (Elem b = a + 1; b < order_; ++b)
      if (!commute(a, b)) return false;
  return true;
}

std::string GroupTable::label(Elem a) const {
  return labels_.empty() ? std::to_string(a) : labels_[a];
}

// --- constructions -----------------------------------------------------------

GroupTable cyclic_group(std::size_t m) {
  if (m == 0) throw Error(ErrorKind::ValidationError, "cyclic group of order 0");
  std::vector<Elem> mul(m * m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) mul[a * m + b] = Elem((a + b) % m);
  return GroupTable(m, std::move(mul));
}

GroupTable direct_product(const GroupTable& a, const GroupTable& b) {
  const std::size_t na = a.order(), nb = b.order(), n = na * nb;
  std::vector<Elem> mul(n * n);
  for (Elem x = 0; x < n; ++x)
    for (Elem y = 0; y < n; ++y) {
      Elem xa = Elem(x / nb), xb = Elem(x % nb);
      Elem ya = Elem(y / nb), yb = Elem(y % nb);
      mul[x * n + y] = Elem(a.mul(xa, ya) * nb + b.mul(xb, yb));
    }
  return GroupTable(n, std::move(mul));
}

GroupTable abelian_group(std::span<const std::uint64_t> orders) {
  GroupTable g;
  for (auto m : orders) g = direct_product(g, cyclic_group(m));
  return g;
}

GroupTable ingest_table(std::string_view raw, std::string* notice) {
  std::vector<std::uint64_t> nums;
  std::size_t pos = 0;
  while (pos < raw.size()) {
    char c = raw[pos];
    if (c == '#') {
      while (pos < raw.size() && raw[pos] != '\n') ++pos;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
      continue;
    }
    std::uint64_t v = 0;
    auto [end, ec] = std::from_chars(raw.data() + pos, raw.data() + raw.size(), v);
    if (ec != std::errc() || end == raw.data() + pos)
      throw ParseError(pos, "a non-negative integer");
    nums.push_back(v);
    pos = std::size_t(end - raw.data());
  }
  if (nums.empty()) throw ParseError(0, "the group order on the first line");
  const std::uint64_t n = nums[0];
  if (n == 0 || n > 65536) throw ParseError(0, "an order between 1 and 65536");
  if (nums.size() != 1 + n * n)
    throw ParseError(raw.size(), std::to_string(n * n) + " table entries, got " +
                                     std::to_string(nums.size() - 1));
  std::vector<Elem> mul(n * n);
  for (std::size_t k = 0; k < n * n; ++k) {
    if (nums[k + 1] >= n)
      throw Error(ErrorKind::NotAGroup, "entry " + std::to_string(nums[k + 1]) +
                                            " out of range at row " +
                                            std::to_string(k / n));
    mul[k] = Elem(nums[k + 1]);
  }
  std::optional<Elem> identity;
  for (Elem e = 0; e < n && !identity; ++e) {
    bool ok = true;
    for (Elem g = 0; g < n && ok; ++g)
      ok = mul[e * n + g] == g && mul[g * n + e] == g;
    if (ok) identity = e;
  }
  if (!identity) throw Error(ErrorKind::NotAGroup, "no identity element");
  if (*identity != 0) {
    std::vector<Elem> perm(n);
    for (Elem k = 0; k < n; ++k) perm[k] = k;
    std::swap(perm[0], perm[*identity]);
    std::vector<Elem> relabeled(n * n);
    for (Elem a = 0; a < n; ++a)
      for (Elem b = 0; b < n; ++b)
        relabeled[perm[a] * n + perm[b]] = perm[mul[a * n + b]];
    mul = std::move(relabeled);
    if (notice)
      *notice = "identity found at index " + std::to_string(*identity) +
                "; swapped with index 0";
  }
  if (auto bad = check_group_table(n, mul); !bad.empty())
    throw Error(ErrorKind::NotAGroup, bad);
  return GroupTable(n, std::move(mul));
}

std::string render_table(const GroupTable& g) {
  std::ostringstream out;
  const auto n = g.order();
  out << n << '\n';
  for (Elem a = 0; a < n; ++a) {
    for (Elem b = 0; b < n; ++b) out << (b ? " " : "") << g.mul(a, b);
    out << '\n';
  }
  return out.str();
}

// --- subgroups ---------------------------------------------------------------

std::vector<std::pair<Elem, Elem>> commuting_pairs(const GroupTable& g) {
  std::vector<std::pair<Elem, Elem>> out;
  for (Elem a = 0; a < g.order(); ++a)
    for (Elem b = 0; b < g.order(); ++b)
      if (g.commute(a, b)) out.emplace_back(a, b);
  return out;
}

Subset subgroup_closure(const GroupTable& g, std::span<const Elem> gens) {
  std::vector<char> in(g.order(), 0);
  std::vector<Elem> elems{0};
  in[0] = 1;
  for (std::size_t head = 0; head < elems.size(); ++head)
    for (Elem s : gens) {
      Elem y = g.mul(elems[head], s);
      if (!in[y]) {
        in[y] = 1;
        elems.push_back(y);
      }
    }
  std::sort(elems.begin(), elems.end());
  return elems;
}

Subset center(const GroupTable& g) {
  Subset z;
  for (Elem a = 0; a < g.order(); ++a) {
    bool central = true;
    for (Elem b = 0; b < g.order() && central; ++b) central = g.commute(a, b);
    if (central) z.push_back(a);
  }
  return z;
}

Subset commutator_subgroup(const GroupTable& g) {
  std::vector<char> seen(g.order(), 0);
  std::vector<Elem> gens;
  for (Elem a = 0; a < g.order(); ++a)
    for (Elem b = 0; b < g.order(); ++b) {
      Elem c = g.commutator(a, b);
      if (!seen[c]) {
        seen[c] = 1;
        gens.push_back(c);
      }
    }
  return subgroup_closure(g, gens);
}

namespace {

std::vector<char> membership(const GroupTable& g, const Subset& s) {
  std::vector<char> in(g.order(), 0);
  for (Elem x : s) {
    if (x >= g.order())
      throw Error(ErrorKind::NotSubgroup, "element index out of range");
    in[x] = 1;
  }
  return in;
}

}  // namespace

bool is_subgroup(const GroupTable& g, const Subset& s) {
  if (s.empty() || !std::is_sorted(s.begin(), s.end())) return false;
  if (std::adjacent_find(s.begin(), s.end()) != s.end()) return false;
  auto in = membership(g, s);
  if (!in[0]) return false;
  for (Elem a : s)
    for (Elem b : s)
      if (!in[g.mul(a, b)]) return false;
  return true;
}

bool is_normal(const GroupTable& g, const Subset& s) {
  if (!is_subgroup(g, s)) return false;
  auto in = membership(g, s);
  for (Elem a : s)
    for (Elem x = 0; x < g.order(); ++x)
      if (!in[g.conj(a, x)]) return false;
  return true;
}

bool is_central(const GroupTable& g, const Subset& s) {
  for (Elem a : s)
    for (Elem x = 0; x < g.order(); ++x)
      if (!g.commute(a, x)) return false;
  return true;
}

Quotient quotient_normal(const GroupPtr& g, const Subset& n) {
  if (!is_subgroup(*g, n))
    throw Error(ErrorKind::NotSubgroup, "quotient by a non-subgroup");
  if (!is_normal(*g, n))
    throw Error(ErrorKind::NotNormal, "quotient by a non-normal subgroup");
  const std::size_t order = g->order();
  constexpr Elem kUnset = std::numeric_limits<Elem>::max();
  std::vector<Elem> coset(order, kUnset);
  std::vector<Elem> reps;
  for (Elem x = 0; x < order; ++x) {
    if (coset[x] != kUnset) continue;
    Elem id = Elem(reps.size());
    reps.push_back(x);
    for (Elem m : n) coset[g->mul(x, m)] = id;
  }
  const std::size_t q = reps.size();
  std::vector<Elem> mul(q * q);
  for (Elem a = 0; a < q; ++a)
    for (Elem b = 0; b < q; ++b) mul[a * q + b] = coset[g->mul(reps[a], reps[b])];
  std::vector<std::string> labels;
  if (!g->labels().empty()) {
    labels.reserve(q);
    for (Elem r : reps) labels.push_back(g->labels()[r]);
  }
  auto quotient = std::make_shared<const GroupTable>(q, std::move(mul),
                                                     std::move(labels));
  Homomorphism proj{g, quotient, std::move(coset)};
  return {*quotient, std::move(proj)};
}

Quotient quotient_central(const GroupPtr& g, const Subset& n) {
  if (!is_subgroup(*g, n))
    throw Error(ErrorKind::NotSubgroup, "quotient by a non-subgroup");
  if (!is_central(*g, n))
    throw Error(ErrorKind::NotCentral, "subgroup is not central");
  return quotient_normal(g, n);
}

GroupTable central_product(const GroupTable& g1, const Subset& k1,
                           const GroupTable& g2, const Subset& k2,
                           std::span<const std::pair<Elem, Elem>> theta) {
  if (!is_subgroup(g1, k1) || !is_subgroup(g2, k2))
    throw Error(ErrorKind::NotSubgroup, "K1 or K2 is not a subgroup");
  if (!is_central(g1, k1) || !is_central(g2, k2))
    throw Error(ErrorKind::NotCentral, "K1 or K2 is not central");
  if (k1.size() != k2.size() || theta.size() != k1.size())
    throw Error(ErrorKind::NotIsomorphism, "theta is not a bijection K1 -> K2");
  auto in1 = membership(g1, k1), in2 = membership(g2, k2);
  std::vector<Elem> map(g1.order(), std::numeric_limits<Elem>::max());
  std::vector<char> hit(g2.order(), 0);
  for (auto [a, b] : theta) {
    if (a >= g1.order() || b >= g2.order() || !in1[a] || !in2[b] || hit[b] ||
        map[a] != std::numeric_limits<Elem>::max())
      throw Error(ErrorKind::NotIsomorphism, "theta is not a bijection K1 -> K2");
    map[a] = b;
    hit[b] = 1;
  }
  for (Elem a : k1)
    for (Elem b : k1)
      if (map[g1.mul(a, b)] != g2.mul(map[a], map[b]))
        throw Error(ErrorKind::NotIsomorphism,
                    "theta is not a homomorphism at (" + std::to_string(a) +
                        ", " + std::to_string(b) + ")");
  auto e = std::make_shared<const GroupTable>(direct_product(g1, g2));
  const auto n2 = Elem(g2.order());
  Subset glue;
  for (Elem a : k1) glue.push_back(a * n2 + g2.inv(map[a]));
  std::sort(glue.begin(), glue.end());
  return quotient_central(e, glue).group;
}

Homomorphism verify_homomorphism(std::vector<Elem> map, const GroupPtr& source,
                                 const GroupPtr& target) {
  if (map.size() != source->order())
    throw Error(ErrorKind::NotHomomorphism, "map is not defined on all of G1");
  for (Elem x : map)
    if (x >= target->order())
      throw Error(ErrorKind::NotHomomorphism, "map leaves the target group");
  if (map[0] != 0)
    throw Error(ErrorKind::NotHomomorphism, "identity is not mapped to identity");
  for (Elem a = 0; a < source->order(); ++a)
    for (Elem b = 0; b < source->order(); ++b)
      if (map[source->mul(a, b)] != target->mul(map[a], map[b]))
        throw Error(ErrorKind::NotHomomorphism,
                    "NotHomomorphism(" + std::to_string(a) + ", " +
                        std::to_string(b) + ")");
  return Homomorphism{source, target, std::move(map)};
}

AbelianInvariants abelian_invariants(const GroupTable& g) {
  if (!g.is_abelian())
    throw Error(ErrorKind::ValidationError,
                "abelian_invariants called on a non-abelian group");
  const std::size_t n = g.order();
  std::vector<std::uint64_t> cyclic;
  for (auto [p, e] : factor_integer(n)) {
    // s_k = log_p #{x : x^(p^k) = 1}
    std::vector<Elem> pw(n);
    for (Elem x = 0; x < n; ++x) pw[x] = x;
    std::vector<int> s{0};
    for (int k = 1; k <= e; ++k) {
      for (Elem x = 0; x < n; ++x) pw[x] = g.power(pw[x], std::int64_t(p));
      std::size_t count = 0;
      for (Elem x = 0; x < n; ++x) count += pw[x] == 0;
      int sk = 0;
      while (count % p == 0 && count > 1) {
        count /= p;
        ++sk;
      }
      s.push_back(sk);
      if (sk == s[k - 1]) break;
    }
    // r_k = number of cyclic factors of exponent >= k
    std::vector<int> r;
    for (std::size_t k = 1; k < s.size(); ++k) r.push_back(s[k] - s[k - 1]);
    r.push_back(0);
    for (std::size_t k = 0; k + 1 < r.size(); ++k) {
      int exact = r[k] - r[k + 1];
      std::uint64_t q = 1;
      for (std::size_t t = 0; t <= k; ++t) q *= p;
      for (int c = 0; c < exact; ++c) cyclic.push_back(q);
    }
  }
  return AbelianInvariants::from_cyclic_orders(std::move(cyclic));
}

AbelianInvariants abelianization(const GroupTable& g) {
  auto ptr = std::make_shared<const GroupTable>(g);
  return abelian_invariants(quotient_normal(ptr, commutator_subgroup(g)).group);
}

GroupTable relabel(const GroupTable& g, std::span<const Elem> perm) {
  const std::size_t n = g.order();
  if (perm.size() != n || perm[0] != 0)
    throw Error(ErrorKind::ValidationError, "relabeling must fix the identity");
  std::vector<Elem> mul(n * n);
  for (Elem a = 0; a < n; ++a)
    for (Elem b = 0; b < n; ++b) mul[perm[a] * n + perm[b]] = perm[g.mul(a, b)];
  std::vector<std::string> labels;
  if (!g.labels().empty()) {
    labels.resize(n);
    for (Elem a = 0; a < n; ++a) labels[perm[a]] = g.labels()[a];
  }
  return GroupTable(n, std::move(mul), std::move(labels));
}

}  // namespace bogomolov
