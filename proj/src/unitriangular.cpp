#include <bogomolov/unitriangular.hpp>

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace bogomolov {

bool is_prime(std::uint64_t p) {
  if (p < 2) return false;
  for (std::uint64_t d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

// --- UtMatrix ----------------------------------------------------------------

UtMatrix::UtMatrix(int n, std::uint32_t p) : n_(n), p_(p) {
  if (n < 1 || n > kMaxDegree)
    throw Error(ErrorKind::ValidationError,
                "matrix degree " + std::to_string(n) + " outside [1, " +
                    std::to_string(kMaxDegree) + "]");
  if (p > kMaxPrime || !is_prime(p))
    throw Error(ErrorKind::ValidationError,
                std::to_string(p) + " is not a prime below 2^16");
}

void UtMatrix::check_index(int i, int j) const {
  if (i < 1 || j > n_ || i >= j)
    throw Error(ErrorKind::IndexOutOfRange,
                "position (" + std::to_string(i) + "," + std::to_string(j) +
                    ") is not strictly upper in degree " + std::to_string(n_));
}

std::uint32_t UtMatrix::get(int i, int j) const {
  check_index(i, j);
  return e_[packed(n_, i, j)];
}

void UtMatrix::set(int i, int j, std::int64_t value) {
  check_index(i, j);
  std::int64_t r = value % std::int64_t(p_);
  if (r < 0) r += p_;
  e_[packed(n_, i, j)] = std::uint16_t(r);
}

std::vector<MatrixEntry> UtMatrix::entries() const {
  std::vector<MatrixEntry> out;
  for (int i = 1; i < n_; ++i)
    for (int j = i + 1; j <= n_; ++j)
      if (auto v = e_[packed(n_, i, j)]) out.push_back({i, j, v});
  return out;
}

bool UtMatrix::is_identity() const noexcept {
  const int m = n_ * (n_ - 1) / 2;
  for (int k = 0; k < m; ++k)
    if (e_[k]) return false;
  return true;
}

int UtMatrix::level() const noexcept {
  for (int d = 1; d < n_; ++d)
    for (int i = 1; i + d <= n_; ++i)
      if (e_[packed(n_, i, i + d)]) return d;
  return n_;
}

std::string UtMatrix::to_string() const {
  auto es = entries();
  if (es.empty()) return "1";
  std::string s;
  for (auto& e : es) {
    if (!s.empty()) s += " ";
    s += "(" + std::to_string(e.i) + "," + std::to_string(e.j) +
         ")=" + std::to_string(e.value);
  }
  return s;
}

std::uint64_t UtMatrix::hash() const noexcept {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t x) {
    h ^= x;
    h *= 1099511628211ull;
  };
  mix(std::uint64_t(n_));
  mix(p_);
  const int m = n_ * (n_ - 1) / 2;
  for (int k = 0; k < m; ++k) mix(e_[k]);
  return h;
}

// --- arithmetic --------------------------------------------------------------

namespace {

void require_same(const UtMatrix& a, const UtMatrix& b) {
  if (a.n() != b.n() || a.p() != b.p())
    throw Error(ErrorKind::DimensionMismatch,
                "matrices over (n=" + std::to_string(a.n()) + ", p=" +
                    std::to_string(a.p()) + ") and (n=" + std::to_string(b.n()) +
                    ", p=" + std::to_string(b.p()) + ")");
}

}  // namespace

UtMatrix transvection_matrix(const Transvection& t, int n, std::uint32_t p) {
  UtMatrix m(n, p);
  m.set(t.i, t.j, t.lambda);
  return m;
}

UtMatrix ut_mul(const UtMatrix& a, const UtMatrix& b) {
  require_same(a, b);
  const int n = a.n();
  const std::uint64_t p = a.p();
  UtMatrix c(a);
  for (int i = 1; i < n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      std::uint64_t s = std::uint64_t(a.raw(UtMatrix::packed(n, i, j))) +
                        b.raw(UtMatrix::packed(n, i, j));
      for (int k = i + 1; k < j; ++k)
        s += std::uint64_t(a.raw(UtMatrix::packed(n, i, k))) *
             b.raw(UtMatrix::packed(n, k, j));
      c.raw(UtMatrix::packed(n, i, j)) = std::uint16_t(s % p);
    }
  }
  return c;
}

UtMatrix ut_inv(const UtMatrix& a) {
  const int n = a.n();
  const std::uint64_t p = a.p();
  UtMatrix x(a);
  // a x = 1, solved level by level: x_ij = -(a_ij + Σ_k a_ik x_kj)
  for (int d = 1; d < n; ++d) {
    for (int i = 1; i + d <= n; ++i) {
      const int j = i + d;
      std::uint64_t s = a.raw(UtMatrix::packed(n, i, j));
      for (int k = i + 1; k < j; ++k)
        s += std::uint64_t(a.raw(UtMatrix::packed(n, i, k))) *
             x.raw(UtMatrix::packed(n, k, j));
      s %= p;
      x.raw(UtMatrix::packed(n, i, j)) = std::uint16_t(s ? p - s : 0);
    }
  }
  return x;
}

UtMatrix ut_comm(const UtMatrix& a, const UtMatrix& b) {
  return ut_mul(ut_inv(ut_mul(b, a)), ut_mul(a, b));
}

UtMatrix ut_conj(const UtMatrix& a, const UtMatrix& b) {
  return ut_mul(ut_mul(ut_inv(b), a), b);
}

UtMatrix ut_pow(const UtMatrix& a, std::int64_t k) {
  UtMatrix base = k < 0 ? ut_inv(a) : a;
  if (k < 0) k = -k;
  UtMatrix r(a.n(), a.p());
  while (k) {
    if (k & 1) r = ut_mul(r, base);
    base = ut_mul(base, base);
    k >>= 1;
  }
  return r;
}

UtMatrix transvection_commutator(int i, int k, std::uint32_t alpha, int m,
                                 int j, std::uint32_t beta, int n,
                                 std::uint32_t p) {
  UtMatrix id(n, p);
  if (i < 1 || k > n || i >= k || m < 1 || j > n || m >= j)
    throw Error(ErrorKind::IndexOutOfRange, "transvection index out of range");
  const std::int64_t ab = std::int64_t(alpha % p) * (beta % p);
  if (k == m) return tv(n, p, i, j, ab);
  if (i == j) return tv(n, p, m, k, -ab);
  return id;
}

std::vector<Transvection> factor_transvections(const UtMatrix& a) {
  const int n = a.n();
  const std::uint32_t p = a.p();
  std::vector<Transvection> out;
  UtMatrix r(a);
  for (int d = 1; d < n; ++d) {
    for (int i = 1; i + d <= n; ++i) {
      const int j = i + d;
      const std::uint32_t lambda = r.raw(UtMatrix::packed(n, i, j));
      if (!lambda) continue;
      out.push_back({i, j, lambda});
      // row_i -= lambda * row_j
      r.raw(UtMatrix::packed(n, i, j)) = 0;
      for (int k = j + 1; k <= n; ++k) {
        std::uint64_t v = r.raw(UtMatrix::packed(n, i, k)) +
                          std::uint64_t(p - lambda) * r.raw(UtMatrix::packed(n, j, k));
        r.raw(UtMatrix::packed(n, i, k)) = std::uint16_t(v % p);
      }
    }
  }
  return out;
}

UtMatrix recompose(const std::vector<Transvection>& factors, int n,
                   std::uint32_t p) {
  UtMatrix r(n, p);
  for (auto& t : factors) r = ut_mul(r, transvection_matrix(t, n, p));
  return r;
}

// --- families ----------------------------------------------------------------

std::string_view to_string(Family f) {
  switch (f) {
    case Family::UT: return "UT";
    case Family::UTsub: return "UTsub";
    case Family::Gamma: return "Gamma";
  }
  return "?";
}

void UtFamilySpec::validate() const {
  if (n < 2 || n > kMaxDegree)
    throw Error(ErrorKind::ValidationError,
                "n = " + std::to_string(n) + " outside [2, " +
                    std::to_string(kMaxDegree) + "]");
  if (p > kMaxPrime || !is_prime(p))
    throw Error(ErrorKind::ValidationError,
                std::to_string(p) + " is not a prime below 2^16");
  if (family == Family::UTsub && ell < 1)
    throw Error(ErrorKind::ValidationError, "UTsub level must be >= 1");
  if (family == Family::Gamma && (ell < 1 || ell > n - 1))
    throw Error(ErrorKind::ValidationError,
                "Gamma level " + std::to_string(ell) + " outside [1, " +
                    std::to_string(n - 1) + "]");
}

bool UtFamilySpec::position_free(int i, int j) const {
  switch (family) {
    case Family::UT: return true;
    case Family::UTsub: return j - i >= ell;
    case Family::Gamma: return j - i < ell;
  }
  return false;
}

int UtFamilySpec::dimension() const {
  int d = 0;
  for (int i = 1; i < n; ++i)
    for (int j = i + 1; j <= n; ++j) d += position_free(i, j);
  return d;
}

std::string UtFamilySpec::render() const {
  std::string s = std::string(to_string(family)) + "(" + std::to_string(n) +
                  "," + std::to_string(p);
  if (family != Family::UT) s += "," + std::to_string(ell);
  return s + ")";
}

UtGroup::UtGroup(UtFamilySpec spec) : spec_(spec) { spec_.validate(); }

UtMatrix UtGroup::truncate(UtMatrix a) const {
  if (spec_.family != Family::Gamma) return a;
  for (int i = 1; i < spec_.n; ++i)
    for (int j = i + spec_.ell; j <= spec_.n; ++j)
      a.raw(UtMatrix::packed(spec_.n, i, j)) = 0;
  return a;
}

UtMatrix UtGroup::mul(const UtMatrix& a, const UtMatrix& b) const {
  return truncate(ut_mul(a, b));
}
UtMatrix UtGroup::inv(const UtMatrix& a) const { return truncate(ut_inv(a)); }
UtMatrix UtGroup::comm(const UtMatrix& a, const UtMatrix& b) const {
  return truncate(ut_comm(a, b));
}
UtMatrix UtGroup::conj(const UtMatrix& a, const UtMatrix& b) const {
  return truncate(ut_conj(a, b));
}

bool UtGroup::contains(const UtMatrix& a) const {
  if (a.n() != spec_.n || a.p() != spec_.p) return false;
  for (auto& e : a.entries())
    if (!spec_.position_free(e.i, e.j)) return false;
  return true;
}

std::vector<Transvection> UtGroup::factor(const UtMatrix& a) const {
  return factor_transvections(a);
}

UtMatrix UtGroup::t(int i, int j, std::int64_t lambda) const {
  return truncate(tv(spec_.n, spec_.p, i, j, lambda));
}

UtMatrix UtGroup::random_element(std::mt19937_64& rng) const {
  UtMatrix m(spec_.n, spec_.p);
  for (int i = 1; i < spec_.n; ++i)
    for (int j = i + 1; j <= spec_.n; ++j)
      if (spec_.position_free(i, j)) m.set(i, j, std::int64_t(rng() % spec_.p));
  return m;
}

std::vector<UtMatrix> UtGroup::generators() const {
  std::vector<UtMatrix> out;
  for (int d = 1; d < spec_.n; ++d)
    for (int i = 1; i + d <= spec_.n; ++i)
      if (spec_.position_free(i, i + d)) out.push_back(t(i, i + d, 1));
  return out;
}

ElementDomain<UtMatrix> UtGroup::domain() const {
  UtGroup self = *this;
  return {[self](const UtMatrix& a, const UtMatrix& b) { return self.mul(a, b); },
          [self](const UtMatrix& a) { return self.inv(a); }, identity()};
}

namespace {

std::uint64_t checked_order(const UtFamilySpec& spec, std::size_t cap) {
  std::uint64_t order = 1;
  for (int k = 0; k < spec.dimension(); ++k) {
    order *= spec.p;
    if (order > cap)
      throw Error(ErrorKind::CapExceeded,
                  spec.render() + " has more than " + std::to_string(cap) +
                      " elements");
  }
  return order;
}

}  // namespace

FamilyBuild build_family(const UtFamilySpec& spec, bool want_table,
                         std::size_t closure_cap, std::size_t table_cap) {
  UtGroup g(spec);
  FamilyBuild out;
  out.generators = g.generators();
  if (!want_table) return out;
  checked_order(spec, std::min(closure_cap, table_cap));

  if (spec.family == Family::Gamma) {
    UtFamilySpec whole{Family::UT, spec.n, spec.p, 1};
    bool whole_fits = true;
    try {
      checked_order(whole, std::min(closure_cap, table_cap));
    } catch (const Error&) {
      whole_fits = false;
    }
    if (whole_fits) {
      UtGroup ut(whole);
      auto c = closure<UtMatrix, UtMatrixHash>(ut.generators(), ut.domain(),
                                               closure_cap, table_cap);
      Subset lower;
      for (Elem k = 0; k < c.elements.size(); ++k)
        if (c.elements[k].level() >= spec.ell) lower.push_back(k);
      auto table = std::make_shared<const GroupTable>(std::move(c.table));
      auto q = quotient_normal(table, lower);
      std::vector<UtMatrix> reps(q.group.order(), g.identity());
      for (Elem k = 0; k < c.elements.size(); ++k)
        reps[q.projection(k)] = g.truncate(c.elements[k]);
      out.elements = std::move(reps);
      out.table = std::move(q.group);
      return out;
    }
  }
  auto c = closure<UtMatrix, UtMatrixHash>(out.generators, g.domain(),
                                           closure_cap, table_cap);
  out.elements = std::move(c.elements);
  out.table = std::move(c.table);
  return out;
}

void sort_matrices(std::vector<UtMatrix>& v) {
  std::sort(v.begin(), v.end(), [](const UtMatrix& a, const UtMatrix& b) {
    const int m = a.n() * (a.n() - 1) / 2;
    for (int k = 0; k < m; ++k)
      if (a.raw(k) != b.raw(k)) return a.raw(k) < b.raw(k);
    return false;
  });
}

std::vector<UtMatrix> enumerate_ut_level(int n, std::uint32_t p, int ell,
                                         std::size_t cap) {
  UtFamilySpec spec{Family::UTsub, n, p, std::max(ell, 1)};
  checked_order(spec, cap);
  std::vector<std::pair<int, int>> free;
  for (int i = 1; i < n; ++i)
    for (int j = i + 1; j <= n; ++j)
      if (spec.position_free(i, j)) free.emplace_back(i, j);
  std::vector<UtMatrix> out;
  UtMatrix m(n, p);
  // odometer over the free coordinates
  while (true) {
    out.push_back(m);
    std::size_t k = 0;
    for (; k < free.size(); ++k) {
      auto [i, j] = free[k];
      std::uint32_t v = m.get(i, j) + 1;
      if (v < p) {
        m.set(i, j, v);
        break;
      }
      m.set(i, j, 0);
    }
    if (k == free.size()) break;
  }
  sort_matrices(out);
  return out;
}

namespace {

class SubgroupBuilder {
 public:
  explicit SubgroupBuilder(int n, std::uint32_t p, std::size_t cap) : cap_(cap) {
    UtMatrix one(n, p);
    set_.insert(one);
    elems_.push_back(one);
  }

  bool add_generator(const UtMatrix& g) {
    if (set_.count(g)) return false;
    gens_.push_back(g);
    for (std::size_t head = 0; head < elems_.size(); ++head) {
      for (const auto& s : gens_) {
        UtMatrix y = ut_mul(elems_[head], s);
        if (set_.insert(y).second) {
          if (elems_.size() >= cap_)
            throw Error(ErrorKind::CapExceeded,
                        "subgroup exceeds cap of " + std::to_string(cap_));
          elems_.push_back(std::move(y));
        }
      }
    }
    return true;
  }

  // Adds conjugates of the current generators until the subgroup is
  // normalized by `ambient`.
  void normalize(const std::vector<UtMatrix>& ambient) {
    for (std::size_t k = 0; k < gens_.size(); ++k)
      for (const auto& g : ambient) add_generator(ut_conj(gens_[k], g));
  }

  std::vector<UtMatrix> take() {
    sort_matrices(elems_);
    return std::move(elems_);
  }

 private:
  std::size_t cap_;
  std::unordered_set<UtMatrix, UtMatrixHash> set_;
  std::vector<UtMatrix> elems_;
  std::vector<UtMatrix> gens_;
};

}  // namespace

std::vector<UtMatrix> subgroup_elements(const std::vector<UtMatrix>& gens,
                                        std::size_t cap) {
  if (gens.empty()) return {UtMatrix()};
  SubgroupBuilder b(gens[0].n(), gens[0].p(), cap);
  for (auto& g : gens) b.add_generator(g);
  return b.take();
}

std::vector<std::vector<UtMatrix>> lower_central_series(int n, std::uint32_t p,
                                                        std::size_t cap) {
  UtGroup g(UtFamilySpec{Family::UT, n, p, 1});
  checked_order(g.spec(), cap);
  const auto gens = g.generators();
  std::vector<std::vector<UtMatrix>> series{subgroup_elements(gens, cap)};
  while (series.back().size() > 1) {
    SubgroupBuilder next(n, p, cap);
    for (const auto& x : series.back())
      for (const auto& s : gens) next.add_generator(ut_comm(x, s));
    next.normalize(gens);
    auto level = next.take();
    if (level.size() == series.back().size())
      throw Error(ErrorKind::InternalError, "lower central series stalled");
    series.push_back(std::move(level));
  }
  return series;
}

std::vector<UtMatrix> commutator_level_subgroup(int n, std::uint32_t p, int r,
                                                int s, std::size_t cap) {
  auto level_gens = [&](int ell) {
    return UtGroup(UtFamilySpec{Family::UTsub, n, p, ell}).generators();
  };
  SubgroupBuilder b(n, p, cap);
  for (const auto& x : level_gens(r))
    for (const auto& y : level_gens(s)) b.add_generator(ut_comm(x, y));
  return b.take();
}

// --- θ -------------------------------------------------------------------------

UtMatrix theta_apply(const UtMatrix& a) {
  const int n = a.n() + 1;
  UtMatrix r(n, a.p());
  for (auto& t : factor_transvections(a)) {
    int i = t.i == 1 ? 1 : t.i + 1;
    r = ut_mul(r, tv(n, a.p(), i, t.j + 1, t.lambda));
  }
  return r;
}

UtMatrix theta_chain(const UtMatrix& a, int target_n) {
  UtMatrix r = a;
  while (r.n() < target_n) r = theta_apply(r);
  return r;
}

ThetaEmbedding theta_embedding(int n, std::uint32_t p, std::size_t closure_cap,
                               std::size_t table_cap) {
  if (n < 3)
    throw Error(ErrorKind::ValidationError, "theta needs target degree >= 3");
  UtGroup source(UtFamilySpec{Family::UT, n - 1, p, 1});
  UtGroup target(UtFamilySpec{Family::UT, n, p, 1});
  checked_order(source.spec(), closure_cap);
  const auto gens = source.generators();
  const auto elems = subgroup_elements(gens, closure_cap);

  ThetaEmbedding out;
  out.n = n;
  out.p = p;
  out.source_order = elems.size();
  if (!theta_apply(source.identity()).is_identity())
    throw Error(ErrorKind::NotHomomorphism, "theta(1) != 1");
  std::vector<UtMatrix> images;
  images.reserve(elems.size());
  for (const auto& x : elems) {
    const UtMatrix tx = theta_apply(x);
    images.push_back(tx);
    for (const auto& s : gens) {
      if (theta_apply(ut_mul(x, s)) != ut_mul(tx, theta_apply(s)))
        throw Error(ErrorKind::NotHomomorphism,
                    "theta(x s) != theta(x) theta(s) for x = " + x.to_string() +
                        ", s = " + s.to_string());
      ++out.checked_products;
    }
  }
  sort_matrices(images);
  if (std::adjacent_find(images.begin(), images.end()) != images.end())
    throw Error(ErrorKind::NotHomomorphism, "theta is not injective");
  out.image_of_corner = theta_apply(source.t(1, n - 1, 1));

  const std::uint64_t target_order = [&] {
    std::uint64_t o = 1;
    for (int k = 0; k < n * (n - 1) / 2 && o <= table_cap; ++k) o *= p;
    return o;
  }();
  if (target_order <= table_cap) {
    auto src = build_family(source.spec(), true, closure_cap, table_cap);
    auto tgt = build_family(target.spec(), true, closure_cap, table_cap);
    std::unordered_map<UtMatrix, Elem, UtMatrixHash> index;
    for (Elem k = 0; k < tgt.elements.size(); ++k) index.emplace(tgt.elements[k], k);
    std::vector<Elem> map(src.elements.size());
    for (Elem k = 0; k < src.elements.size(); ++k)
      map[k] = index.at(theta_apply(src.elements[k]));
    out.table_map = verify_homomorphism(
        std::move(map), std::make_shared<const GroupTable>(std::move(*src.table)),
        std::make_shared<const GroupTable>(std::move(*tgt.table)));
  }
  return out;
}

}  // namespace bogomolov
