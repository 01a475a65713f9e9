#include <bogomolov/wedgecert.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <tuple>

namespace bogomolov {

namespace {

constexpr std::string_view kRuleNames[] = {"SELF",    "CANCEL",        "INV-NORM", "BIADD-L",
                                           "BIADD-R", "SWAP",          "POWER-COLLECT",
                                           "DISCARD", "INSERT",        "ANTISYM"};

constexpr std::size_t kStepLimit = 50'000'000;

[[noreturn]] void fail(ErrorKind kind, const RewriteStep& s, const std::string& msg) {
  throw Error(kind, std::string(to_string(s.rule)) + " at " + std::to_string(s.position) + ": " + msg);
}

bool commuting(const UtGroup& g, const WedgeAtom& a) { return g.comm(a.u, a.v).is_identity(); }

UtMatrix atom_kappa(const UtGroup& g, const WedgeAtom& a) {
  UtMatrix c = g.comm(a.u, a.v);
  return a.eps < 0 ? g.inv(c) : c;
}

// The single non-zero entry of a transvection.
std::optional<MatrixEntry> single_entry(const UtMatrix& m) {
  std::optional<MatrixEntry> found;
  const int n = m.n();
  for (int i = 1; i < n; ++i)
    for (int j = i + 1; j <= n; ++j)
      if (std::uint32_t v = m.raw(UtMatrix::packed(n, i, j))) {
        if (found) return std::nullopt;
        found = MatrixEntry{i, j, v};
      }
  return found;
}

struct Leading {
  int level = 0;
  int count = 0;
  MatrixEntry first{0, 0, 0};
};

// Non-zero entries on the lowest occupied superdiagonal.
Leading leading(const UtMatrix& m) {
  Leading l;
  const int n = m.n();
  for (int d = 1; d < n; ++d) {
    for (int i = 1; i + d <= n; ++i)
      if (std::uint32_t v = m.raw(UtMatrix::packed(n, i, i + d))) {
        if (!l.count) l.first = {i, i + d, v};
        ++l.count;
      }
    if (l.count) {
      l.level = d;
      return l;
    }
  }
  return l;
}

void check_atom(const UtGroup& g, const WedgeAtom& a, const RewriteStep& s) {
  if (!g.contains(a.u) || !g.contains(a.v)) fail(ErrorKind::PatternMismatch, s, "atom slot outside the group");
  if (a.eps != 1 && a.eps != -1) fail(ErrorKind::PatternMismatch, s, "atom sign must be ±1");
}

}  // namespace

std::string_view to_string(Rule r) { return kRuleNames[static_cast<int>(r)]; }

std::optional<Rule> rule_from_string(std::string_view s) {
  for (Rule r : kAllRules)
    if (to_string(r) == s) return r;
  return std::nullopt;
}

UtMatrix kappa(const UtGroup& g, const std::vector<WedgeAtom>& atoms) {
  UtMatrix k = g.identity();
  for (const auto& a : atoms) k = g.mul(k, atom_kappa(g, a));
  return k;
}

UtMatrix kappa(const WedgeWord& w) { return kappa(UtGroup(w.context), w.atoms); }

void apply_step(const UtGroup& g, std::vector<WedgeAtom>& w, const RewriteStep& s) {
  const std::size_t q = s.position;
  auto need = [&](std::size_t count) {
    if (q + count > w.size()) fail(ErrorKind::PatternMismatch, s, "position out of range");
  };
  auto positive = [&](std::size_t k) {
    if (w[k].eps != 1) fail(ErrorKind::PatternMismatch, s, "atom at " + std::to_string(k) + " is not positive");
  };
  auto param = [&](std::size_t k) -> const UtMatrix& {
    if (s.params.size() != 2) fail(ErrorKind::PatternMismatch, s, "expected two parameters");
    if (!g.contains(s.params[k])) fail(ErrorKind::PatternMismatch, s, "parameter outside the group");
    return s.params[k];
  };

  switch (s.rule) {
    case Rule::Self:
      need(1);
      if (!(w[q].u == w[q].v)) fail(ErrorKind::PatternMismatch, s, "slots differ");
      w.erase(w.begin() + q);
      return;

    case Rule::Cancel:
      need(2);
      if (!(w[q].u == w[q + 1].u && w[q].v == w[q + 1].v && w[q].eps == -w[q + 1].eps))
        fail(ErrorKind::PatternMismatch, s, "atoms are not mutually inverse");
      w.erase(w.begin() + q, w.begin() + q + 2);
      return;

    case Rule::InvNorm: {
      need(1);
      if (w[q].eps != -1) fail(ErrorKind::PatternMismatch, s, "atom is not negative");
      const WedgeAtom a = w[q];
      w[q] = {g.inv(a.u), g.conj(a.v, a.u), 1};
      return;
    }

    case Rule::Antisym: {
      need(1);
      const WedgeAtom a = w[q];
      w[q] = {a.v, a.u, -a.eps};
      return;
    }

    case Rule::BiaddL:
      if (s.direction == Direction::Split) {
        need(1);
        positive(q);
        const UtMatrix& x = param(0);
        const UtMatrix& y = param(1);
        if (!(g.mul(x, y) == w[q].u)) fail(ErrorKind::SideConditionFailed, s, "x·y ≠ u");
        const UtMatrix z = w[q].v;
        w[q] = {g.conj(x, y), g.conj(z, y), 1};
        w.insert(w.begin() + q + 1, WedgeAtom{y, z, 1});
      } else {
        need(2);
        positive(q);
        positive(q + 1);
        const WedgeAtom a = w[q], b = w[q + 1];
        if (!(g.conj(b.v, b.u) == a.v)) fail(ErrorKind::SideConditionFailed, s, "second slot is not z^y");
        w[q] = {g.mul(b.u, a.u), b.v, 1};
        w.erase(w.begin() + q + 1);
      }
      return;

    case Rule::BiaddR:
      if (s.direction == Direction::Split) {
        need(1);
        positive(q);
        const UtMatrix& y = param(0);
        const UtMatrix& z = param(1);
        if (!(g.mul(y, z) == w[q].v)) fail(ErrorKind::SideConditionFailed, s, "y·z ≠ v");
        const UtMatrix x = w[q].u;
        w[q] = {x, z, 1};
        w.insert(w.begin() + q + 1, WedgeAtom{g.conj(x, z), g.conj(y, z), 1});
      } else {
        need(2);
        positive(q);
        positive(q + 1);
        const WedgeAtom a = w[q], b = w[q + 1];
        if (!(g.conj(a.u, a.v) == b.u)) fail(ErrorKind::SideConditionFailed, s, "first slot is not x^z");
        w[q] = {a.u, g.mul(a.v, b.v), 1};
        w.erase(w.begin() + q + 1);
      }
      return;

    case Rule::Swap: {
      need(2);
      if (!s.atom) fail(ErrorKind::PatternMismatch, s, "missing correction atom");
      const WedgeAtom a = w[q], b = w[q + 1];
      const WedgeAtom c{atom_kappa(g, a), atom_kappa(g, b), 1};
      if (!(c == *s.atom)) fail(ErrorKind::SideConditionFailed, s, "correction differs from (κA, κB)");
      w[q] = b;
      w[q + 1] = a;
      w.insert(w.begin() + q + 2, c);
      return;
    }

    case Rule::PowerCollect: {
      const std::size_t m = s.count;
      if (m < 2) fail(ErrorKind::PatternMismatch, s, "run length must be at least 2");
      need(m);
      for (std::size_t k = 1; k < m; ++k)
        if (!(w[q + k] == w[q])) fail(ErrorKind::PatternMismatch, s, "run atoms differ");
      if (!commuting(g, w[q])) fail(ErrorKind::SideConditionFailed, s, "[x, y] ≠ 1");
      UtMatrix xm = g.identity();
      for (std::size_t k = 0; k < m; ++k) xm = g.mul(xm, w[q].u);
      w[q].u = xm;
      w.erase(w.begin() + q + 1, w.begin() + q + m);
      return;
    }

    case Rule::Discard:
      need(1);
      if (!s.atom || !(*s.atom == w[q])) fail(ErrorKind::PatternMismatch, s, "recorded atom differs from the word");
      if (!commuting(g, w[q])) fail(ErrorKind::SideConditionFailed, s, "discarded atom does not commute");
      w.erase(w.begin() + q);
      return;

    case Rule::Insert:
      if (q > w.size()) fail(ErrorKind::PatternMismatch, s, "position out of range");
      if (!s.atom) fail(ErrorKind::PatternMismatch, s, "missing atom");
      check_atom(g, *s.atom, s);
      if (!commuting(g, *s.atom)) fail(ErrorKind::SideConditionFailed, s, "inserted atom does not commute");
      w.insert(w.begin() + q, *s.atom);
      return;
  }
  fail(ErrorKind::PatternMismatch, s, "unknown rule");
}

WedgeWord apply_step(WedgeWord w, const RewriteStep& s) {
  apply_step(UtGroup(w.context), w.atoms, s);
  return w;
}

// --- generator ---------------------------------------------------------------

namespace {

using Key = std::tuple<int, int, int>;  // (level of κ, i, j)

class Builder {
 public:
  Builder(const UtFamilySpec& spec, std::vector<WedgeAtom> atoms)
      : g_(spec), gap_(spec.family == Family::UTsub ? spec.ell : 1), w_(std::move(atoms)) {
    peak_ = w_.size();
  }

  const UtGroup& group() const { return g_; }
  std::vector<WedgeAtom>& word() { return w_; }

  RewriteTrace finish(const UtFamilySpec& spec) {
    return RewriteTrace{WedgeWord{spec, std::move(w_)}, std::move(steps_), std::move(discarded_)};
  }
  std::size_t swaps() const { return swaps_; }
  std::size_t peak() const { return peak_; }

  // INV-NORM and BIADD splits until every atom is a transvection pair.
  void expand_all() {
    std::size_t q = 0;
    while (q < w_.size()) {
      Tag t(this, "EXPAND");
      const WedgeAtom& a = w_[q];
      if (a.u.is_identity() || a.v.is_identity())
        discard(q);
      else if (a.eps < 0)
        inv_norm(q);
      else if (!single_entry(a.u) || !single_entry(a.v))
        split_once(q);
      else
        ++q;
    }
  }

  // Gnome sort by key over canonical atoms; equal keys merge, every
  // transposition leaves its correction atom behind for later passes.
  void collect(std::size_t q) {
    while (q < w_.size()) {
      if (!normalize(q)) continue;
      if (q == 0) {
        ++q;
        continue;
      }
      const Key kp = key(w_[q - 1]), kq = key(w_[q]);
      if (kp < kq) {
        ++q;
      } else if (kp == kq) {
        Tag t(this, "STEP1-COLLECT");
        add_left(q - 1);
        --q;
      } else {
        Tag t(this, "COLLECT");
        swap(q - 1);
        --q;
      }
    }
  }

  // Word must be collected. Each [t_ij(c), t_js^φ] with j below the last
  // column r is cancelled against an inserted [t_ij(-c) t_rs, (t_js t_ir(-c))^φ],
  // which leaves c on [t_ir, t_rs^φ]; the last column then sums to zero.
  void eliminate() {
    check_row_sums();
    while (!w_.empty()) {
      auto [d, i, j] = key(w_[0]);
      const int s = i + d, r = s - gap_;
      if (j == r) throw Error(ErrorKind::NonZeroRowSum, "m(" + std::to_string(i) + "," + std::to_string(d) + ") ≠ 0");
      const std::int64_t c = single_entry(w_[0].u)->value;
      WedgeAtom z{g_.mul(g_.t(i, j, -c), g_.t(r, s, 1)), g_.mul(g_.t(j, s, 1), g_.t(i, r, -c)), 1};
      {
        Tag t(this, "STEP3-ELIM");
        insert(w_.size(), z);
      }
      collect(w_.size() - 1);
    }
  }

  void check_row_sums() {
    std::map<std::pair<int, int>, std::uint64_t> sums;
    for (const auto& a : w_) {
      auto [d, i, j] = key(a);
      sums[{i, d}] += single_entry(a.u)->value;
    }
    for (auto& [ik, m] : sums)
      if (m % g_.p())
        throw Error(ErrorKind::NonZeroRowSum,
                    "m(" + std::to_string(ik.first) + "," + std::to_string(ik.second) + ") = " +
                        std::to_string(m % g_.p()));
  }

  // Canonical atoms are (t_ij(c), t_jk(1), +1) with [t_ij, t_jk] ≠ 1.
  static Key key(const WedgeAtom& a) {
    auto eu = single_entry(a.u);
    auto ev = single_entry(a.v);
    return {ev->j - eu->i, eu->i, eu->j};
  }

  bool is_canonical(const WedgeAtom& a) const {
    if (a.eps != 1) return false;
    auto eu = single_entry(a.u), ev = single_entry(a.v);
    return eu && ev && eu->j == ev->i && ev->value == 1 && !commuting(g_, a);
  }

 private:
  struct Tag {
    Tag(Builder* b, const char* name) : b(b), saved(b->macro_) { b->macro_ = name; }
    ~Tag() { b->macro_ = saved; }
    Builder* b;
    const char* saved;
  };

  void apply(RewriteStep s) {
    s.macro = macro_;
    apply_step(g_, w_, s);
    if (s.rule == Rule::Discard) discarded_.push_back(*s.atom);
    if (s.rule == Rule::Swap) ++swaps_;
    steps_.push_back(std::move(s));
    peak_ = std::max(peak_, w_.size());
    if (steps_.size() > kStepLimit) throw Error(ErrorKind::InternalError, "certificate exceeds the step limit");
  }

  static RewriteStep step(Rule r, std::size_t q) {
    RewriteStep s;
    s.rule = r;
    s.position = q;
    return s;
  }

  void discard(std::size_t q) {
    auto s = step(Rule::Discard, q);
    s.atom = w_[q];
    apply(std::move(s));
  }
  void insert(std::size_t q, WedgeAtom a) {
    auto s = step(Rule::Insert, q);
    s.atom = std::move(a);
    apply(std::move(s));
  }
  void inv_norm(std::size_t q) { apply(step(Rule::InvNorm, q)); }
  void antisym(std::size_t q) { apply(step(Rule::Antisym, q)); }
  void swap(std::size_t q) {
    auto s = step(Rule::Swap, q);
    s.atom = WedgeAtom{atom_kappa(g_, w_[q]), atom_kappa(g_, w_[q + 1]), 1};
    apply(std::move(s));
  }
  void split(Rule r, std::size_t q, UtMatrix a, UtMatrix b) {
    auto s = step(r, q);
    s.params = {std::move(a), std::move(b)};
    apply(std::move(s));
  }
  void merge(Rule r, std::size_t q) {
    auto s = step(r, q);
    s.direction = Direction::Merge;
    apply(std::move(s));
  }

  // One BIADD split peeling the leading transvection off a slot. A slot with
  // several leading entries is split first; otherwise the side whose
  // remainder sits closest to its leading level.
  void split_once(std::size_t q) {
    const WedgeAtom& a = w_[q];
    const Leading lu = leading(a.u), lv = leading(a.v);
    bool left;
    if (lu.count >= 2)
      left = true;
    else if (lv.count >= 2)
      left = false;
    else
      left = defect(a.u, lu) <= defect(a.v, lv);
    if (left) {
      UtMatrix x = g_.t(lu.first.i, lu.first.j, lu.first.value);
      UtMatrix c = g_.mul(g_.inv(x), a.u);
      split(Rule::BiaddL, q, std::move(x), std::move(c));  // (x^c, v^c)(c, v)
    } else {
      UtMatrix s = g_.t(lv.first.i, lv.first.j, lv.first.value);
      UtMatrix e = g_.mul(g_.inv(s), a.v);
      split(Rule::BiaddR, q, std::move(s), std::move(e));  // (u, e)(u^e, s^e)
    }
  }

  int defect(const UtMatrix& m, const Leading& l) const {
    UtMatrix rest = g_.mul(g_.inv(g_.t(l.first.i, l.first.j, l.first.value)), m);
    return rest.is_identity() ? 4 * kMaxDegree : rest.level() - l.level;
  }

  // Rewrites the atom at q until it is canonical (true) or gone (false).
  bool normalize(std::size_t q) {
    for (;;) {
      if (q >= w_.size()) return false;
      const WedgeAtom& a = w_[q];
      auto eu = single_entry(a.u), ev = single_entry(a.v);
      // commuting atoms with composite slots are expanded, not dropped: the
      // elimination stage inserts such atoms on purpose
      if (((eu && ev) || a.u.is_identity() || a.v.is_identity()) && commuting(g_, a)) {
        Tag t(this, "EXPAND");
        discard(q);
        return false;
      }
      if (a.eps < 0) {
        Tag t(this, "EXPAND");
        inv_norm(q);
        continue;
      }
      if (!eu || !ev) {
        Tag t(this, "EXPAND");
        split_once(q);
        continue;
      }
      if (eu->j == ev->i) {
        if (ev->value == 1) return true;
        Tag t(this, "SCALE");
        scale(q);
        continue;
      }
      if (ev->j == eu->i) {
        Tag t(this, "ORIENT");
        antisym(q);
        continue;
      }
      throw Error(ErrorKind::InternalError, "non-commuting transvection pair without a shared index");
    }
  }

  // (t_ij(a), t_jk(μ)) → (t_ij(aμ), t_jk(1)) by halving μ.
  void scale(std::size_t q) {
    const std::uint32_t mu = single_entry(w_[q].v)->value;
    if (mu == 1) return;
    if (mu % 2 == 0) {
      split_right_scalar(q, mu / 2, mu / 2);
      add_left(q);
      scale(q);
    } else {
      split_right_scalar(q, 1, mu - 1);  // (a, μ-1)(a, 1)
      scale(q);
      add_left(q);
    }
  }

  // (t_ij(a), t_jk(b + b')) → (t_ij(a), t_jk(b')) (t_ij(a), t_jk(b)).
  void split_right_scalar(std::size_t q, std::uint32_t b, std::uint32_t b2) {
    const MatrixEntry eu = *single_entry(w_[q].u), ev = *single_entry(w_[q].v);
    split(Rule::BiaddR, q, g_.t(ev.i, ev.j, b), g_.t(ev.i, ev.j, b2));
    // second atom is (t_ij(a) t_ik(ab'), t_jk(b)); peel the commuting t_ik
    const UtMatrix x = g_.t(eu.i, eu.j, eu.value);
    const UtMatrix rest = g_.mul(g_.inv(x), w_[q + 1].u);
    if (!rest.is_identity()) {
      split(Rule::BiaddL, q + 1, x, rest);
      discard(q + 2);
    }
  }

  // (x1, z)(y, z) → (y x1, z) for x1, y in one root group and z chained to
  // it: insert (x1, [z, y]), merge right to (x1, z^y), merge left.
  void add_left(std::size_t q) {
    const UtMatrix x1 = w_[q].u, y = w_[q + 1].u, z = w_[q + 1].v;
    const UtMatrix d = g_.mul(g_.inv(z), g_.conj(z, y));
    if (!d.is_identity()) {
      insert(q, WedgeAtom{x1, d, 1});
      merge(Rule::BiaddR, q);
    }
    merge(Rule::BiaddL, q);
  }

  UtGroup g_;
  int gap_;
  std::vector<WedgeAtom> w_;
  std::vector<RewriteStep> steps_;
  std::vector<WedgeAtom> discarded_;
  const char* macro_ = "";
  std::size_t swaps_ = 0;
  std::size_t peak_ = 0;
};

void check_input(const UtGroup& g, const WedgeWord& w) {
  for (std::size_t k = 0; k < w.atoms.size(); ++k) {
    const auto& a = w.atoms[k];
    if (!g.contains(a.u) || !g.contains(a.v) || (a.eps != 1 && a.eps != -1))
      throw Error(ErrorKind::ValidationError,
                  "atom " + std::to_string(k) + " is not an element of " + w.context.render());
  }
}

NormalForm form_of(const UtFamilySpec& spec, const std::vector<WedgeAtom>& atoms, std::size_t discarded) {
  NormalForm nf;
  nf.context = spec;
  nf.discarded = discarded;
  for (const auto& a : atoms) {
    auto eu = single_entry(a.u);
    auto ev = single_entry(a.v);
    nf.exponents.push_back({eu->i, eu->j, ev->j - eu->i, eu->value});
  }
  return nf;
}

}  // namespace

std::uint32_t NormalForm::n(int i, int j, int k) const {
  for (const auto& e : exponents)
    if (e.i == i && e.j == j && e.k == k) return e.value;
  return 0;
}

std::uint32_t NormalForm::row_sum(int i, int k) const {
  std::uint64_t m = 0;
  for (const auto& e : exponents)
    if (e.i == i && e.k == k) m += e.value;
  return std::uint32_t(m % context.p);
}

std::map<std::pair<int, int>, std::uint32_t> NormalForm::row_sums() const {
  std::map<std::pair<int, int>, std::uint32_t> out;
  for (const auto& e : exponents) out[{e.i, e.k}] = row_sum(e.i, e.k);
  return out;
}

WedgeWord NormalForm::word() const {
  UtGroup g(context);
  WedgeWord w{context, {}};
  for (const auto& e : exponents)
    if (e.value % context.p)
      w.atoms.push_back({g.t(e.i, e.j, e.value), g.t(e.j, e.i + e.k, 1), 1});
  return w;
}

RewriteTrace expand_to_transvection_atoms(const WedgeWord& w) {
  Builder b(w.context, w.atoms);
  check_input(b.group(), w);
  b.expand_all();
  return b.finish(w.context);
}

CollectResult collect_normal_form(const WedgeWord& w) {
  Builder b(w.context, w.atoms);
  check_input(b.group(), w);
  for (std::size_t k = 0; k < w.atoms.size(); ++k) {
    const auto& a = w.atoms[k];
    if (a.eps != 1 || !single_entry(a.u) || !single_entry(a.v))
      throw Error(ErrorKind::NonTransvectionInput, "atom " + std::to_string(k) + " is not a positive transvection pair");
  }
  b.collect(0);
  CollectResult r;
  r.trace = b.finish(w.context);
  r.form = form_of(w.context, r.trace.word.atoms, r.trace.discarded.size());
  return r;
}

RewriteTrace eliminate_zero_sums(const NormalForm& nf) {
  for (auto& [ik, m] : nf.row_sums())
    if (m)
      throw Error(ErrorKind::NonZeroRowSum,
                  "m(" + std::to_string(ik.first) + "," + std::to_string(ik.second) + ") = " + std::to_string(m));
  WedgeWord w = nf.word();
  Builder b(w.context, w.atoms);
  for (const auto& a : w.atoms)
    if (!b.is_canonical(a)) throw Error(ErrorKind::NonTransvectionInput, "exponent table names a commuting pair");
  b.eliminate();
  return b.finish(w.context);
}

void check_certifiable(const UtFamilySpec& spec) {
  spec.validate();
  if (spec.family == Family::Gamma && spec.ell > spec.n - 2)
    throw Error(ErrorKind::UnsupportedContext, spec.render() + ": Gamma needs 1 <= ell <= n-2");
}

Certificate certify_trivial(const WedgeWord& w, CertifyStats* stats) {
  check_certifiable(w.context);
  Builder b(w.context, w.atoms);
  check_input(b.group(), w);
  if (!kappa(b.group(), w.atoms).is_identity())
    throw Error(ErrorKind::NotInMStar, "commutator image of the word is not the identity");
  b.collect(0);
  const std::size_t chain = b.word().size();
  b.eliminate();
  Certificate c;
  c.input = w;
  if (stats) {
    stats->swaps = b.swaps();
    stats->peak_length = b.peak();
    stats->chain_atoms = chain;
  }
  RewriteTrace t = b.finish(w.context);
  c.steps = std::move(t.steps);
  c.discarded = std::move(t.discarded);
  c.residual = std::move(t.word);
  if (!c.residual.atoms.empty()) throw Error(ErrorKind::InternalError, "non-empty residual");
  if (stats) {
    stats->steps = c.steps.size();
    stats->discarded = c.discarded.size();
  }
  return c;
}

// --- verifier ----------------------------------------------------------------

VerifyReport verify_certificate(const Certificate& c) {
  VerifyReport r;
  auto reject = [&](std::optional<std::size_t> at, ErrorKind kind, std::string why) {
    r.ok = false;
    r.failed_step = at;
    r.failure_kind = kind;
    r.reason = std::move(why);
    return r;
  };
  std::optional<UtGroup> group;
  try {
    group.emplace(c.input.context);
  } catch (const Error& e) {
    return reject(std::nullopt, e.kind(), e.what());
  }
  const UtGroup& g = *group;
  for (std::size_t k = 0; k < c.input.atoms.size(); ++k) {
    const auto& a = c.input.atoms[k];
    if (!g.contains(a.u) || !g.contains(a.v) || (a.eps != 1 && a.eps != -1))
      return reject(std::nullopt, ErrorKind::ValidationError, "input atom " + std::to_string(k) + " is malformed");
  }
  if (!kappa(g, c.input.atoms).is_identity())
    return reject(std::nullopt, ErrorKind::NotInMStar, "κ(input) ≠ 1");

  std::vector<WedgeAtom> w = c.input.atoms;
  std::size_t discards = 0;
  for (std::size_t k = 0; k < c.steps.size(); ++k) {
    const RewriteStep& s = c.steps[k];
    try {
      apply_step(g, w, s);
    } catch (const Error& e) {
      return reject(k, e.kind(), e.what());
    }
    if (s.rule == Rule::Discard) {
      if (discards >= c.discarded.size() || !(c.discarded[discards] == *s.atom))
        return reject(k, ErrorKind::SideConditionFailed,
                      "discarded atom " + std::to_string(discards) + " differs from the replay");
      ++discards;
    }
    ++r.steps_checked;
  }
  r.discards_checked = discards;
  if (discards != c.discarded.size())
    return reject(std::nullopt, ErrorKind::PatternMismatch, "discard list longer than the replay");
  if (!(c.residual.context == c.input.context) || !(c.residual.atoms == w))
    return reject(std::nullopt, ErrorKind::PatternMismatch, "recorded residual differs from the replay");
  if (!w.empty()) return reject(std::nullopt, ErrorKind::PatternMismatch, "residual is not empty");
  r.ok = true;
  return r;
}

// --- inputs ------------------------------------------------------------------

WedgeWord random_m_star(const UtFamilySpec& spec, std::size_t length, std::uint64_t seed) {
  UtGroup g(spec);
  std::mt19937_64 rng(seed);
  WedgeWord w{spec, {}};
  for (std::size_t k = 0; k < length; ++k) {
    UtMatrix u = g.random_element(rng);
    UtMatrix v = g.random_element(rng);
    int eps = (rng() & 1) ? 1 : -1;
    w.atoms.push_back({std::move(u), std::move(v), eps});
  }
  const int gap = spec.family == Family::UTsub ? spec.ell : 1;
  for (const auto& t : g.factor(g.inv(kappa(g, w.atoms)))) {
    if (t.lambda == 0) continue;
    if (spec.family == Family::Gamma && t.j - t.i >= spec.ell) continue;
    if (t.j - t.i < 2 * gap) throw Error(ErrorKind::InternalError, "commutator image outside [G, G]");
    const int m = t.i + gap;
    w.atoms.push_back({g.t(t.i, m, t.lambda), g.t(m, t.j, 1), 1});
  }
  if (!kappa(g, w.atoms).is_identity()) throw Error(ErrorKind::InternalError, "closing atoms miss κ = 1");
  return w;
}

// --- serialization -----------------------------------------------------------

namespace {

using Json = nlohmann::ordered_json;

Json matrix_json(const UtMatrix& m) {
  Json a = Json::array();
  for (const auto& e : m.entries()) a.push_back({e.i, e.j, e.value});
  return a;
}

Json atom_json(const WedgeAtom& a) {
  Json j;
  j["u"] = matrix_json(a.u);
  j["v"] = matrix_json(a.v);
  j["eps"] = a.eps;
  return j;
}

Json atoms_json(const std::vector<WedgeAtom>& atoms) {
  Json a = Json::array();
  for (const auto& x : atoms) a.push_back(atom_json(x));
  return a;
}

[[noreturn]] void schema(const std::string& what) { throw ParseError(0, what); }

const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) schema(std::string("field \"") + name + "\"");
  return j.at(name);
}

UtMatrix matrix_from(const Json& j, const UtFamilySpec& spec) {
  if (!j.is_array()) schema("matrix as a list of [i, j, value]");
  UtMatrix m(spec.n, spec.p);
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
        !e[2].is_number_integer())
      schema("matrix entry [i, j, value]");
    const int i = e[0].get<int>(), jj = e[1].get<int>();
    if (i < 1 || jj <= i || jj > spec.n) schema("matrix position inside the context");
    m.set(i, jj, e[2].get<std::int64_t>());
  }
  return m;
}

WedgeAtom atom_from(const Json& j, const UtFamilySpec& spec) {
  const Json& eps = field(j, "eps");
  if (!eps.is_number_integer()) schema("integer eps");
  return {matrix_from(field(j, "u"), spec), matrix_from(field(j, "v"), spec), eps.get<int>()};
}

std::vector<WedgeAtom> atoms_from(const Json& j, const UtFamilySpec& spec) {
  if (!j.is_array()) schema("list of atoms");
  std::vector<WedgeAtom> out;
  for (const auto& a : j) out.push_back(atom_from(a, spec));
  return out;
}

}  // namespace

std::string certificate_to_json(const Certificate& c) {
  Json j;
  j["format"] = "bogomolov-certificate";
  j["version"] = 1;
  Json ctx;
  ctx["family"] = std::string(to_string(c.input.context.family));
  ctx["n"] = c.input.context.n;
  ctx["p"] = c.input.context.p;
  ctx["ell"] = c.input.context.ell;
  j["context"] = ctx;
  j["input"] = atoms_json(c.input.atoms);
  Json steps = Json::array();
  for (const auto& s : c.steps) {
    Json st;
    st["rule"] = std::string(to_string(s.rule));
    st["position"] = s.position;
    if (s.rule == Rule::BiaddL || s.rule == Rule::BiaddR)
      st["direction"] = s.direction == Direction::Split ? "split" : "merge";
    if (!s.params.empty()) {
      Json ps = Json::array();
      for (const auto& m : s.params) ps.push_back(matrix_json(m));
      st["params"] = ps;
    }
    if (s.atom) st["atom"] = atom_json(*s.atom);
    if (s.rule == Rule::PowerCollect) st["count"] = s.count;
    if (!s.macro.empty()) st["macro"] = s.macro;
    steps.push_back(std::move(st));
  }
  j["steps"] = std::move(steps);
  j["discarded"] = atoms_json(c.discarded);
  j["residual"] = atoms_json(c.residual.atoms);
  return j.dump(1) + "\n";
}

Certificate certificate_from_json(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.byte, "well-formed JSON");
  }
  try {
    if (field(j, "format") != "bogomolov-certificate") schema("format \"bogomolov-certificate\"");
    if (field(j, "version") != 1) schema("version 1");
    const Json& ctx = field(j, "context");
    UtFamilySpec spec;
    const std::string fam = field(ctx, "family").get<std::string>();
    if (fam == "UT")
      spec.family = Family::UT;
    else if (fam == "UTsub")
      spec.family = Family::UTsub;
    else if (fam == "Gamma")
      spec.family = Family::Gamma;
    else
      schema("family UT, UTsub or Gamma");
    spec.n = field(ctx, "n").get<int>();
    spec.p = field(ctx, "p").get<std::uint32_t>();
    spec.ell = field(ctx, "ell").get<int>();
    spec.validate();

    Certificate c;
    c.input = {spec, atoms_from(field(j, "input"), spec)};
    const Json& steps = field(j, "steps");
    if (!steps.is_array()) schema("list of steps");
    for (const auto& st : steps) {
      RewriteStep s;
      auto rule = rule_from_string(field(st, "rule").get<std::string>());
      if (!rule) schema("a catalogue rule name");
      s.rule = *rule;
      s.position = field(st, "position").get<std::size_t>();
      if (st.contains("direction")) {
        const std::string d = st.at("direction").get<std::string>();
        if (d != "split" && d != "merge") schema("direction split or merge");
        s.direction = d == "split" ? Direction::Split : Direction::Merge;
      }
      if (st.contains("params"))
        for (const auto& m : st.at("params")) s.params.push_back(matrix_from(m, spec));
      if (st.contains("atom")) s.atom = atom_from(st.at("atom"), spec);
      if (st.contains("count")) s.count = st.at("count").get<std::uint32_t>();
      if (st.contains("macro")) s.macro = st.at("macro").get<std::string>();
      c.steps.push_back(std::move(s));
    }
    c.discarded = atoms_from(field(j, "discarded"), spec);
    c.residual = {spec, atoms_from(field(j, "residual"), spec)};
    return c;
  } catch (const ParseError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("certificate fields of the right type (") + e.what() + ")");
  } catch (const Error& e) {
    throw ParseError(0, std::string("a valid context (") + e.what() + ")");
  }
}

}  // namespace bogomolov
