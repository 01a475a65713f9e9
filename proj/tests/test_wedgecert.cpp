#include <bogomolov/wedgecert.hpp>

#include "rule_samples.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace bogomolov;
using namespace bogomolov::samples;

namespace {

UtFamilySpec ut(int n, std::uint32_t p) { return {Family::UT, n, p, 1}; }

WedgeAtom atom(const UtGroup& g, int i, int j, int k, int l, int eps = 1) {
  return {g.t(i, j, 1), g.t(k, l, 1), eps};
}

bool all_discards_commute(const UtGroup& g, const std::vector<WedgeAtom>& d) {
  for (const auto& a : d)
    if (!g.comm(a.u, a.v).is_identity()) return false;
  return true;
}

// Replays `steps` from `w` and returns the final word.
std::vector<WedgeAtom> replay(const UtGroup& g, std::vector<WedgeAtom> w,
                              const std::vector<RewriteStep>& steps) {
  for (const auto& s : steps) apply_step(g, w, s);
  return w;
}

}  // namespace

TEST(Wedge, KappaExamples) {
  UtGroup g(ut(3, 2));
  WedgeWord w{ut(3, 2), {atom(g, 1, 2, 2, 3)}};
  EXPECT_EQ(kappa(w), g.t(1, 3, 1));
  EXPECT_TRUE(kappa(WedgeWord{ut(3, 2), {}}).is_identity());
  w.atoms.push_back(atom(g, 1, 2, 2, 3, -1));
  EXPECT_TRUE(kappa(w).is_identity());
}

TEST(Wedge, RuleNames) {
  for (Rule r : kAllRules) EXPECT_EQ(rule_from_string(to_string(r)), r);
  EXPECT_FALSE(rule_from_string("STEP3-ELIM"));
}

TEST(Wedge, SwapExample) {
  UtGroup g(ut(5, 2));
  WedgeWord w{ut(5, 2), {atom(g, 1, 2, 2, 3), atom(g, 3, 4, 4, 5)}};
  RewriteStep s;
  s.rule = Rule::Swap;
  s.atom = atom(g, 1, 3, 3, 5);
  auto out = apply_step(w, s);
  ASSERT_EQ(out.atoms.size(), 3u);
  EXPECT_EQ(out.atoms[0], atom(g, 3, 4, 4, 5));
  EXPECT_EQ(out.atoms[1], atom(g, 1, 2, 2, 3));
  EXPECT_EQ(out.atoms[2], atom(g, 1, 3, 3, 5));
  EXPECT_EQ(kappa(out), kappa(w));

  s.atom = atom(g, 1, 3, 2, 5);
  try {
    apply_step(w, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SideConditionFailed);
  }
}

TEST(Wedge, SelfAndInvNormExamples) {
  UtGroup g(ut(3, 2));
  RewriteStep self;
  self.rule = Rule::Self;
  EXPECT_TRUE(apply_step(WedgeWord{ut(3, 2), {atom(g, 1, 2, 1, 2)}}, self).atoms.empty());

  WedgeWord w{ut(3, 2), {atom(g, 1, 2, 2, 3, -1)}};
  RewriteStep inv;
  inv.rule = Rule::InvNorm;
  auto out = apply_step(w, inv);
  UtMatrix t12 = g.t(1, 2, 1);
  EXPECT_EQ(out.atoms[0], (WedgeAtom{g.inv(t12), g.conj(g.t(2, 3, 1), t12), 1}));
  EXPECT_EQ(kappa(out), kappa(w));

  EXPECT_THROW(apply_step(WedgeWord{ut(3, 2), {atom(g, 1, 2, 2, 3)}}, self), Error);
  inv.position = 3;
  try {
    apply_step(w, inv);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PatternMismatch);
  }
}

TEST(Wedge, KappaPreservedByEveryRule) {
  std::mt19937_64 rng(20);
  for (Rule r : kAllRules) {
    for (int trial = 0; trial < 10'000; ++trial) {
      UtGroup g(random_context(rng));
      auto [w, s] = plant(r, g, rng);
      const UtMatrix before = kappa(g, w);
      ASSERT_NO_THROW(apply_step(g, w, s)) << to_string(r) << " trial " << trial;
      ASSERT_EQ(kappa(g, w), before) << to_string(r) << " trial " << trial;
    }
  }
}

TEST(Wedge, RejectsBrokenSideConditions) {
  UtGroup g(ut(4, 3));
  WedgeAtom noncomm = atom(g, 1, 2, 2, 3);
  RewriteStep s;
  s.rule = Rule::Discard;
  s.atom = noncomm;
  std::vector<WedgeAtom> w{noncomm};
  EXPECT_THROW(apply_step(g, w, s), Error);
  s.rule = Rule::Insert;
  EXPECT_THROW(apply_step(g, w, s), Error);
  s.rule = Rule::PowerCollect;
  s.count = 2;
  w = {noncomm, noncomm};
  EXPECT_THROW(apply_step(g, w, s), Error);
  s = {};
  s.rule = Rule::BiaddL;
  s.params = {g.t(1, 2, 1), g.t(1, 2, 1)};
  w = {noncomm};
  try {
    apply_step(g, w, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SideConditionFailed);
  }
  s.params[1] = g.t(1, 3, 1);
  s.params.pop_back();
  EXPECT_THROW(apply_step(g, w, s), Error);
  EXPECT_EQ(w.size(), 1u);
}

TEST(Wedge, ExpandExamples) {
  UtGroup g4(ut(4, 2));
  WedgeWord already{ut(4, 2), {atom(g4, 1, 2, 2, 3), atom(g4, 1, 3, 2, 4)}};
  auto t = expand_to_transvection_atoms(already);
  EXPECT_TRUE(t.steps.empty());
  EXPECT_EQ(t.word.atoms, already.atoms);

  WedgeWord w{ut(4, 2), {{g4.mul(g4.t(1, 2, 1), g4.t(2, 3, 1)), g4.t(3, 4, 1), 1}}};
  t = expand_to_transvection_atoms(w);
  EXPECT_EQ(kappa(t.word), kappa(w));
  EXPECT_EQ(replay(g4, w.atoms, t.steps), t.word.atoms);
  for (const auto& a : t.word.atoms) {
    EXPECT_TRUE(a.u.is_transvection() && a.v.is_transvection());
    EXPECT_EQ(a.eps, 1);
  }

  UtGroup g5(ut(5, 3));
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    WedgeWord x{ut(5, 3), {{g5.random_element(rng), g5.random_element(rng), -1}}};
    auto e = expand_to_transvection_atoms(x);
    EXPECT_EQ(kappa(e.word), kappa(x));
    for (const auto& a : e.word.atoms) ASSERT_TRUE(a.u.is_transvection() && a.v.is_transvection() && a.eps == 1);
  }
}

TEST(Wedge, CollectExamples) {
  UtGroup g3(ut(3, 2));
  auto r = collect_normal_form({ut(3, 2), {atom(g3, 1, 2, 2, 3)}});
  ASSERT_EQ(r.form.exponents.size(), 1u);
  EXPECT_EQ(r.form.n(1, 2, 2), 1u);
  EXPECT_EQ(r.form.n(1, 2, 3), 0u);

  UtGroup g4(ut(4, 2));
  r = collect_normal_form({ut(4, 2), {atom(g4, 1, 3, 2, 4)}});
  EXPECT_TRUE(r.form.exponents.empty());
  EXPECT_EQ(r.form.discarded, 1u);
  EXPECT_EQ(r.trace.discarded.size(), 1u);

  UtGroup g33(ut(3, 3));
  WedgeWord three{ut(3, 3), std::vector<WedgeAtom>(3, atom(g33, 1, 2, 2, 3))};
  r = collect_normal_form(three);
  EXPECT_EQ(r.form.n(1, 2, 2), 0u);
  EXPECT_TRUE(r.form.exponents.empty());
  EXPECT_FALSE(r.trace.discarded.empty());
  EXPECT_TRUE(all_discards_commute(g33, r.trace.discarded));
  bool tagged = false;
  for (const auto& s : r.trace.steps) tagged |= s.macro == "STEP1-COLLECT";
  EXPECT_TRUE(tagged);

  try {
    collect_normal_form({ut(4, 2), {{g4.mul(g4.t(1, 2, 1), g4.t(2, 3, 1)), g4.t(3, 4, 1), 1}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonTransvectionInput);
  }
}

TEST(Wedge, CollectedFormIsSortedAndPreservesKappaModDiscards) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    UtFamilySpec spec = ut(3 + int(rng() % 4), trial % 2 ? 3 : 5);
    UtGroup g(spec);
    auto e = expand_to_transvection_atoms(WedgeWord{spec, random_atoms(g, rng, 3)});
    auto r = collect_normal_form(e.word);
    EXPECT_TRUE(all_discards_commute(g, r.trace.discarded));
    EXPECT_EQ(kappa(r.form.word()), kappa(e.word));
    EXPECT_EQ(r.form.word().atoms, r.trace.word.atoms);
    for (std::size_t k = 1; k < r.form.exponents.size(); ++k) {
      const auto& a = r.form.exponents[k - 1];
      const auto& b = r.form.exponents[k];
      EXPECT_LT(std::tie(a.k, a.i, a.j), std::tie(b.k, b.i, b.j));
    }
    for (const auto& x : r.form.exponents) EXPECT_NE(x.value, 0u);
  }
}

TEST(Wedge, EliminateExamples) {
  for (std::uint32_t p : {2u, 3u, 5u}) {
    NormalForm nf;
    nf.context = ut(4, p);
    nf.exponents = {{1, 2, 3, 1}, {1, 3, 3, p - 1}};
    auto t = eliminate_zero_sums(nf);
    UtGroup g(nf.context);
    EXPECT_TRUE(t.word.atoms.empty());
    EXPECT_TRUE(replay(g, nf.word().atoms, t.steps).empty());
    EXPECT_TRUE(all_discards_commute(g, t.discarded));
    bool elim = false;
    for (const auto& s : t.steps) elim |= s.macro == "STEP3-ELIM";
    EXPECT_TRUE(elim);
  }

  NormalForm zero;
  zero.context = ut(4, 3);
  EXPECT_TRUE(eliminate_zero_sums(zero).steps.empty());

  NormalForm bad;
  bad.context = ut(4, 3);
  bad.exponents = {{1, 2, 3, 1}};
  try {
    eliminate_zero_sums(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonZeroRowSum);
  }
}

TEST(Wedge, CertifyExamples) {
  UtGroup g(ut(4, 2));
  auto c = certify_trivial({ut(4, 2), {atom(g, 1, 3, 2, 4)}});
  ASSERT_EQ(c.steps.size(), 1u);
  EXPECT_EQ(c.steps[0].rule, Rule::Discard);
  EXPECT_TRUE(verify_certificate(c).ok);

  WedgeWord pair{ut(4, 2), {atom(g, 1, 2, 2, 4), atom(g, 3, 4, 1, 3)}};
  ASSERT_TRUE(kappa(pair).is_identity());
  c = certify_trivial(pair);
  auto r = verify_certificate(c);
  EXPECT_TRUE(r.ok) << r.reason;
  EXPECT_EQ(r.steps_checked, c.steps.size());
  EXPECT_TRUE(c.residual.atoms.empty());

  try {
    certify_trivial({ut(3, 2), {atom(UtGroup(ut(3, 2)), 1, 2, 2, 3)}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotInMStar);
  }
  try {
    certify_trivial({{Family::Gamma, 4, 2, 3}, {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedContext);
  }
}

TEST(Wedge, CertifyUT65Hundred) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto w = random_m_star(ut(6, 5), 8, seed);
    auto r = verify_certificate(certify_trivial(w));
    ASSERT_TRUE(r.ok) << "seed " << seed << ": " << r.reason;
  }
}

TEST(Wedge, CertificateSoundnessAcrossFamilies) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10'000; ++trial) {
    UtFamilySpec spec = random_context(rng);
    if (spec.family == Family::Gamma && spec.ell > spec.n - 2) spec.ell = std::max(1, spec.n - 2);
    if (spec.family == Family::Gamma && spec.n < 3) spec.family = Family::UT;
    auto w = random_m_star(spec, 1 + rng() % 4, rng());
    CertifyStats st;
    auto c = certify_trivial(w, &st);
    auto r = verify_certificate(c);
    ASSERT_TRUE(r.ok) << spec.render() << " trial " << trial << ": " << r.reason;
    ASSERT_EQ(st.steps, c.steps.size());
    ASSERT_TRUE(all_discards_commute(UtGroup(spec), c.discarded));
  }
}

TEST(Wedge, VerifierRejectsInjectedFaults) {
  UtFamilySpec spec{Family::UTsub, 6, 3, 2};
  auto c = certify_trivial(random_m_star(spec, 6, 3));
  ASSERT_TRUE(verify_certificate(c).ok);
  UtGroup g(spec);
  const WedgeAtom bad{g.t(1, 3, 1), g.t(3, 5, 1), 1};

  std::vector<std::size_t> discards, swaps, splits;
  for (std::size_t k = 0; k < c.steps.size(); ++k) {
    const auto& s = c.steps[k];
    if (s.rule == Rule::Discard) discards.push_back(k);
    if (s.rule == Rule::Swap) swaps.push_back(k);
    if (!s.params.empty()) splits.push_back(k);
  }
  ASSERT_FALSE(discards.empty());
  ASSERT_FALSE(swaps.empty());
  ASSERT_FALSE(splits.empty());

  {  // recorded discard list
    auto m = c;
    m.discarded[0] = bad;
    auto r = verify_certificate(m);
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.failed_step, discards[0]);
  }
  {  // the discard step itself
    auto m = c;
    m.steps[discards.back()].atom = bad;
    auto r = verify_certificate(m);
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.failed_step, discards.back());
  }
  {
    auto m = c;
    auto& corr = *m.steps[swaps[0]].atom;
    corr.v = g.mul(corr.v, g.t(1, 6, 1));
    auto r = verify_certificate(m);
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.failed_step, swaps[0]);
    EXPECT_EQ(r.failure_kind, ErrorKind::SideConditionFailed);
  }
  {
    auto m = c;
    auto& prm = m.steps[splits[0]].params[0];
    prm = g.mul(prm, g.t(1, 6, 1));
    auto r = verify_certificate(m);
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.failed_step, splits[0]);
    EXPECT_EQ(r.failure_kind, ErrorKind::SideConditionFailed);
  }
  {  // input outside M*
    auto m = c;
    m.input.atoms.push_back({g.t(1, 3, 1), g.t(3, 6, 1), 1});
    auto r = verify_certificate(m);
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.failure_kind, ErrorKind::NotInMStar);
  }
  {  // truncated certificate leaves a residual
    auto m = c;
    m.steps.pop_back();
    EXPECT_FALSE(verify_certificate(m).ok);
  }
}

TEST(Wedge, LastColumnIdentity) {
  for (std::uint32_t p : {2u, 3u, 5u})
    for (int n = 3; n <= 8; ++n) {
      UtGroup g(ut(n, p));
      for (int i = 1; i <= n; ++i)
        for (int k = 2; i + k <= n; ++k) {
          const int r = i + k - 1, s = i + k;
          for (int j = i + 1; j < r; ++j)
            for (std::int64_t c : {std::int64_t(1), std::int64_t(p - 1)})
              ASSERT_TRUE(g.comm(g.mul(g.t(i, j, c), g.t(r, s, 1)), g.mul(g.t(j, s, 1), g.t(i, r, c)))
                              .is_identity())
                  << n << " " << p << " " << i << j << r << s;
        }
    }
}

TEST(Wedge, SwapCorrectionOfChainAtoms) {
  // κ of the correction for [t_ij, t_jv^φ], [t_rs, t_su^φ] is [t_iv, t_ru]
  for (int n = 3; n <= 6; ++n)
    for (std::uint32_t p : {2u, 3u}) {
      UtGroup g(ut(n, p));
      for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
          for (int v = j + 1; v <= n; ++v)
            for (int r = 1; r <= n; ++r)
              for (int s = r + 1; s <= n; ++s)
                for (int u = s + 1; u <= n; ++u) {
                  std::vector<WedgeAtom> w{atom(g, i, j, j, v), atom(g, r, s, s, u)};
                  RewriteStep st;
                  st.rule = Rule::Swap;
                  st.atom = atom(g, i, v, r, u);
                  ASSERT_NO_THROW(apply_step(g, w, st));
                  ASSERT_EQ(kappa(g, {w[2]}), g.comm(g.t(i, v, 1), g.t(r, u, 1)));
                }
    }
}

TEST(Wedge, CollectDiscardCommutes) {
  for (std::uint32_t p : {2u, 3u, 5u})
    for (int n = 3; n <= 6; ++n) {
      UtGroup g(ut(n, p));
      for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
          for (int k = j + 1; k <= n; ++k)
            for (std::uint32_t a = 0; a < p; ++a)
              ASSERT_TRUE(g.comm(g.t(i, k, 1 - std::int64_t(a)), g.t(i, j, 1)).is_identity());
    }
}

TEST(Wedge, RandomMStar) {
  EXPECT_TRUE(random_m_star(ut(5, 3), 0, 1).atoms.empty());
  auto w = random_m_star(ut(5, 3), 8, 42);
  EXPECT_GE(w.atoms.size(), 8u);
  EXPECT_TRUE(kappa(w).is_identity());
  EXPECT_EQ(random_m_star(ut(5, 3), 8, 42).atoms, w.atoms);
  for (UtFamilySpec s : {UtFamilySpec{Family::UTsub, 6, 5, 2}, UtFamilySpec{Family::Gamma, 6, 2, 4},
                         UtFamilySpec{Family::UTsub, 5, 2, 3}})
    for (std::uint64_t seed = 0; seed < 20; ++seed) EXPECT_TRUE(kappa(random_m_star(s, 5, seed)).is_identity());
}

TEST(Wedge, JsonRoundTrip) {
  auto c = certify_trivial(random_m_star({Family::Gamma, 5, 3, 3}, 4, 9));
  const std::string text = certificate_to_json(c);
  auto back = certificate_from_json(text);
  EXPECT_EQ(certificate_to_json(back), text);
  EXPECT_TRUE(verify_certificate(back).ok);
  EXPECT_EQ(back.input.atoms, c.input.atoms);
  EXPECT_EQ(back.steps.size(), c.steps.size());

  // byte-reproducible for a fixed seed
  EXPECT_EQ(certificate_to_json(certify_trivial(random_m_star({Family::Gamma, 5, 3, 3}, 4, 9))), text);

  EXPECT_THROW(certificate_from_json("{\"format\": "), ParseError);
  EXPECT_THROW(certificate_from_json("{}"), ParseError);
  auto broken = text;
  broken.replace(broken.find("\"SWAP\""), 6, "\"JUMP\"");
  EXPECT_THROW(certificate_from_json(broken), ParseError);
}
