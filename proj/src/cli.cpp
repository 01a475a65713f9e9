#include <bogomolov/cli.hpp>
#include <bogomolov/wedgecert.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>
#include <type_traits>

namespace bogomolov {

// --- DSL ---------------------------------------------------------------------

namespace {

using Kind = GroupSpecAst::Kind;

constexpr std::string_view kNames = "UT, UTsub, Gamma, CP, Table, Cyclic or Ab";

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  GroupSpecAst spec() {
    GroupSpecAst a = node();
    ws();
    if (pos_ != s_.size()) throw ParseError(pos_, "end of spec");
    return a;
  }

 private:
  void ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  void expect(char c) {
    ws();
    if (pos_ >= s_.size() || s_[pos_] != c) throw ParseError(pos_, std::string("'") + c + "'");
    ++pos_;
  }

  std::uint64_t integer() {
    ws();
    const std::size_t start = pos_;
    std::uint64_t v = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      if (v > (UINT64_MAX - 9) / 10) throw ParseError(start, "integer below 2^64");
      v = v * 10 + std::uint64_t(s_[pos_++] - '0');
    }
    if (pos_ == start) throw ParseError(start, "integer");
    return v;
  }

  std::vector<std::uint64_t> integers(std::size_t count) {
    std::vector<std::uint64_t> v;
    for (std::size_t k = 0; k < count; ++k) {
      if (k) expect(',');
      v.push_back(integer());
    }
    return v;
  }

  GroupSpecAst node() {
    ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    const std::string_view name = s_.substr(start, pos_ - start);
    GroupSpecAst a;
    if (name == "UT")
      a.kind = Kind::UT;
    else if (name == "UTsub")
      a.kind = Kind::UTsub;
    else if (name == "Gamma")
      a.kind = Kind::Gamma;
    else if (name == "CP")
      a.kind = Kind::CP;
    else if (name == "Table")
      a.kind = Kind::Table;
    else if (name == "Cyclic")
      a.kind = Kind::Cyclic;
    else if (name == "Ab")
      a.kind = Kind::Ab;
    else
      throw ParseError(start, std::string(kNames));
    expect('(');
    switch (a.kind) {
      case Kind::UT:
        a.args = integers(2);
        break;
      case Kind::UTsub:
      case Kind::Gamma:
        a.args = integers(3);
        break;
      case Kind::Cyclic:
        a.args = integers(1);
        break;
      case Kind::Ab:
        a.args = integers(1);
        for (ws(); pos_ < s_.size() && s_[pos_] == ','; ws()) {
          ++pos_;
          a.args.push_back(integer());
        }
        break;
      case Kind::CP:
        a.children.push_back(node());
        expect(',');
        a.children.push_back(node());
        break;
      case Kind::Table: {
        ws();
        const std::size_t from = pos_;
        while (pos_ < s_.size() && s_[pos_] != ')') ++pos_;
        std::size_t to = pos_;
        while (to > from && std::isspace(static_cast<unsigned char>(s_[to - 1]))) --to;
        if (to == from) throw ParseError(from, "file path");
        a.path = std::string(s_.substr(from, to - from));
        break;
      }
    }
    expect(')');
    return a;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

[[noreturn]] void invalid(const GroupSpecAst& a, const std::string& why) {
  throw Error(ErrorKind::ValidationError, a.render() + ": " + why);
}

void validate(const GroupSpecAst& a) {
  switch (a.kind) {
    case Kind::UT:
    case Kind::UTsub:
    case Kind::Gamma: {
      const auto n = a.args[0], p = a.args[1];
      if (n < 2 || n > std::uint64_t(kMaxDegree))
        invalid(a, "degree must lie in [2, " + std::to_string(kMaxDegree) + "]");
      if (p > kMaxPrime || !is_prime(p)) invalid(a, std::to_string(p) + " is not a prime below 2^16");
      if (a.kind == Kind::UTsub && a.args[2] < 1) invalid(a, "ℓ must be at least 1");
      if (a.kind == Kind::Gamma && (a.args[2] < 1 || a.args[2] + 2 > n))
        invalid(a, "Gamma needs 1 <= ℓ <= n-2");
      return;
    }
    case Kind::CP: {
      for (const auto& c : a.children) {
        validate(c);
        if (c.kind != Kind::UT) invalid(a, "central products take two UT specs");
      }
      if (a.children[0].args[1] != a.children[1].args[1]) invalid(a, "both factors need the same p");
      if (a.children[0].args[0] > a.children[1].args[0]) invalid(a, "the first factor must not be larger");
      return;
    }
    case Kind::Cyclic:
    case Kind::Ab:
      for (auto d : a.args)
        if (d < 1) invalid(a, "orders must be positive");
      return;
    case Kind::Table:
      return;
  }
}

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a && b > UINT64_MAX / a) return UINT64_MAX;
  return a * b;
}

std::uint64_t sat_pow(std::uint64_t p, int e) {
  std::uint64_t r = 1;
  while (e-- > 0) r = sat_mul(r, p);
  return r;
}

mpz_class exact_order(const GroupSpecAst& a) {
  mpz_class o = 1;
  switch (a.kind) {
    case Kind::UT:
    case Kind::UTsub:
    case Kind::Gamma: {
      auto s = *a.family();
      mpz_ui_pow_ui(o.get_mpz_t(), s.p, s.dimension());
      return o;
    }
    case Kind::CP:
      return exact_order(a.children[0]) * exact_order(a.children[1]) / mpz_class(a.children[0].args[1]);
    case Kind::Cyclic:
    case Kind::Ab:
      for (auto d : a.args) o *= mpz_class(std::to_string(d));
      return o;
    case Kind::Table:
      return 0;
  }
  return o;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ValidationError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Elem index_of(const std::vector<UtMatrix>& elements, const UtMatrix& m) {
  auto it = std::find(elements.begin(), elements.end(), m);
  if (it == elements.end()) throw Error(ErrorKind::InternalError, "matrix missing from its group: " + m.to_string());
  return Elem(it - elements.begin());
}

// CP(UT(k,p), UT(n,p)) with K1 = <t_1k(1)>, K2 = <s_1n(1)> and θ the
// composite embedding UT_k → UT_n restricted to K1.
GroupTable build_cp(const GroupSpecAst& a, const Config& cfg) {
  const int k = int(a.children[0].args[0]), n = int(a.children[1].args[0]);
  const auto p = std::uint32_t(a.children[0].args[1]);
  const std::uint64_t direct = sat_mul(group_order(a.children[0]), group_order(a.children[1]));
  if (direct > kDefaultTableCap)
    throw Error(ErrorKind::CapExceeded, a.render() + " goes through a direct product of order " +
                                            std::to_string(direct) + ", above the table cap " +
                                            std::to_string(kDefaultTableCap));
  auto g1 = build_family(*a.children[0].family(), true, cfg.closure_cap);
  auto g2 = build_family(*a.children[1].family(), true, cfg.closure_cap);
  Subset k1, k2;
  std::vector<std::pair<Elem, Elem>> theta;
  for (std::uint32_t alpha = 0; alpha < p; ++alpha) {
    const UtMatrix x = tv(k, p, 1, k, alpha);
    const Elem xi = index_of(g1.elements, x);
    const Elem yi = index_of(g2.elements, theta_chain(x, n));
    k1.push_back(xi);
    k2.push_back(yi);
    theta.emplace_back(xi, yi);
  }
  std::sort(k1.begin(), k1.end());
  std::sort(k2.begin(), k2.end());
  return central_product(*g1.table, k1, *g2.table, k2, theta);
}

}  // namespace

std::string GroupSpecAst::render() const {
  auto join = [](const std::vector<std::uint64_t>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
    return s;
  };
  switch (kind) {
    case Kind::UT:
      return "UT(" + join(args) + ")";
    case Kind::UTsub:
      return "UTsub(" + join(args) + ")";
    case Kind::Gamma:
      return "Gamma(" + join(args) + ")";
    case Kind::CP:
      return "CP(" + children[0].render() + "," + children[1].render() + ")";
    case Kind::Table:
      return "Table(" + path + ")";
    case Kind::Cyclic:
      return "Cyclic(" + join(args) + ")";
    case Kind::Ab:
      return "Ab(" + join(args) + ")";
  }
  return {};
}

std::optional<UtFamilySpec> GroupSpecAst::family() const {
  UtFamilySpec s;
  switch (kind) {
    case Kind::UT:
      s.family = Family::UT;
      break;
    case Kind::UTsub:
      s.family = Family::UTsub;
      break;
    case Kind::Gamma:
      s.family = Family::Gamma;
      break;
    default:
      return std::nullopt;
  }
  s.n = int(args[0]);
  s.p = std::uint32_t(args[1]);
  if (kind != Kind::UT) s.ell = int(args[2]);
  return s;
}

GroupSpecAst parse_group_spec(std::string_view text) {
  GroupSpecAst a = Parser(text).spec();
  validate(a);
  return a;
}

// --- configuration -----------------------------------------------------------

Config config_from_env(Config c, const char* (*getenv)(const char*)) {
  auto get = [&](const char* name) -> const char* {
    return getenv ? getenv(name) : std::getenv(name);
  };
  auto positive = [&](const char* name, auto& field) {
    const char* v = get(name);
    if (!v) return;
    char* end = nullptr;
    errno = 0;
    const unsigned long long x = std::strtoull(v, &end, 10);
    if (errno || end == v || *end || x == 0)
      throw Error(ErrorKind::ValidationError, std::string(name) + " must be a positive integer");
    field = static_cast<std::remove_reference_t<decltype(field)>>(x);
  };
  positive("BOGOMOLOV_CAP_CLOSURE", c.closure_cap);
  positive("BOGOMOLOV_CAP_HOMOLOGY", c.homology_cap);
  positive("BOGOMOLOV_WORKERS", c.workers);
  if (const char* v = get("BOGOMOLOV_SEED")) {
    char* end = nullptr;
    errno = 0;
    c.seed = std::strtoull(v, &end, 10);
    if (errno || end == v || *end) throw Error(ErrorKind::ValidationError, "BOGOMOLOV_SEED must be an integer");
  }
  if (const char* v = get("BOGOMOLOV_SNF")) {
    const std::string s = v;
    if (s == "auto")
      c.snf = SnfStrategy::Auto;
    else if (s == "sparse")
      c.snf = SnfStrategy::Sparse;
    else if (s == "dense")
      c.snf = SnfStrategy::Dense;
    else
      throw Error(ErrorKind::ValidationError, "BOGOMOLOV_SNF must be auto, sparse or dense");
  }
  return c;
}

// --- groups ------------------------------------------------------------------

std::uint64_t group_order(const GroupSpecAst& a) {
  switch (a.kind) {
    case Kind::UT:
    case Kind::UTsub:
    case Kind::Gamma: {
      auto s = *a.family();
      return sat_pow(s.p, s.dimension());
    }
    case Kind::CP:
      return sat_mul(group_order(a.children[0]), group_order(a.children[1])) / a.children[0].args[1];
    case Kind::Cyclic:
      return a.args[0];
    case Kind::Ab: {
      std::uint64_t o = 1;
      for (auto d : a.args) o = sat_mul(o, d);
      return o;
    }
    case Kind::Table:
      return 0;
  }
  return 0;
}

GroupTable build_group(const GroupSpecAst& a, const Config& cfg) {
  if (a.kind != Kind::Table && group_order(a) > cfg.closure_cap)
    throw Error(ErrorKind::CapExceeded, a.render() + " has order " + exact_order(a).get_str() +
                                            ", above the closure cap " + std::to_string(cfg.closure_cap));
  switch (a.kind) {
    case Kind::UT:
    case Kind::UTsub:
    case Kind::Gamma:
      return *build_family(*a.family(), true, cfg.closure_cap).table;
    case Kind::CP:
      return build_cp(a, cfg);
    case Kind::Table:
      return ingest_table(read_file(a.path));
    case Kind::Cyclic:
      return cyclic_group(a.args[0]);
    case Kind::Ab:
      return abelian_group(a.args);
  }
  throw Error(ErrorKind::InternalError, "unknown spec kind");
}

// --- reports -----------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Report header(std::string_view command) {
  Report r;
  r["tool"] = "bogomolov";
  r["version"] = std::string(kToolVersion);
  r["schema"] = kReportSchema;
  r["command"] = std::string(command);
  return r;
}

// Orders past 2^64 are reported as decimal strings.
Report group_json(const GroupSpecAst& a, std::uint64_t table_order = 0) {
  Report g;
  g["spec"] = a.render();
  const mpz_class o = table_order ? mpz_class(std::to_string(table_order)) : exact_order(a);
  if (o.fits_ulong_p())
    g["order"] = std::uint64_t(o.get_ui());
  else
    g["order"] = o.get_str();
  return g;
}

Report invariants_json(const AbelianInvariants& inv) {
  Report a = Report::array();
  for (auto d : inv.factors) a.push_back(d);
  return a;
}

std::string atom_text(const WedgeAtom& a) {
  return "[" + a.u.to_string() + " ; " + a.v.to_string() + " ; " + (a.eps > 0 ? "+1" : "-1") + "]";
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::CapExceeded:
      return kExitCap;
    case ErrorKind::ParseError:
    case ErrorKind::ValidationError:
    case ErrorKind::UnsupportedContext:
    case ErrorKind::IndexOutOfRange:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::NotAGroup:
      return kExitUsage;
    default:
      return kExitMath;
  }
}

Report error_report(std::string_view command, const Error& e) {
  Report r = header(command);
  Report err;
  err["kind"] = std::string(to_string(e.kind()));
  err["message"] = e.what();
  r["error"] = err;
  return r;
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(index),
                    std::uint32_t(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (std::uint64_t(out[0]) << 32) | out[1];
}

// --- compute -----------------------------------------------------------------

CommandResult cmd_compute(const GroupSpecAst& a, std::string_view method, const Config& cfg) {
  if (method != "homology" && method != "auto")
    throw Error(ErrorKind::ValidationError, "method must be homology or auto");
  const auto t0 = Clock::now();
  std::optional<GroupTable> g;
  std::uint64_t order = group_order(a);
  if (a.kind == Kind::Table) {
    g = build_group(a, cfg);
    order = g->order();
  }
  if (order > cfg.homology_cap) {
    if (method == "auto" && a.family()) {
      check_certifiable(*a.family());
      CommandResult c = cmd_certify(a, CertifyOptions{}, cfg);
      c.report["command"] = "compute";
      return c;
    }
    std::string msg = a.render() + " has order " + (a.kind == Kind::Table ? std::to_string(order) : exact_order(a).get_str()) + ", above the homology cap " +
                      std::to_string(cfg.homology_cap);
    if (a.family()) msg += "; use `certify` for unitriangular family members";
    throw Error(ErrorKind::CapExceeded, msg);
  }
  if (!g) g = build_group(a, cfg);
  const double t_build = ms_since(t0);
  const auto t1 = Clock::now();
  const auto h1 = homology_h1(*g, cfg.homology_cap);
  const auto b0 = b0_homological(*g, cfg.homology_cap, cfg.snf);
  const double t_hom = ms_since(t1);

  Report r = header("compute");
  r["group"] = group_json(a, a.kind == Kind::Table ? order : 0);
  r["method"] = "homology";
  r["h1"] = invariants_json(h1.invariants);
  r["h2"] = invariants_json(b0.h2);
  r["b0"] = invariants_json(b0.invariants);
  r["seed"] = cfg.seed;
  if (cfg.timings) r["timings_ms"] = {{"build", t_build}, {"homology", t_hom}};
  return {r, kExitOk};
}

// --- certify -----------------------------------------------------------------

namespace {

struct TrialOutcome {
  bool ok = false;
  std::uint64_t seed = 0;
  std::size_t atoms = 0;
  CertifyStats stats;
  std::optional<std::size_t> failed_step;
  std::string kind;
  std::string reason;
  std::string json;
};

TrialOutcome run_trial(const UtFamilySpec& spec, std::size_t length, std::uint64_t seed, bool keep_json) {
  TrialOutcome t;
  t.seed = seed;
  try {
    WedgeWord w = random_m_star(spec, length, seed);
    t.atoms = w.atoms.size();
    Certificate c = certify_trivial(w, &t.stats);
    VerifyReport v = verify_certificate(c);
    t.ok = v.ok;
    if (!v.ok) {
      t.failed_step = v.failed_step;
      t.kind = v.failure_kind ? std::string(to_string(*v.failure_kind)) : "";
      t.reason = v.reason;
    }
    if (keep_json) t.json = certificate_to_json(c);
  } catch (const Error& e) {
    t.ok = false;
    t.kind = std::string(to_string(e.kind()));
    t.reason = e.what();
  }
  return t;
}

}  // namespace

CommandResult cmd_certify(const GroupSpecAst& a, const CertifyOptions& opt, const Config& cfg) {
  const auto spec = a.family();
  if (!spec)
    throw Error(ErrorKind::UnsupportedContext,
                a.render() + " is not a UT, UTsub or Gamma spec; use `compute` for other groups");
  check_certifiable(*spec);
  const auto t0 = Clock::now();

  std::vector<TrialOutcome> out(opt.trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < opt.trials;)
      out[k] = run_trial(*spec, opt.length, trial_seed(cfg.seed, k), opt.emit_dir.has_value());
  };
  const unsigned n_workers = std::max(1u, std::min<unsigned>(cfg.workers, unsigned(std::max<std::size_t>(1, opt.trials))));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < n_workers; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  const double t_cert = ms_since(t0);

  if (opt.emit_dir) {
    std::filesystem::create_directories(*opt.emit_dir);
    for (std::size_t k = 0; k < out.size(); ++k) {
      if (out[k].json.empty()) continue;
      char name[32];
      std::snprintf(name, sizeof name, "cert_%04zu.json", k);
      std::ofstream f(std::filesystem::path(*opt.emit_dir) / name, std::ios::binary);
      f << out[k].json;
      if (!f) throw Error(ErrorKind::ValidationError, "cannot write " + (std::filesystem::path(*opt.emit_dir) / name).string());
    }
  }

  std::size_t verified = 0, total_steps = 0, max_steps = 0, max_length = 0, discarded = 0;
  Report failures = Report::array();
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto& t = out[k];
    if (t.ok) {
      ++verified;
    } else {
      Report f;
      f["trial"] = k;
      f["seed"] = t.seed;
      f["step"] = t.failed_step ? Report(*t.failed_step) : Report(nullptr);
      f["kind"] = t.kind;
      f["reason"] = t.reason;
      failures.push_back(f);
    }
    total_steps += t.stats.steps;
    max_steps = std::max(max_steps, t.stats.steps);
    max_length = std::max(max_length, t.stats.peak_length);
    discarded += t.stats.discarded;
  }

  Report r = header("certify");
  r["group"] = group_json(a);
  r["method"] = "certificate";
  r["seed"] = cfg.seed;
  r["trials"] = opt.trials;
  r["length"] = opt.length;
  Report cs;
  cs["count"] = opt.trials;
  cs["verified"] = verified;
  cs["failed"] = opt.trials - verified;
  cs["total_steps"] = total_steps;
  cs["max_steps"] = max_steps;
  cs["max_length"] = max_length;
  cs["discarded"] = discarded;
  r["certificates"] = cs;
  r["failures"] = failures;
  if (opt.emit_dir) r["emit_dir"] = *opt.emit_dir;
  if (cfg.timings) r["timings_ms"] = {{"certify", t_cert}};
  return {r, verified == opt.trials ? kExitOk : kExitMath};
}

// --- verify ------------------------------------------------------------------

CommandResult cmd_verify(const std::string& path, const Config& cfg) {
  const auto t0 = Clock::now();
  Certificate c = certificate_from_json(read_file(path));
  VerifyReport v = verify_certificate(c);
  Report r = header("verify");
  r["certificate"] = path;
  r["context"] = c.input.context.render();
  r["verified"] = v.ok;
  r["steps"] = c.steps.size();
  r["steps_checked"] = v.steps_checked;
  r["discards_checked"] = v.discards_checked;
  if (!v.ok) {
    Report f;
    f["step"] = v.failed_step ? Report(*v.failed_step) : Report(nullptr);
    f["kind"] = v.failure_kind ? std::string(to_string(*v.failure_kind)) : "";
    f["reason"] = v.reason;
    if (v.failed_step) {
      const auto& s = c.steps[*v.failed_step];
      f["rule"] = std::string(to_string(s.rule));
      if (s.atom) f["atom"] = atom_text(*s.atom);
    }
    r["failure"] = f;
  }
  if (cfg.timings) r["timings_ms"] = {{"verify", ms_since(t0)}};
  return {r, v.ok ? kExitOk : kExitMath};
}

// --- identities --------------------------------------------------------------

namespace {

struct Suite {
  explicit Suite(std::string n) : name(std::move(n)) {}

  std::string name;
  std::string status = "pass";
  std::uint64_t checked = 0;
  std::uint64_t passed = 0;
  std::string note;

  void check(bool ok) {
    ++checked;
    if (ok) ++passed;
  }
  void close() {
    if (status == "pass" && passed != checked) status = "fail";
  }
  Report json() const {
    Report r;
    r["name"] = name;
    r["status"] = status;
    r["checked"] = checked;
    r["passed"] = passed;
    if (!note.empty()) r["note"] = note;
    return r;
  }
};

// (n, p) of the ambient UT for the matrix-level suites.
std::optional<std::pair<int, std::uint32_t>> ambient(const GroupSpecAst& a) {
  if (auto s = a.family()) return std::pair{s->n, s->p};
  if (a.kind == Kind::CP) return std::pair{int(a.children[1].args[0]), std::uint32_t(a.children[1].args[1])};
  return std::nullopt;
}

Suite closed_form_suite(int n, std::uint32_t p, std::size_t samples, std::uint64_t budget, std::mt19937_64& rng) {
  Suite s{"commutator-closed-form"};
  std::vector<std::pair<int, int>> pos;
  for (int i = 1; i < n; ++i)
    for (int j = i + 1; j <= n; ++j) pos.emplace_back(i, j);
  const std::uint64_t full = sat_mul(sat_mul(pos.size(), pos.size()), sat_mul(p - 1, p - 1));
  const bool exhaustive = full <= budget;
  if (!exhaustive) s.note = "sampled " + std::to_string(samples) + " scalar pairs per index pair";
  auto one = [&](std::pair<int, int> x, std::pair<int, int> y, std::uint32_t al, std::uint32_t be) {
    s.check(transvection_commutator(x.first, x.second, al, y.first, y.second, be, n, p) ==
            ut_comm(tv(n, p, x.first, x.second, al), tv(n, p, y.first, y.second, be)));
  };
  for (auto x : pos)
    for (auto y : pos) {
      if (exhaustive) {
        for (std::uint32_t al = 1; al < p; ++al)
          for (std::uint32_t be = 1; be < p; ++be) one(x, y, al, be);
      } else {
        for (std::size_t k = 0; k < samples; ++k)
          one(x, y, 1 + std::uint32_t(rng() % (p - 1)), 1 + std::uint32_t(rng() % (p - 1)));
      }
    }
  s.close();
  return s;
}

Suite last_column_suite(int n, std::uint32_t p) {
  Suite s{"last-column-identity"};
  UtGroup g(UtFamilySpec{Family::UT, n, p, 1});
  // [t_ij(c) t_rs, t_js t_ir(c)] = 1 for i < j < r < s
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j)
      for (int r = j + 1; r <= n; ++r)
        for (int t = r + 1; t <= n; ++t)
          for (std::uint32_t c = 1; c < p; ++c)
            s.check(g.comm(g.mul(g.t(i, j, c), g.t(r, t, 1)), g.mul(g.t(j, t, 1), g.t(i, r, c))).is_identity());
  s.close();
  return s;
}

void level_suites(int n, std::uint32_t p, const Config& cfg, std::vector<Suite>& out, bool& capped) {
  Suite lcs{"lower-central-series"}, levels{"level-commutators"};
  const std::uint64_t order = sat_pow(p, n * (n - 1) / 2);
  if (order > cfg.closure_cap) {
    for (Suite* s : {&lcs, &levels}) {
      s->status = "skipped";
      s->note = "order " + (order == UINT64_MAX ? std::string("above 2^64") : std::to_string(order)) + " exceeds the closure cap " + std::to_string(cfg.closure_cap);
    }
    capped = true;
  } else {
    // γ_ℓ = UT^ℓ for every ℓ, the last term being γ_n = {1}
    auto series = lower_central_series(n, p, cfg.closure_cap);
    for (int ell = 1; ell <= n; ++ell)
      lcs.check(ell <= int(series.size()) && series[ell - 1] == enumerate_ut_level(n, p, ell, cfg.closure_cap));
    for (int r = 1; r < n; ++r)
      for (int s = 1; r + s < n; ++s)
        levels.check(commutator_level_subgroup(n, p, r, s, cfg.closure_cap) ==
                  enumerate_ut_level(n, p, r + s, cfg.closure_cap));
    lcs.close();
    levels.close();
  }
  out.push_back(lcs);
  out.push_back(levels);
}

// [x, yz] = [x, z][x, y][x, y, z] and [xy, z] = [x, z][x, z, y][y, z]
template <class M, class C>
void expansion_triple(Suite& s, const M& mul, const C& comm, const auto& x, const auto& y, const auto& z) {
  s.check(comm(x, mul(y, z)) == mul(mul(comm(x, z), comm(x, y)), comm(comm(x, y), z)));
  s.check(comm(mul(x, y), z) == mul(mul(comm(x, z), comm(comm(x, z), y)), comm(y, z)));
}

Suite expansion_suite(const GroupSpecAst& a, std::size_t samples, const Config& cfg, std::mt19937_64& rng, bool& capped) {
  Suite s{"commutator-expansion"};
  if (auto spec = a.family()) {
    UtGroup g(*spec);
    auto mul = [&](const UtMatrix& x, const UtMatrix& y) { return g.mul(x, y); };
    auto comm = [&](const UtMatrix& x, const UtMatrix& y) { return g.comm(x, y); };
    for (std::size_t k = 0; k < samples; ++k) {
      UtMatrix x = g.random_element(rng), y = g.random_element(rng), z = g.random_element(rng);
      expansion_triple(s, mul, comm, x, y, z);
    }
  } else {
    std::optional<GroupTable> g;
    try {
      g = build_group(a, cfg);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::CapExceeded) throw;
      s.status = "skipped";
      s.note = e.what();
      capped = true;
      return s;
    }
    auto mul = [&](Elem x, Elem y) { return g->mul(x, y); };
    auto comm = [&](Elem x, Elem y) { return g->commutator(x, y); };
    const std::size_t n = g->order();
    if (n <= 32) {
      s.note = "exhaustive";
      for (Elem x = 0; x < n; ++x)
        for (Elem y = 0; y < n; ++y)
          for (Elem z = 0; z < n; ++z) expansion_triple(s, mul, comm, x, y, z);
    } else {
      for (std::size_t k = 0; k < samples; ++k)
        expansion_triple(s, mul, comm, Elem(rng() % n), Elem(rng() % n), Elem(rng() % n));
    }
  }
  s.close();
  return s;
}

}  // namespace

CommandResult cmd_check_identities(const GroupSpecAst& a, std::size_t samples, const Config& cfg) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(cfg.seed);
  std::vector<Suite> suites;
  bool capped = false;
  if (auto amb = ambient(a)) {
    auto [n, p] = *amb;
    suites.push_back(closed_form_suite(n, p, std::max<std::size_t>(1, samples / 100), cfg.closure_cap, rng));
    level_suites(n, p, cfg, suites, capped);
    suites.push_back(last_column_suite(n, p));
  } else {
    for (const char* name : {"commutator-closed-form", "lower-central-series", "level-commutators",
                             "last-column-identity"}) {
      Suite s{name};
      s.status = "not-applicable";
      suites.push_back(s);
    }
  }
  suites.push_back(expansion_suite(a, samples, cfg, rng, capped));

  bool failed = false;
  Report list = Report::array();
  for (const auto& s : suites) {
    failed |= s.status == "fail";
    list.push_back(s.json());
  }
  Report r = header("check-identities");
  r["group"] = group_json(a, a.kind == Kind::Table ? build_group(a, cfg).order() : 0);
  r["seed"] = cfg.seed;
  r["samples"] = samples;
  r["suites"] = list;
  r["passed"] = !failed;
  if (cfg.timings) r["timings_ms"] = {{"identities", ms_since(t0)}};
  return {r, failed ? kExitMath : capped ? kExitCap : kExitOk};
}

}  // namespace bogomolov
