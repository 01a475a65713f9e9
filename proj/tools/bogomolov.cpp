// bogomolov: Schur and Bogomolov multipliers by homology, rewriting
// certificates for the unitriangular families.

#include <bogomolov/cli.hpp>

#include <CLI11.hpp>

#include <iostream>

using namespace bogomolov;

namespace {

std::string list(const Report& a) {
  std::string s = "[";
  for (std::size_t k = 0; k < a.size(); ++k) s += (k ? "," : "") + a[k].dump();
  return s + "]";
}

void print_text(const Report& r) {
  const std::string cmd = r["command"];
  if (r.contains("group")) std::cout << r["group"]["spec"].get<std::string>() << "  order " << r["group"]["order"] << "\n";
  if (r.contains("h1")) {
    std::cout << "H1 = " << list(r["h1"]) << "\nH2 = " << list(r["h2"]) << "\nB0 = " << list(r["b0"]) << "\n";
  } else if (r.contains("certificates")) {
    const auto& c = r["certificates"];
    std::cout << c["verified"] << "/" << c["count"] << " certificates verified, max " << c["max_steps"]
              << " steps, peak word length " << c["max_length"] << "\n";
    for (const auto& f : r["failures"])
      std::cout << "  trial " << f["trial"] << ": " << f["kind"].get<std::string>() << ": "
                << f["reason"].get<std::string>() << "\n";
  } else if (cmd == "verify") {
    if (r["verified"].get<bool>()) {
      std::cout << "certificate verified: " << r["steps_checked"] << " steps replayed, " << r["discards_checked"]
                << " discards\n";
    } else {
      const auto& f = r["failure"];
      std::cout << "certificate rejected";
      if (!f["step"].is_null()) std::cout << " at step " << f["step"];
      std::cout << ": " << f["kind"].get<std::string>() << ": " << f["reason"].get<std::string>() << "\n";
      if (f.contains("atom")) std::cout << "  atom " << f["atom"].get<std::string>() << "\n";
    }
  } else if (r.contains("suites")) {
    for (const auto& s : r["suites"]) {
      std::cout << "  " << s["name"].get<std::string>() << ": " << s["status"].get<std::string>();
      if (s["checked"].get<std::uint64_t>()) std::cout << " (" << s["passed"] << "/" << s["checked"] << ")";
      if (s.contains("note")) std::cout << "  " << s["note"].get<std::string>();
      std::cout << "\n";
    }
  }
  if (r.contains("timings_ms"))
    for (const auto& [k, v] : r["timings_ms"].items()) std::cout << "time " << k << ": " << v.get<double>() << " ms\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schur and Bogomolov multipliers of finite groups; rewriting certificates for UT, UTsub and Gamma"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  std::string group, method = "auto", certificate, emit;
  std::size_t trials = 100, length = 8, samples = 1000;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> cap_homology, cap_closure;
  std::optional<unsigned> workers;
  bool json = false, timings = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Random seed (BOGOMOLOV_SEED)");
    sub->add_option("--cap-homology", cap_homology, "Largest order for homology (BOGOMOLOV_CAP_HOMOLOGY)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--cap-closure", cap_closure, "Largest order for closure (BOGOMOLOV_CAP_CLOSURE)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--workers", workers, "Threads for batch certification (BOGOMOLOV_WORKERS)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--json", json, "Print the JSON report");
    sub->add_flag("--timings", timings, "Add wall-clock timings to the report");
  };

  auto* compute = app.add_subcommand("compute", "H1, H2 and B0 by homology");
  compute->add_option("--group", group, "Group spec, e.g. UT(3,3)")->required();
  compute->add_option("--method", method, "homology or auto")->check(CLI::IsMember({"homology", "auto"}));
  common(compute);

  auto* certify = app.add_subcommand("certify", "Certify seeded M* words for a UT, UTsub or Gamma spec");
  certify->add_option("--group", group, "Group spec, e.g. UT(6,5)")->required();
  certify->add_option("--trials", trials, "Number of words");
  certify->add_option("--length", length, "Random atoms per word");
  certify->add_option("--emit", emit, "Directory for certificate files");
  common(certify);

  auto* verify = app.add_subcommand("verify", "Replay a certificate file");
  verify->add_option("certificate", certificate, "Certificate JSON file")->required();
  common(verify);

  auto* identities = app.add_subcommand("check-identities", "Run the commutator identity suites");
  identities->add_option("--group", group, "Group spec")->required();
  identities->add_option("--samples", samples, "Samples for the randomized suites");
  common(identities);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  CommandResult res;
  try {
    Config cfg = config_from_env();
    if (seed) cfg.seed = *seed;
    if (cap_homology) cfg.homology_cap = *cap_homology;
    if (cap_closure) cfg.closure_cap = *cap_closure;
    if (workers) cfg.workers = *workers;
    cfg.timings = timings;

    if (cmd == "verify") {
      res = cmd_verify(certificate, cfg);
    } else {
      const GroupSpecAst ast = parse_group_spec(group);
      if (cmd == "compute") {
        res = cmd_compute(ast, method, cfg);
      } else if (cmd == "certify") {
        CertifyOptions opt;
        opt.trials = trials;
        opt.length = length;
        if (!emit.empty()) opt.emit_dir = emit;
        res = cmd_certify(ast, opt, cfg);
      } else {
        res = cmd_check_identities(ast, samples, cfg);
      }
    }
  } catch (const Error& e) {
    res = {error_report(cmd, e), exit_code_for(e.kind())};
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    if (json) std::cout << res.report.dump(2) << "\n";
    return res.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMath;
  }

  if (json)
    std::cout << res.report.dump(2) << "\n";
  else
    print_text(res.report);
  return res.exit_code;
}
