#pragma once

// Group-spec DSL, configuration and the four commands behind the
// `bogomolov` tool. Commands return a JSON report plus the exit code.
//
//   spec := UT(n,p) | UTsub(n,p,ℓ) | Gamma(n,p,ℓ) | CP(spec,spec)
//         | Table(path) | Cyclic(m) | Ab(d1,...,dk)

#include <bogomolov/groupcore.hpp>
#include <bogomolov/homology.hpp>
#include <bogomolov/unitriangular.hpp>

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bogomolov {

inline constexpr std::string_view kToolVersion = "1.0.0";
inline constexpr int kReportSchema = 1;

struct GroupSpecAst {
  enum class Kind { UT, UTsub, Gamma, CP, Table, Cyclic, Ab };

  Kind kind = Kind::UT;
  std::vector<std::uint64_t> args;  // (n, p[, ℓ]), (m) or (d1, ..., dk)
  std::string path;                 // Table
  std::vector<GroupSpecAst> children;  // CP

  std::string render() const;
  // UT, UTsub and Gamma nodes as a family spec.
  std::optional<UtFamilySpec> family() const;

  friend bool operator==(const GroupSpecAst&, const GroupSpecAst&) = default;
};

// Whitespace-insensitive. ParseError carries the offset; ValidationError for
// well-formed specs with bad parameters.
GroupSpecAst parse_group_spec(std::string_view text);

struct Config {
  std::size_t closure_cap = kDefaultClosureCap;
  std::size_t homology_cap = kDefaultHomologyCap;
  SnfStrategy snf = SnfStrategy::Auto;
  unsigned workers = 1;
  std::uint64_t seed = 0;
  bool timings = false;
};

// Overrides from BOGOMOLOV_CAP_CLOSURE, BOGOMOLOV_CAP_HOMOLOGY, BOGOMOLOV_SNF
// (auto|sparse|dense), BOGOMOLOV_WORKERS, BOGOMOLOV_SEED. `getenv` is
// injectable for tests.
Config config_from_env(Config base = {}, const char* (*getenv)(const char*) = nullptr);

// Order without building the group where possible (saturates).
std::uint64_t group_order(const GroupSpecAst& ast);
GroupTable build_group(const GroupSpecAst& ast, const Config& cfg);

using Report = nlohmann::ordered_json;

struct CommandResult {
  Report report;
  int exit_code = 0;
};

enum ExitCode { kExitOk = 0, kExitMath = 1, kExitUsage = 2, kExitCap = 3 };
int exit_code_for(ErrorKind kind);
// {"error": {"kind", "message"}} for a failed command.
Report error_report(std::string_view command, const Error& e);

CommandResult cmd_compute(const GroupSpecAst& ast, std::string_view method, const Config& cfg);

struct CertifyOptions {
  std::size_t trials = 100;
  std::size_t length = 8;
  std::optional<std::string> emit_dir;  // one certificate file per trial
};
CommandResult cmd_certify(const GroupSpecAst& ast, const CertifyOptions& opt, const Config& cfg);

CommandResult cmd_verify(const std::string& path, const Config& cfg);

CommandResult cmd_check_identities(const GroupSpecAst& ast, std::size_t samples, const Config& cfg);

// Seed of trial `index` in a batch.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace bogomolov
