#include <bogomolov/cli.hpp>
#include <bogomolov/wedgecert.hpp>

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <unistd.h>

using namespace bogomolov;
using Kind = GroupSpecAst::Kind;

namespace {

const std::string kData = BOGOMOLOV_TEST_DATA;

ErrorKind parse_kind(std::string_view text) {
  try {
    parse_group_spec(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InternalError;
}

std::map<std::string, std::string>* fake_env = nullptr;
const char* fake_getenv(const char* name) {
  auto it = fake_env->find(name);
  return it == fake_env->end() ? nullptr : it->second.c_str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("bogomolov_test_cli_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::vector<std::uint64_t> inv(const Report& r, const char* key) { return r[key].get<std::vector<std::uint64_t>>(); }

}  // namespace

TEST(Dsl, ParseExamples) {
  auto a = parse_group_spec("UT(4,3)");
  EXPECT_EQ(a.kind, Kind::UT);
  EXPECT_EQ(a.args, (std::vector<std::uint64_t>{4, 3}));
  EXPECT_EQ(a.family()->n, 4);

  auto cp = parse_group_spec("CP(UT(3,2),UT(3,2))");
  EXPECT_EQ(cp.kind, Kind::CP);
  ASSERT_EQ(cp.children.size(), 2u);
  EXPECT_EQ(cp.children[1].kind, Kind::UT);
  EXPECT_FALSE(cp.family());

  EXPECT_EQ(parse_kind("UT(4,4)"), ErrorKind::ValidationError);
  EXPECT_EQ(parse_kind("Gamma(4,2,3)"), ErrorKind::ValidationError);
  EXPECT_EQ(parse_group_spec("Gamma(5,3,3)").family()->family, Family::Gamma);
  EXPECT_EQ(parse_kind("UTsub(5,3,0)"), ErrorKind::ValidationError);
  EXPECT_EQ(parse_kind("CP(UT(3,2),UT(3,3))"), ErrorKind::ValidationError);
  EXPECT_EQ(parse_kind("CP(UT(3,2),Cyclic(2))"), ErrorKind::ValidationError);
  EXPECT_EQ(parse_kind("UT(13,2)"), ErrorKind::ValidationError);
  EXPECT_EQ(parse_kind("Cyclic(0)"), ErrorKind::ValidationError);
}

TEST(Dsl, ParseErrorPositions) {
  auto at = [](std::string_view text) -> std::size_t {
    try {
      parse_group_spec(text);
    } catch (const ParseError& e) {
      return e.position();
    }
    return std::size_t(-1);
  };
  EXPECT_EQ(at("UT(4 3)"), 5u);
  EXPECT_EQ(at("Foo(1)"), 0u);
  EXPECT_EQ(at("UT(4,3"), 6u);
  EXPECT_EQ(at("UT(4,3) x"), 8u);
  EXPECT_EQ(at("Ab()"), 3u);
  EXPECT_EQ(at("Table( )"), 7u);
  EXPECT_EQ(at(""), 0u);
}

TEST(Dsl, WhitespaceAndRoundTrip) {
  EXPECT_EQ(parse_group_spec("  UTsub ( 6 , 2 ,2 ) "), parse_group_spec("UTsub(6,2,2)"));
  for (std::string s : {"UT(4,3)", "UTsub(6,2,2)", "Gamma(6,3,4)", "CP(UT(3,2),UT(4,2))", "Table(dir/x.tbl)",
                        "Cyclic(6)", "Ab(2,2,4)"}) {
    EXPECT_EQ(parse_group_spec(s).render(), s);
    EXPECT_EQ(parse_group_spec(parse_group_spec(s).render()), parse_group_spec(s));
  }
  EXPECT_EQ(parse_group_spec("Table(  my file.tbl  )").path, "my file.tbl");
}

TEST(Config, Defaults) {
  Config c;
  EXPECT_EQ(c.closure_cap, 1'000'000u);
  EXPECT_EQ(c.homology_cap, 64u);
  EXPECT_EQ(c.snf, SnfStrategy::Auto);
  EXPECT_EQ(c.workers, 1u);
  EXPECT_EQ(c.seed, 0u);
}

TEST(Config, Environment) {
  std::map<std::string, std::string> env{{"BOGOMOLOV_CAP_HOMOLOGY", "128"},
                                         {"BOGOMOLOV_WORKERS", "3"},
                                         {"BOGOMOLOV_SEED", "17"},
                                         {"BOGOMOLOV_SNF", "dense"}};
  fake_env = &env;
  Config c = config_from_env({}, fake_getenv);
  EXPECT_EQ(c.homology_cap, 128u);
  EXPECT_EQ(c.workers, 3u);
  EXPECT_EQ(c.seed, 17u);
  EXPECT_EQ(c.snf, SnfStrategy::Dense);
  EXPECT_EQ(c.closure_cap, kDefaultClosureCap);
  env["BOGOMOLOV_WORKERS"] = "0";
  EXPECT_THROW(config_from_env({}, fake_getenv), Error);
  env["BOGOMOLOV_WORKERS"] = "2x";
  EXPECT_THROW(config_from_env({}, fake_getenv), Error);
  env.erase("BOGOMOLOV_WORKERS");
  env["BOGOMOLOV_SNF"] = "fast";
  EXPECT_THROW(config_from_env({}, fake_getenv), Error);
}

TEST(Groups, OrdersAndBuild) {
  Config cfg;
  EXPECT_EQ(group_order(parse_group_spec("UT(4,2)")), 64u);
  EXPECT_EQ(group_order(parse_group_spec("UTsub(4,2,2)")), 8u);
  EXPECT_EQ(group_order(parse_group_spec("Gamma(5,3,2)")), 81u);
  EXPECT_EQ(group_order(parse_group_spec("CP(UT(3,2),UT(3,2))")), 32u);
  EXPECT_EQ(group_order(parse_group_spec("Ab(2,3,4)")), 24u);
  EXPECT_EQ(build_group(parse_group_spec("CP(UT(3,2),UT(3,2))"), cfg).order(), 32u);
  EXPECT_EQ(build_group(parse_group_spec("CP(UT(2,3),UT(3,3))"), cfg).order(), 27u);
  EXPECT_EQ(build_group(parse_group_spec("CP(UT(3,2),UT(4,2))"), cfg).order(), 256u);
  EXPECT_THROW(build_group(parse_group_spec("CP(UT(3,3),UT(4,3))"), cfg), Error);
  EXPECT_EQ(build_group(parse_group_spec("Ab(2,2)"), cfg).order(), 4u);
  cfg.closure_cap = 100;
  try {
    build_group(parse_group_spec("UT(4,3)"), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CapExceeded);
  }
}

TEST(Compute, Examples) {
  Config cfg;
  auto r = cmd_compute(parse_group_spec("UT(3,3)"), "homology", cfg);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_TRUE(inv(r.report, "b0").empty());
  EXPECT_EQ(inv(r.report, "h2"), (std::vector<std::uint64_t>{3, 3}));
  EXPECT_EQ(r.report["group"]["order"], 27);

  r = cmd_compute(parse_group_spec("Ab(2,2)"), "auto", cfg);
  EXPECT_EQ(inv(r.report, "h2"), std::vector<std::uint64_t>{2});
  EXPECT_TRUE(inv(r.report, "b0").empty());
  EXPECT_NE(r.report.dump().find("\"b0\":[]"), std::string::npos);

  r = cmd_compute(parse_group_spec("Table(" + kData + "/positive64.tbl)"), "homology", cfg);
  EXPECT_EQ(inv(r.report, "b0"), std::vector<std::uint64_t>{2});
  EXPECT_EQ(r.report["group"]["order"], 64);
}

TEST(Compute, CapsAndAuto) {
  Config cfg;
  try {
    cmd_compute(parse_group_spec("UT(4,3)"), "homology", cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CapExceeded);
    EXPECT_EQ(exit_code_for(e.kind()), kExitCap);
    EXPECT_NE(std::string(e.what()).find("certify"), std::string::npos);
  }
  try {
    cmd_compute(parse_group_spec("Cyclic(100)"), "auto", cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CapExceeded);
  }
  auto r = cmd_compute(parse_group_spec("UTsub(6,2,2)"), "auto", cfg);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.report["method"], "certificate");
  EXPECT_EQ(r.report["certificates"]["verified"], 100);
}

TEST(Certify, Examples) {
  Config cfg;
  CertifyOptions opt;
  opt.trials = 50;
  for (const char* s : {"UTsub(6,2,2)", "Gamma(6,3,4)"}) {
    auto r = cmd_certify(parse_group_spec(s), opt, cfg);
    EXPECT_EQ(r.exit_code, 0) << s;
    EXPECT_EQ(r.report["certificates"]["verified"], 50) << s;
    EXPECT_EQ(r.report["certificates"]["failed"], 0) << s;
    EXPECT_TRUE(r.report["failures"].empty());
  }
  try {
    cmd_certify(parse_group_spec("Cyclic(4)"), opt, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedContext);
    EXPECT_EQ(exit_code_for(e.kind()), kExitUsage);
  }
}

TEST(Certify, ReportsIndependentOfWorkers) {
  Config cfg;
  cfg.seed = 99;
  CertifyOptions opt;
  opt.trials = 24;
  opt.length = 5;
  auto spec = parse_group_spec("UT(5,3)");
  const std::string one = cmd_certify(spec, opt, cfg).report.dump();
  cfg.workers = 4;
  EXPECT_EQ(cmd_certify(spec, opt, cfg).report.dump(), one);
  EXPECT_EQ(cmd_certify(spec, opt, cfg).report.dump(), one);
  cfg.seed = 100;
  EXPECT_NE(cmd_certify(spec, opt, cfg).report.dump(), one);
  EXPECT_NE(trial_seed(1, 0), trial_seed(1, 1));
  EXPECT_NE(trial_seed(1, 0), trial_seed(0, 1));
}

TEST(Verify, FreshTamperedTruncated) {
  Config cfg;
  CertifyOptions opt;
  opt.trials = 2;
  opt.emit_dir = scratch("emit").string();
  ASSERT_EQ(cmd_certify(parse_group_spec("UT(4,3)"), opt, cfg).exit_code, 0);
  const auto fresh = std::filesystem::path(*opt.emit_dir) / "cert_0001.json";
  ASSERT_TRUE(std::filesystem::exists(fresh));
  auto r = cmd_verify(fresh.string(), cfg);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_TRUE(r.report["verified"].get<bool>());

  std::ifstream in(fresh);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  Certificate c = certificate_from_json(text);
  UtGroup g(c.input.context);
  c.discarded.back() = {g.t(1, 2, 1), g.t(2, 3, 1), 1};
  const auto tampered = scratch("tampered.json");
  write(tampered, certificate_to_json(c));
  r = cmd_verify(tampered.string(), cfg);
  EXPECT_EQ(r.exit_code, kExitMath);
  EXPECT_FALSE(r.report["verified"].get<bool>());
  EXPECT_TRUE(r.report["failure"].contains("atom"));
  EXPECT_EQ(r.report["failure"]["rule"], "DISCARD");

  const auto truncated = scratch("truncated.json");
  write(truncated, text.substr(0, text.size() / 2));
  try {
    cmd_verify(truncated.string(), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_EQ(exit_code_for(e.kind()), kExitUsage);
  }
  std::filesystem::remove_all(scratch("").parent_path());
}

TEST(Identities, Examples) {
  Config cfg;
  auto r = cmd_check_identities(parse_group_spec("UT(4,2)"), 200, cfg);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_TRUE(r.report["passed"].get<bool>());
  for (const auto& s : r.report["suites"]) EXPECT_EQ(s["status"], "pass") << s["name"];

  r = cmd_check_identities(parse_group_spec("UT(5,3)"), 1000, cfg);
  EXPECT_EQ(r.exit_code, 0);
  for (const auto& s : r.report["suites"]) EXPECT_EQ(s["status"], "pass") << s["name"];

  r = cmd_check_identities(parse_group_spec("Cyclic(6)"), 100, cfg);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.report["suites"].back()["status"], "pass");
  EXPECT_EQ(r.report["suites"].front()["status"], "not-applicable");

  // set-level suites hit the cap, matrix-level ones still run
  r = cmd_check_identities(parse_group_spec("UT(8,5)"), 100, cfg);
  EXPECT_EQ(r.exit_code, kExitCap);
  EXPECT_EQ(r.report["group"]["order"], "37252902984619140625");
  EXPECT_EQ(r.report["suites"][0]["status"], "pass");
  EXPECT_EQ(r.report["suites"][1]["status"], "skipped");
  EXPECT_EQ(r.report["suites"][3]["status"], "pass");
}

TEST(Reports, ErrorShape) {
  auto r = error_report("compute", Error(ErrorKind::CapExceeded, "too big"));
  EXPECT_EQ(r["error"]["kind"], "CapExceeded");
  EXPECT_EQ(r["command"], "compute");
  EXPECT_EQ(exit_code_for(ErrorKind::ParseError), kExitUsage);
  EXPECT_EQ(exit_code_for(ErrorKind::NotInMStar), kExitMath);
}
