#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rbflow/config.hpp"
#include "rbflow/output.hpp"
#include "rbflow/runner.hpp"
#include "rbflow/scenarios.hpp"

using namespace rbflow;
namespace fs = std::filesystem;

namespace {

std::vector<ConfigIssue> issues_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigParseError& e) {
    return e.issues();
  }
  return {};
}

bool mentions(const std::vector<ConfigIssue>& issues, const std::string& fragment, int line = -1) {
  for (const auto& i : issues) {
    if (i.message.find(fragment) != std::string::npos && (line < 0 || i.line == line)) return true;
  }
  return false;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("rbflow_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

const std::string kEinstein = "family = einstein_sphere\nn = 3\nrho = 0.1\nc = 0.75\ns0 = 1.0";

const std::string kShortRun =
    "family = einstein_sphere\nn = 3\nrho = 0\ns0 = 1\ndt = 1e-3\nt_max = 0.02\nsample_interval = 0.01\n"
    "eigenpairs = lambda0\n";

}  // namespace

TEST_CASE("parse_config examples") {
  const auto cfg = parse_config(kEinstein);
  CHECK(cfg.family.kind == FamilyKind::EinsteinSphere);
  CHECK(cfg.family.n == 3);
  CHECK(cfg.flow.rho == 0.1);
  CHECK(cfg.flow.c == 0.75);
  CHECK(cfg.family.initial.s0 == 1.0);

  const auto bad = issues_of("rho = 0.25\nn = 3\nfamily = conformal_torus");
  CHECK(mentions(bad, "rho must be < 1/(2(n-1)) = 0.25 for PDE families", 1));
  // n = 3 is also wrong for a conformal surface; both are reported.
  CHECK(mentions(bad, "require n = 2", 2));

  const auto empty = issues_of("");
  for (const char* key : {"family", "n", "rho"}) CHECK(mentions(empty, std::string("missing required key '") + key));
  CHECK_THROWS_AS(parse_config(""), ConfigError);
}

TEST_CASE("parse_config reports every error with its line") {
  const auto issues = issues_of(
      "family = einstein_sphere\n"
      "n = three\n"
      "rho = 0.1\n"
      "colour = blue\n"
      "rho = 0.2\n"
      "dt = -1\n"
      "fd = maybe\n"
      "preset = wobble\n"
      "no equals sign\n");
  CHECK(mentions(issues, "expected an integer", 2));
  CHECK(mentions(issues, "unknown key 'colour'", 4));
  CHECK(mentions(issues, "duplicate key 'rho'", 5));
  CHECK(mentions(issues, "dt must be > 0", 6));
  CHECK(mentions(issues, "expected true/false", 7));
  CHECK(mentions(issues, "preset", 8));
  CHECK(mentions(issues, "expected 'key = value'", 9));
  for (std::size_t k = 1; k < issues.size(); ++k) CHECK(issues[k - 1].line <= issues[k].line);

  // Comments and blank lines are ignored.
  CHECK_NOTHROW(parse_config("# header\n\nfamily = su2  # trailing\nn = 3\nrho = 0\n"));
}

TEST_CASE("render and parse round-trip") {
  const std::string texts[] = {
      kEinstein,
      "family = conformal_torus\nn = 2\nrho = 0.123456789012345\nresolution = 48\npreset = random_band\n"
      "amplitude = 0.04\nseed = 99\nformats = csv,plot\naudits = r_min_nondecreasing,sigma_bound\n",
      "family = su2\nn = 3\nrho = -0.3\nsu2_a = 1\nsu2_b = 0.7\nsu2_c = 1.3\ndt = 1e-4\n",
      "family = conformal_sphere\nn = 2\nrho = 0.1\nresolution = 4\npreset = cos_xy\namplitude = 0.2\n"
      "eigenpairs = lambda1\nfd = true\nlemma32 = false\nstride = 3\na = 0.5\ntol = 1e-10\n"};
  for (const auto& text : texts) {
    const auto cfg = parse_config(text);
    const auto rendered = render_config(cfg);
    CHECK(parse_config(rendered) == cfg);
    CHECK(render_config(parse_config(rendered)) == rendered);
  }
  CHECK(parse_config(override_key(kEinstein, "rho", "0.2")).flow.rho == 0.2);
  CHECK(parse_config(override_key(kEinstein, "t_max", "0.5")).flow.t_max == 0.5);
  CHECK(format_number(0.1) == "0.10000000000000001");
}

TEST_CASE("csv emission") {
  std::vector<MonitorRecord> recs(3);
  for (int k = 0; k < 3; ++k) {
    recs[k].t = 0.1 * k;
    recs[k].R_min = 1.0;
    recs[k].R_max = 2.0;
  }
  recs[1].lambda1 = 39.5;
  const auto lines = split(series_csv(recs), '\n');
  // Trailing newline leaves one empty piece.
  REQUIRE(lines.size() == 5);
  CHECK(lines.back().empty());
  CHECK(lines[0] == kCsvHeader);
  for (int k = 0; k < 4; ++k) CHECK(split(lines[k], ',').size() == 13);
  CHECK(split(lines[2], ',')[2] == format_number(39.5));
  CHECK(split(lines[1], ',')[2].empty());
}

TEST_CASE("run outputs: csv, json, plot") {
  const auto dir = scratch("outputs");
  auto text = override_key(kShortRun, "out", dir.string());
  text = override_key(text, "formats", "csv,json,plot");
  const auto summary = run_config_text(text);
  REQUIRE(summary.exit_code == 0);
  REQUIRE(summary.records.size() == 3);

  const auto csv = split(slurp(dir / "series.csv"), '\n');
  CHECK(csv.size() == 5);
  CHECK(csv[0] == kCsvHeader);

  const auto js = nlohmann::json::parse(slurp(dir / "summary.json"));
  for (const char* key : {"config", "t_stop", "stop_reason", "hypotheses", "audits", "extrema", "wall_seconds"}) {
    CHECK(js.contains(key));
  }
  CHECK(js["audits"].size() == summary.audits.verdicts.size());
  CHECK(js["t_stop"].get<double>() == summary.t_stop);
  CHECK(js["config"]["family"] == "einstein_sphere");

  const auto gp = slurp(dir / "series.gp");
  CHECK(gp.find("series.csv") != std::string::npos);
  for (const char* col : {"1:2", "1:3", "1:4"}) CHECK(gp.find(col) != std::string::npos);

  RunSummary empty;
  CHECK_THROWS_AS(emit_series(empty, "csv", dir), Error);
  CHECK_NOTHROW(emit_series(empty, "json", dir));
  fs::remove_all(dir);
}

TEST_CASE("csv output is bitwise reproducible") {
  const std::string text =
      "family = conformal_torus\nn = 2\nrho = 0\nresolution = 16\npreset = random_band\namplitude = 0.05\n"
      "seed = 4\nt_max = 0.01\nsample_interval = 0.0025\neigenpairs = lambda1\n";
  const auto a = run_config_text(text);
  const auto b = run_config_text(text);
  REQUIRE(a.exit_code == 0);
  CHECK(series_csv(a.records) == series_csv(b.records));
}

TEST_CASE("exit-code contract") {
  const auto* thm12 = find_scenario("s3-thm12");
  REQUIRE(thm12);
  const auto s = run_config_text(thm12->config);
  CHECK(s.exit_code == 0);
  CHECK(s.audits.find("q_increasing")->verdict == Verdict::Pass);

  const auto* prop = find_scenario("torus-prop13");
  REQUIRE(prop);
  const auto t = run_config_text(prop->config);
  CHECK(t.exit_code == 0);
  CHECK(t.audits.find("r_min_nondecreasing")->verdict == Verdict::Pass);

  const auto bad = run_config_text("family = einstein_sphere\nn = 3\nrho = 0.5\n");
  CHECK(bad.exit_code == 2);
  CHECK_FALSE(bad.error.empty());
  CHECK(bad.records.empty());

  // A step floor above the initial step is a numerical failure.
  const auto under = run_config_text(kShortRun + "min_dt = 1\n");
  CHECK(under.exit_code == 3);

  CHECK(find_scenario("no-such-scenario") == nullptr);
}

TEST_CASE("verdict count equals requested audit count") {
  const auto all = run_config_text(kShortRun);
  CHECK(all.audits.verdicts.size() == audit_names().size());
  const auto some = run_config_text(kShortRun + "audits = lambda0_increasing,r_min_nondecreasing,sigma_bound\n");
  REQUIRE(some.audits.verdicts.size() == 3);
  CHECK(some.audits.verdicts[0].name == "lambda0_increasing");
  CHECK(some.audits.verdicts[2].name == "sigma_bound");
  CHECK(run_config_text(kShortRun + "audits = bogus\n").exit_code == 2);
}

TEST_CASE("sweep axis parsing") {
  const auto r = parse_sweep_axis("rho=0:0.2:0.05");
  CHECK(r.key == "rho");
  REQUIRE(r.values.size() == 5);
  CHECK(std::stod(r.values.back()) == doctest::Approx(0.2));
  const auto l = parse_sweep_axis("seed=1,2,3");
  CHECK(l.values == std::vector<std::string>{"1", "2", "3"});
  CHECK_THROWS_AS(parse_sweep_axis("rho"), ConfigError);
  CHECK_THROWS_AS(parse_sweep_axis("rho=0:1:0"), ConfigError);
  CHECK_THROWS_AS(parse_sweep_axis("rho=1:0:0.1"), ConfigError);
}

TEST_CASE("sweep writes one directory per run and matches serial runs") {
  const auto dir = scratch("sweep");
  const auto axis = parse_sweep_axis("rho=0:0.1:0.05");
  const auto results = run_sweep(kShortRun, axis, dir, 3);
  REQUIRE(results.size() == 3);
  for (std::size_t k = 0; k < results.size(); ++k) {
    CHECK(results[k].exit_code == 0);
    CHECK(results[k].config.flow.rho == doctest::Approx(0.05 * k));
    const auto csv = slurp(fs::path(results[k].config.out_dir) / "series.csv");
    CHECK(csv == series_csv(run_config_text(override_key(kShortRun, "rho", axis.values[k])).records));
  }
  fs::remove_all(dir);

  ::setenv("RBFLOW_THREADS", "2", 1);
  CHECK(worker_count() == 2);
  ::unsetenv("RBFLOW_THREADS");
  CHECK(worker_count() >= 1);
}

TEST_CASE("every builtin scenario meets its exit-code contract") {
  for (const auto& sc : builtin_scenarios()) {
    // The two spectrum studies and refinement are covered by the acceptance binary.
    if (sc.name == "sphere-spectrum" || sc.name == "torus-evolution") continue;
    const auto outcome = run_builtin(sc);
    INFO(sc.name);
    CHECK(outcome.exit_code == sc.expected_exit);
    CHECK(outcome.as_expected);
  }
}
