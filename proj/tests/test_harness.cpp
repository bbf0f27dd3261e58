#include "test_helpers.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qlab/harness/cli.hpp"

using namespace qlab;
using namespace qlab::harness;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

double max_value(const std::vector<ReportRecord>& records, const std::string& metric) {
  double worst = 0.0;
  for (const auto& r : records) {
    if (r.metric != metric) continue;
    REQUIRE(std::holds_alternative<double>(r.value));
    worst = std::max(worst, std::get<double>(r.value));
  }
  return worst;
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "qlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("qlab_test_" + name);
  std::ofstream(path, std::ios::binary) << content;
  return path;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("parse_state_text", "[harness][state]") {
  const auto e1 = parse_state_text(R"({"dim": 2, "amplitudes": [[1,0],[0,0]]})");
  CHECK(e1.state.dim() == 2);
  CHECK(e1.state[0] == Complex(1.0, 0.0));
  CHECK_FALSE(e1.basis.has_value());

  const auto plus = parse_state_text(R"({"dim": 2, "amplitudes": [[0.7071067811865476,0],[0.7071067811865476,0]]})");
  CHECK_THAT(std::abs(plus.state[1]), WithinAbs(1.0 / std::sqrt(2.0), 1e-15));

  REQUIRE_THROWS_AS(parse_state_text(R"({"dim": 2, "amplitudes": [[1,0],[1,0]]})"), NormalizationError);
  const auto normalized = parse_state_text(R"({"dim": 2, "amplitudes": [[1,0],[1,0]]})", true);
  CHECK_THAT(std::abs(normalized.state[0]), WithinAbs(1.0 / std::sqrt(2.0), 1e-15));

  const auto with_basis = parse_state_text(
      R"({"dim": 2, "amplitudes": [[0,0],[0,1]], "basis": [[[0,0],[1,0]], [[1,0],[0,0]]]})");
  REQUIRE(with_basis.basis.has_value());
  CHECK(amplitudes(with_basis.state, *with_basis.basis)[0] == Complex(0.0, 1.0));

  REQUIRE_THROWS_AS(parse_state_text(R"({"dim": 0, "amplitudes": []})"), DimensionError);
  REQUIRE_THROWS_AS(parse_state_text(R"({"dim": 3, "amplitudes": [[1,0],[0,0]]})"), DimensionError);
  REQUIRE_THROWS_AS(parse_state_text(R"({"dim": 2, "amplitudes": [[1,0],[0,0]], "basis": [[[1,0],[1,0]], [[1,0],[0,0]]]})"),
                    RankDeficiencyError);

  SECTION("syntax errors carry a position") {
    try {
      parse_state_text("{\"dim\": 2,\n  \"amplitudes\": [[1,0],, [0,0]]}");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(e.column() == 24);
    }
    try {
      parse_state_text("{\"dim\": 2,\n \"amplitudes\": [1, 0]}");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(e.column() == 2);
    }
    REQUIRE_THROWS_AS(parse_state_text("[1, 2]"), ParseError);
    REQUIRE_THROWS_AS(parse_state_text(R"({"amplitudes": [[1,0]]})"), ParseError);
    REQUIRE_THROWS_AS(parse_state_text(R"({"dim": 1})"), ParseError);
  }

  REQUIRE_THROWS_AS(parse_state_file("/nonexistent/qlab/state.json"), IoError);
}

TEST_CASE("parse_rule", "[harness]") {
  CHECK(parse_rule("born").name() == "born");
  CHECK(parse_rule("power:1").name() == "power:1");
  CHECK(parse_rule("power:2.5:raw").name() == "power:2.5:raw");
  CHECK_FALSE(parse_rule("power:2.5:raw").context_normalized());
  CHECK(parse_rule("dim2sector").name() == "dim2sector");
  CHECK(parse_rule("stub").name() == "stub");
  for (const char* bad : {"gleason", "power:", "power:x", "power:-1", "power:1:norm", "power:inf", "power:1e"}) {
    REQUIRE_THROWS_AS(parse_rule(bad), ConfigError);
  }
}

TEST_CASE("run_experiment: per-trial commands", "[harness][experiment]") {
  ExperimentConfig config;
  config.command = Command::np_scan;
  config.trials = 100;
  config.seed = 42;

  SECTION("Born np-scan") {
    const auto records = run_experiment(config);
    REQUIRE(records.size() == 100);
    CHECK(max_value(records, "np_violation") < 1e-12);
    for (std::size_t i = 0; i < records.size(); ++i) {
      CHECK(records[i].trial == static_cast<std::int64_t>(i));
      CHECK(records[i].seed == derive_seed(42, i));
      CHECK_THAT(records[i].witness, Catch::Matchers::StartsWith("master=42;k="));
    }
  }

  SECTION("linear power law np-scan") {
    config.rules = {"power:1"};
    CHECK(max_value(run_experiment(config), "np_violation") > 1e-3);
  }

  SECTION("postulates emit both residuals") {
    config.command = Command::postulates;
    config.rules = {"born", "power:1"};
    config.dims = {4};
    config.trials = 20;
    const auto records = run_experiment(config);
    REQUIRE(records.size() == 80);
    std::vector<ReportRecord> born(records.begin(), records.begin() + 40);
    std::vector<ReportRecord> lin(records.begin() + 40, records.end());
    CHECK(max_value(born, "normalization") < 1e-10);
    CHECK(max_value(born, "additivity") < 1e-10);
    CHECK(max_value(lin, "normalization") < 1e-12);
    CHECK(max_value(lin, "additivity") > 1e-3);
  }

  SECTION("phase, signalling, reconstruct") {
    config.trials = 10;
    config.rules = {"born", "stub"};
    config.command = Command::phase;
    const auto phase = run_experiment(config);
    CHECK(max_value({phase.begin(), phase.begin() + 10}, "phase") < 1e-12);
    CHECK(max_value({phase.begin() + 10, phase.end()}, "phase") > 1e-3);

    config.rules = {"born"};
    config.command = Command::signalling;
    CHECK(max_value(run_experiment(config), "signalling_gap") < 1e-12);

    config.command = Command::reconstruct;
    const auto fits = run_experiment(config);
    CHECK(max_value(fits, "fit_residual") < 1e-10);
    CHECK_THAT(fits.front().witness, ContainsSubstring("psd_clipped=0"));
  }

  SECTION("trial failures become error records") {
    config.rules = {"dim2sector"};
    config.trials = 3;
    const auto records = run_experiment(config);
    REQUIRE(records.size() == 3);
    for (const auto& r : records) {
      CHECK(std::holds_alternative<ErrorValue>(r.value));
      CHECK_THAT(r.witness, ContainsSubstring("error="));
    }
    CHECK_THAT(emit_report(records, OutputFormat::csv), ContainsSubstring(",nan,"));
  }

  SECTION("state file overrides the random state") {
    config.state = parse_state_text(R"({"dim": 3, "amplitudes": [[0.7071067811865476,0],[0.5477225575051661,0],[0.4472135954999579,0]]})");
    config.state->basis = OrthonormalBasis::standard(3);
    config.rules = {"power:1"};
    config.command = Command::postulates;
    config.trials = 50;
    const auto records = run_experiment(config);
    // the grouping {0}|{1 2} reproduces the hand-checked gap
    bool seen = false;
    for (const auto& r : records) {
      if (r.metric == "additivity" && r.witness.ends_with("grouping=0|1 2")) {
        CHECK_THAT(std::get<double>(r.value), WithinAbs(0.0845, 1e-3));
        seen = true;
      }
    }
    CHECK(seen);
  }

  SECTION("validation") {
    config.trials = 0;
    REQUIRE_THROWS_AS(run_experiment(config), ConfigError);
    config.trials = 1;
    config.dims = {1};
    REQUIRE_THROWS_AS(run_experiment(config), ConfigError);
    config.dims = {3};
    config.rules = {"nope"};
    REQUIRE_THROWS_AS(run_experiment(config), ConfigError);
  }
}

TEST_CASE("run_experiment: sandwich and finegrain", "[harness][experiment]") {
  ExperimentConfig config;
  config.command = Command::sandwich;
  config.sandwich_target = "0.70710678118654752440";
  config.epsilon = 1e-9;
  const auto sw = run_experiment(config);
  REQUIRE(sw.size() == 1);
  CHECK(sw[0].metric == "sandwich_width");
  CHECK(std::get<double>(sw[0].value) <= 1e-9);
  CHECK_THAT(sw[0].witness, ContainsSubstring("lo=707106781/1000000000;"));
  CHECK_THAT(sw[0].witness, ContainsSubstring(";digits=9;"));

  config.exact = true;
  config.sandwich_target = "1/2";
  CHECK(std::get<Rational>(run_experiment(config)[0].value) == Rational(0));

  config.sandwich_target = "1.5";
  CHECK(std::holds_alternative<ErrorValue>(run_experiment(config)[0].value));
  config.sandwich_target = "abc";
  REQUIRE_THROWS_AS(run_experiment(config), ConfigError);

  config.command = Command::finegrain;
  config.finegrain_m = 7;
  config.finegrain_n = 16;
  config.rules = {"born", "power:1"};
  const auto fg = run_experiment(config);
  REQUIRE(fg.size() == 3);
  CHECK(std::get<double>(fg[0].value) < 1e-12);
  CHECK(std::get<double>(fg[1].value) > 1e-2);
  CHECK(fg[2].rule == "counting");
  CHECK(std::get<Rational>(fg[2].value) == Rational(BigInt(7), BigInt(16)));
  CHECK_THAT(emit_report({fg[2]}, OutputFormat::csv), ContainsSubstring(",7/16,"));
}

TEST_CASE("sweep", "[harness][sweep]") {
  ExperimentConfig base;
  base.rules.clear();
  base.trials = 100;
  base.seed = 3;
  const auto cells = sweep(base, {1.0, 2.0, 3.0}, {3});
  REQUIRE(cells.size() == 3);
  CHECK(cells[0].rule == "power:1");
  CHECK(cells[0].max > 1e-3);
  CHECK(cells[1].max < 1e-12);
  CHECK(cells[2].max > 1e-3);
  for (const auto& c : cells) CHECK(c.mean <= c.max);

  REQUIRE_THROWS_AS(sweep(base, {}, {3}), ConfigError);

  base.rules = {"born"};
  base.trials = 50;
  const auto born_cells = sweep(base, {2.0}, {3, 4, 5, 6});
  REQUIRE(born_cells.size() == 8);
  for (const auto& c : born_cells) CHECK(c.max < 1e-12);

  base.command = Command::sweep;
  base.alphas = {2.0};
  base.dims = {3};
  const auto rows = run_experiment(base);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].experiment == "sweep:np-scan");
  CHECK(rows[0].trial == -1);
  CHECK_THAT(rows[0].witness, ContainsSubstring("stat=max"));
  CHECK_THAT(rows[1].witness, ContainsSubstring("stat=mean"));
}

TEST_CASE("emit_report", "[harness][report]") {
  ReportRecord rec{"np-scan", "born", 3, 0, "np_violation", 0.1, 17, "master=1;k=2"};
  const auto csv = emit_report({rec}, OutputFormat::csv);
  CHECK(csv == "experiment,rule,dim,trial,metric,value,seed,witness\n"
               "np-scan,born,3,0,np_violation,0.10000000000000001,17,master=1;k=2\n");
  CHECK(emit_report({rec}, OutputFormat::csv) == csv);

  rec.witness = "a,\"b\"";
  CHECK_THAT(emit_report({rec}, OutputFormat::csv), ContainsSubstring(",\"a,\"\"b\"\"\"\n"));

  REQUIRE_THROWS_AS(emit_report({}, OutputFormat::csv), ConfigError);
  CHECK(emit_report({}, OutputFormat::csv, true) == std::string(kCsvHeader) + "\n");
  CHECK(emit_report({}, OutputFormat::json, true) == "[]\n");
  REQUIRE_THROWS_AS(parse_format("xml"), ConfigError);

  SECTION("json round-trip") {
    std::vector<ReportRecord> records{
        {"np-scan", "power:1", 3, 0, "np_violation", 0.084551346122514, 99, "master=5;k=0"},
        {"finegrain", "counting", 32, 0, "finegrain", Rational(BigInt(7), BigInt(16)), 1, "m=7"},
        {"np-scan", "dim2sector", 3, 1, "np_violation", ErrorValue{}, 2, "error=\"dim\""},
        {"sweep:np-scan", "born", 4, -1, "np_violation", 1e-300, 3, "stat=max"},
    };
    const auto json = emit_report(records, OutputFormat::json);
    CHECK(parse_json_report(json) == records);
    CHECK_THAT(json, ContainsSubstring("\"value\":\"7/16\""));
    CHECK_THAT(json, ContainsSubstring("\"value\":null"));
  }
}

TEST_CASE("determinism across workers", "[harness][determinism]") {
  ExperimentConfig config;
  config.rules = {"born", "power:1", "power:3"};
  config.dims = {3, 5};
  config.trials = 40;
  config.seed = 1234;
  for (Command c : {Command::np_scan, Command::postulates, Command::signalling, Command::reconstruct}) {
    config.command = c;
    config.workers = 1;
    const auto serial = emit_report(run_experiment(config), OutputFormat::csv);
    config.workers = 8;
    CHECK(emit_report(run_experiment(config), OutputFormat::csv) == serial);
  }
}

TEST_CASE("run_cli", "[harness][cli]") {
  const auto ok = cli({"np-scan", "--trials", "5", "--seed", "9"});
  CHECK(ok.code == kExitOk);
  CHECK_THAT(ok.out, Catch::Matchers::StartsWith(kCsvHeader));
  CHECK(std::count(ok.out.begin(), ok.out.end(), '\n') == 6);

  CHECK(cli({"np-scan", "--rule", "power:1", "--rule", "born", "--dim", "3", "--dim", "4", "--trials", "2"}).out.size() > 0);
  CHECK(cli({"np-scan", "--trials", "5", "--seed", "9", "--workers", "4"}).out == ok.out);

  SECTION("QLAB_SEED is the default seed and flags override it") {
    ::setenv("QLAB_SEED", "9", 1);
    CHECK(cli({"np-scan", "--trials", "5"}).out == ok.out);
    CHECK(cli({"np-scan", "--trials", "5", "--seed", "10"}).out != ok.out);
    ::unsetenv("QLAB_SEED");
  }

  SECTION("configuration errors exit 1") {
    CHECK(cli({"np-scan", "--rule", "power:-1"}).code == kExitConfig);
    CHECK(cli({"np-scan", "--trials", "0"}).code == kExitConfig);
    CHECK(cli({"np-scan", "--format", "xml"}).code == kExitConfig);
    CHECK(cli({"sweep"}).code == kExitConfig);
    CHECK(cli({"frobnicate"}).code == kExitConfig);
    CHECK(cli({}).code == kExitConfig);
    const auto bad = cli({"finegrain", "3", "3"});
    CHECK(bad.code == kExitOk);
    CHECK_THAT(bad.out, ContainsSubstring("error="));
  }

  SECTION("I/O errors exit 2") {
    const auto missing = cli({"np-scan", "--state", "/nonexistent/qlab.json"});
    CHECK(missing.code == kExitIo);
    CHECK_THAT(missing.err, ContainsSubstring("cannot read"));
    CHECK(cli({"np-scan", "--trials", "1", "--out", "/nonexistent/dir/report.csv"}).code == kExitIo);
  }

  SECTION("state file and output file") {
    const auto state = temp_file("state.json", R"({"dim": 2, "amplitudes": [[1,0],[1,0]]})");
    CHECK(cli({"phase", "--state", state.string()}).code == kExitConfig);
    const auto out = std::filesystem::temp_directory_path() / "qlab_test_report.json";
    const auto r = cli({"phase", "--state", state.string(), "--normalize", "--trials", "3", "--format", "json",
                        "--out", out.string()});
    CHECK(r.code == kExitOk);
    CHECK(r.out.empty());
    const auto records = parse_json_report(read_file(out));
    REQUIRE(records.size() == 3);
    CHECK(records[0].dim == 2);
    std::filesystem::remove(state);
    std::filesystem::remove(out);
  }

  SECTION("sandwich and finegrain") {
    const auto sw = cli({"sandwich", "0.5", "--epsilon", "1e-6", "--exact"});
    CHECK(sw.code == kExitOk);
    CHECK_THAT(sw.out, ContainsSubstring("sandwich,-,3,0,sandwich_width,0/1,"));
    const auto fg = cli({"finegrain", "7", "16", "--exact", "--format", "json"});
    CHECK_THAT(fg.out, ContainsSubstring("\"value\":\"7/16\""));
  }

  SECTION("sweep rows") {
    const auto r = cli({"sweep", "--alpha", "1", "--alpha", "2", "--trials", "20"});
    CHECK(r.code == kExitOk);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 5);
  }
}
