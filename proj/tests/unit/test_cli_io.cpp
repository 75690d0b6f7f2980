#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "acsparse/cli/config.hpp"
#include "acsparse/cli/run.hpp"
#include "acsparse/cli/serialize.hpp"
#include "acsparse/errors.hpp"

using namespace acsparse;
using namespace acsparse::cli;
namespace fs = std::filesystem;

namespace {

// Small, fast problem used by the end-to-end runs.
const char* kSmall = R"(# small run
mesh.n_x = 8
mesh.n_y = 3
time.n_t = 8
time.final = 0.25
gradient.directions = 3
soc.samples = 4
soc.growth_directions = 3
)";

fs::path scratch(const std::string& tag) {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  fs::path p = fs::temp_directory_path() / "acsparse_tests" / (std::string(info->name()) + "_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Value of `key` inside `[section]` of a structured report.
std::string report_value(const std::string& text, const std::string& section, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  bool inside = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '[') {
      inside = line == "[" + section + "]";
      continue;
    }
    if (inside && line.rfind(key + " = ", 0) == 0) return line.substr(key.size() + 3);
  }
  return {};
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string(ACSPARSE_TOOL_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, DefaultsAndEcho) {
  const RunConfig c = parse_config("");
  EXPECT_EQ(c.n_x, 16);
  EXPECT_EQ(c.n_y, 6);
  EXPECT_EQ(c.n_t, 32);
  EXPECT_DOUBLE_EQ(c.final_time, 0.5);
  EXPECT_EQ(c.mode, SparsityMode::full);
  const auto echo = c.echo();
  ASSERT_EQ(echo.size(), config_keys().size());
  for (std::size_t i = 0; i < echo.size(); ++i) EXPECT_EQ(echo[i].first, config_keys()[i]);
  // The echo parses back to the same configuration.
  std::string text;
  for (const auto& [k, v] : echo) text += k + " = " + v + "\n";
  EXPECT_EQ(parse_config(text).echo(), echo);
  const ProblemSpec s = c.to_problem_spec();
  EXPECT_EQ(s.mesh.n_x(), 16);
  EXPECT_EQ(s.grid.n_t(), 32);
}

TEST(Config, ParsesValuesListsAndComments) {
  const RunConfig c = parse_config(
      "mesh.n_x = 10   # trailing comment\n"
      "\n"
      "  weights.nu = 0.25\n"
      "gradient.steps = 1e-2, 1e-3\n"
      "sparsity.mode = time\n"
      "bulk_potential.kind = quartic\n"
      "surface_potential.kind = quartic\n"
      "soc.simple_cone = false\n");
  EXPECT_EQ(c.n_x, 10);
  EXPECT_DOUBLE_EQ(c.weights.nu, 0.25);
  ASSERT_EQ(c.gradient_steps.size(), 2u);
  EXPECT_DOUBLE_EQ(c.gradient_steps[1], 1e-3);
  EXPECT_EQ(c.mode, SparsityMode::time_directional);
  EXPECT_EQ(c.potentials.bulk.kind, PotentialKind::quartic);
  EXPECT_FALSE(c.soc_simple_cone);
}

TEST(Config, ErrorsCarryLocationAndAssumption) {
  try {
    parse_config("mesh.n_x = 8\nmesh.bogus = 1\n");
    FAIL() << "unknown key accepted";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_NE(std::string(e.what()).find("mesh.bogus"), std::string::npos);
  }
  try {
    parse_config("weights.nu = 1\nweights.nu = 2\n");
    FAIL() << "duplicate key accepted";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  try {
    parse_config("\n\nmesh.n_x = eight\n");
    FAIL() << "bad value accepted";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_FALSE(config_error("mesh.n_x\n").empty());
  EXPECT_NE(config_error("weights.beta3 = 1\nweights.beta4 = 0.5\n").find("A6"), std::string::npos);
  EXPECT_NE(config_error("initial.offset = 1.0\ninitial.amplitude = 0\ninitial.y_slope = 0\n").find("A2"),
            std::string::npos);
  EXPECT_NE(config_error("weights.beta1 = 0\nweights.beta2 = 0\n").find("A4"), std::string::npos);
  EXPECT_NE(config_error("weights.alpha = 0\n").find("alpha"), std::string::npos);
  EXPECT_NE(config_error("bounds.rho_min = 0.1\n").find("box"), std::string::npos);
  EXPECT_NE(config_error("weights.beta3 = 1\nweights.beta4 = 1\nsweep.estimate_threshold = true\n").find("A7"),
            std::string::npos);
  EXPECT_NO_THROW(parse_config("weights.beta3 = 1\nweights.beta4 = 1\n"));
  EXPECT_FALSE(config_error("mesh.n_x = 3\n").empty());
  EXPECT_FALSE(config_error("sparsity.mode = spatial\n").empty());
}

TEST(Serialize, RealFormattingRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    const std::string s = format_real(v);
    EXPECT_EQ(std::stod(s), v);
  }
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
}

TEST(Serialize, FieldCsvRoundTripAndDescriptor) {
  const fs::path dir = scratch("csv");
  const Mesh m = build_mesh(4, 3, 1.0, 1.0);
  const TimeGrid g(1.0, 2);
  std::vector<BulkField> fields;
  for (int t = 0; t < 3; ++t) {
    BulkField f = BulkField::zeros(m);
    for (int i = 0; i < m.bulk_size(); ++i) f.values[i] = std::sin(0.37 * i + t) / 3.0;
    fields.push_back(f);
  }
  const auto recs = records_of(m, fields);
  ASSERT_EQ(recs.size(), static_cast<std::size_t>(3 * m.bulk_size()));
  const fs::path csv = dir / "f.csv";
  write_field_csv(csv, recs);
  const std::string text = slurp(csv);
  EXPECT_EQ(text.substr(0, text.find('\n')), "row,col,t_index,value");
  const auto back = read_field_csv(csv);
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(back[i].row, recs[i].row);
    EXPECT_EQ(back[i].col, recs[i].col);
    EXPECT_EQ(back[i].t_index, recs[i].t_index);
    EXPECT_EQ(back[i].value, recs[i].value);
  }
  std::vector<BoundaryField> rings{BoundaryField::constant(m, 2.0)};
  const auto ring_recs = records_of(m, rings);
  ASSERT_EQ(ring_recs.size(), 8u);
  EXPECT_EQ(ring_recs.front().row, 0);
  EXPECT_EQ(ring_recs.back().row, m.rows() - 1);

  write_descriptor(csv, "state", m, g, 3);
  const std::string desc = slurp(fs::path(csv.string() + ".desc"));
  EXPECT_NE(desc.find("kind = state\n"), std::string::npos);
  EXPECT_NE(desc.find("time_entries = 3\n"), std::string::npos);
  EXPECT_NE(desc.find("n_x = 4"), std::string::npos);

  std::ofstream(dir / "bad.csv") << "a,b\n";
  EXPECT_THROW(read_field_csv(dir / "bad.csv"), InvalidArgument);
}

TEST(Serialize, ReportsAndDigests) {
  StructuredReport r;
  r.section("a");
  r.put("x", 0.5);
  r.put("n", 3);
  r.put("flag", true);
  r.put("list", std::vector<double>{1.0, 2.0});
  r.table("t", {"c1", "c2"}, {{1.0, 2.0}});
  EXPECT_EQ(r.str(), "[a]\nx = 0.5\nn = 3\nflag = true\nlist = 1, 2\ntable t = c1 c2\n  1 2\n");
  const fs::path dir = scratch("sha");
  write_text(dir / "abc.txt", "abc");
  EXPECT_EQ(sha256_hex(dir / "abc.txt"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Run, SubcommandNames) {
  for (Subcommand s : {Subcommand::solve_state, Subcommand::optimize, Subcommand::check_gradient,
                       Subcommand::check_soc, Subcommand::sweep_alpha, Subcommand::audit_assumptions})
    EXPECT_EQ(parse_subcommand(to_string(s)), s);
  EXPECT_EQ(to_string(Subcommand::check_soc), "check-soc");
  EXPECT_THROW(parse_subcommand("solve"), InvalidArgument);
}

TEST(Run, SolveStateOnZeroDataWritesZeroTrajectoryAndManifest) {
  const fs::path dir = scratch("out");
  const RunConfig cfg = parse_config(std::string(kSmall) +
                                     "initial.offset = 0\ninitial.amplitude = 0\ninitial.y_slope = 0\n");
  const ResultBundle b = run_subcommand(Subcommand::solve_state, cfg, {dir, std::nullopt, 1});
  const auto recs = read_field_csv(dir / "state.csv");
  ASSERT_EQ(recs.size(), static_cast<std::size_t>(9 * 5 * 8));
  for (const auto& r : recs) EXPECT_EQ(r.value, 0.0);
  const std::string report = slurp(dir / "report.txt");
  EXPECT_EQ(report_value(report, "separation", "delta_obs"), "1");

  const std::string manifest = slurp(b.manifest);
  EXPECT_EQ(report_value(manifest, "manifest", "subcommand"), "solve-state");
  ASSERT_FALSE(b.files.empty());
  for (const auto& f : b.files) {
    ASSERT_TRUE(fs::exists(dir / f)) << f;
    const std::string entry = report_value(manifest, "files", f);
    EXPECT_EQ(entry.substr(0, 64), sha256_hex(dir / f)) << f;
  }
  EXPECT_NE(manifest.find("[config]"), std::string::npos);
}

TEST(Run, OptimizeIsDeterministic) {
  const RunConfig cfg = parse_config(kSmall);
  const fs::path a = scratch("a");
  const fs::path b = scratch("b");
  const ResultBundle ra = run_subcommand(Subcommand::optimize, cfg, {a, std::nullopt, 1});
  run_subcommand(Subcommand::optimize, cfg, {b, std::nullopt, 1});
  int csvs = 0;
  for (const auto& f : ra.files) {
    if (fs::path(f).extension() != ".csv") continue;
    ++csvs;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_EQ(csvs, 4);
  const std::string report = slurp(a / "report.txt");
  EXPECT_EQ(report_value(report, "optimization", "converged"), "true");
}

TEST(Run, CheckGradientMeetsTolerance) {
  const fs::path dir = scratch("out");
  run_subcommand(Subcommand::check_gradient, parse_config(kSmall), {dir, std::nullopt, 1});
  const std::string g = slurp(dir / "gradient.txt");
  EXPECT_LE(std::stod(report_value(g, "gradient", "worst_best_step_relative_error")), 1e-6);
  EXPECT_LE(std::stod(report_value(g, "second_derivative", "worst_relative_error")), 1e-4);
}

TEST(Run, CheckSocAndAuditWriteReports) {
  const fs::path dir = scratch("soc");
  run_subcommand(Subcommand::check_soc, parse_config(kSmall), {dir, std::nullopt, 1});
  const std::string s = slurp(dir / "soc.txt");
  EXPECT_FALSE(report_value(s, "taylor", "first_slope").empty());
  EXPECT_FALSE(report_value(s, "continuity", "adjoint_monotone").empty());
  EXPECT_FALSE(report_value(s, "quadratic_growth", "sigma").empty());
  const fs::path adir = scratch("audit");
  run_subcommand(Subcommand::audit_assumptions, parse_config(kSmall), {adir, std::nullopt, 1});
  EXPECT_TRUE(fs::exists(adir / "assumptions.txt"));
}

TEST(Run, SweepAboveThresholdVanishes) {
  const fs::path dir = scratch("sweep");
  const RunConfig cfg = parse_config(std::string(kSmall) + "sweep.threshold_samples = 2\n");
  run_subcommand(Subcommand::sweep_alpha, cfg, {dir, std::nullopt, 2});
  const std::string s = slurp(dir / "sweep.txt");
  EXPECT_EQ(report_value(s, "vanishing", "rows_above_threshold"), "true");
  EXPECT_EQ(report_value(s, "vanishing", "controls_vanish_above_threshold"), "true");
  // Last table row: support measures zero.
  std::istringstream in(s);
  std::string line;
  std::string last_row;
  bool in_table = false;
  while (std::getline(in, line)) {
    if (line.rfind("table sweep", 0) == 0) in_table = true;
    else if (in_table && line.rfind("  ", 0) == 0) last_row = line;
    else in_table = false;
  }
  std::istringstream row(last_row);
  double alpha, alpha_g, sb, sr;
  row >> alpha >> alpha_g >> sb >> sr;
  EXPECT_EQ(sb, 0.0);
  EXPECT_EQ(sr, 0.0);
  EXPECT_TRUE(fs::exists(dir / "alpha_03" / "control_bulk.csv"));
}

TEST(Tool, ExitCodes) {
  const fs::path dir = scratch("tool");
  write_text(dir / "ok.cfg", kSmall);
  write_text(dir / "bad.cfg", "weights.beta3 = 1\n");
  write_text(dir / "sep.cfg", std::string(kSmall) + "solver.newton_guard = 0.4\ncontrol_bulk.offset = 3\n"
                                                    "control_boundary.offset = 3\n");
  const std::string out = " --out " + (dir / "out").string();
  EXPECT_EQ(run_tool("solve-state --config " + (dir / "ok.cfg").string() + out), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "manifest.txt"));
  EXPECT_EQ(run_tool("solve-state --config " + (dir / "bad.cfg").string() + out), 1);
  EXPECT_EQ(run_tool("solve-state --config " + (dir / "missing.cfg").string() + out), 1);
  EXPECT_EQ(run_tool("solve-state" + out), 1);
  EXPECT_EQ(run_tool("frobnicate --config x" + out), 1);
  EXPECT_EQ(run_tool("solve-state --config " + (dir / "sep.cfg").string() + out), 2);
}
