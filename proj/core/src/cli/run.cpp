#include "acsparse/cli/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <random>
#include <thread>

#include "acsparse/cli/serialize.hpp"
#include "acsparse/errors.hpp"
#include "acsparse/objective.hpp"
#include "acsparse/optimizer.hpp"
#include "acsparse/soc.hpp"
#include "acsparse/sparsity.hpp"

#ifndef ACSPARSE_VERSION
#define ACSPARSE_VERSION "unknown"
#endif

namespace acsparse::cli {

namespace fs = std::filesystem;

std::string_view to_string(Subcommand s) {
  switch (s) {
    case Subcommand::solve_state:
      return "solve-state";
    case Subcommand::optimize:
      return "optimize";
    case Subcommand::check_gradient:
      return "check-gradient";
    case Subcommand::check_soc:
      return "check-soc";
    case Subcommand::sweep_alpha:
      return "sweep-alpha";
    case Subcommand::audit_assumptions:
      return "audit-assumptions";
  }
  return "";
}

Subcommand parse_subcommand(std::string_view name) {
  for (Subcommand s : {Subcommand::solve_state, Subcommand::optimize, Subcommand::check_gradient,
                       Subcommand::check_soc, Subcommand::sweep_alpha,
                       Subcommand::audit_assumptions}) {
    if (to_string(s) == name) return s;
  }
  throw InvalidArgument("unknown subcommand '" + std::string(name) + "'");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InvalidArgument*>(&e)) return 1;
  return 2;
}

namespace {

class Bundle {
 public:
  explicit Bundle(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  const fs::path& dir() const { return dir_; }

  void field(const std::string& name, const std::string& kind, const Mesh& mesh,
             const TimeGrid& grid, const std::vector<FieldRecord>& records, int time_entries) {
    const fs::path p = dir_ / name;
    fs::create_directories(p.parent_path());
    write_field_csv(p, records);
    write_descriptor(p, kind, mesh, grid, time_entries);
    add(name);
    add(name + ".desc");
  }

  void report(const std::string& name, const StructuredReport& r) {
    r.write(dir_ / name);
    add(name);
  }

  void add(const std::string& name) {
    std::lock_guard lock(mu_);
    files_.push_back(name);
  }

  ResultBundle finish(Subcommand cmd, const RunConfig& cfg, double seconds) {
    std::sort(files_.begin(), files_.end());
    StructuredReport m;
    m.section("manifest");
    m.put("tool", std::string("acsparse"));
    m.put("version", std::string(ACSPARSE_VERSION));
    m.put("eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                       "." + std::to_string(EIGEN_MINOR_VERSION));
    m.put("subcommand", std::string(to_string(cmd)));
    m.put("seed", std::to_string(cfg.seed));
    m.put("elapsed_seconds", seconds);
    m.section("files");
    for (const auto& f : files_) {
      m.put(f, sha256_hex(dir_ / f) + " " + std::to_string(fs::file_size(dir_ / f)));
    }
    m.section("config");
    for (const auto& [k, v] : cfg.echo()) m.put(k, v);
    const fs::path manifest = dir_ / "manifest.txt";
    m.write(manifest);
    return {dir_, files_, manifest};
  }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
  std::mutex mu_;
};

void write_controls(Bundle& b, const std::string& prefix, const Mesh& mesh, const TimeGrid& grid,
                    const ControlPair& u) {
  b.field(prefix + "control_bulk.csv", "control_bulk", mesh, grid, records_of(mesh, u.bulk),
          grid.n_t());
  b.field(prefix + "control_boundary.csv", "control_boundary", mesh, grid,
          records_of(mesh, u.boundary), grid.n_t());
}

void put_stats(StructuredReport& r, const SolveStats& st) {
  r.put("newton_iterations", st.newton_iterations);
  r.put("guard_rejections", st.guard_rejections);
  r.put("residual_halvings", st.residual_halvings);
  r.put("max_newton_residual", st.max_residual);
}

void put_sparsity(StructuredReport& r, const SparsityReport& s) {
  r.put("support_measure_bulk", s.support_measure_bulk);
  r.put("support_measure_boundary", s.support_measure_boundary);
  r.put("violation_measure_bulk", s.violation_measure_bulk);
  r.put("violation_measure_boundary", s.violation_measure_boundary);
  r.put("measure_Q", s.measure_bulk);
  r.put("measure_Sigma", s.measure_boundary);
  r.put("control_slice_norms", s.control_slice_norms);
  r.put("control_boundary_slice_norms", s.control_boundary_slice_norms);
  r.put("adjoint_slice_norms", s.adjoint_slice_norms);
  r.put("adjoint_boundary_slice_norms", s.adjoint_boundary_slice_norms);
}

ControlPair random_box_control(const Problem& problem, std::uint64_t seed, double shrink) {
  std::mt19937_64 rng(seed);
  const BoxBounds& box = problem.bounds();
  std::uniform_real_distribution<double> ub(shrink * box.rho_min, shrink * box.rho_max);
  std::uniform_real_distribution<double> ur(shrink * box.rho_gamma_min, shrink * box.rho_gamma_max);
  ControlPair u = ControlPair::zeros(problem.mesh(), problem.grid());
  for (auto& f : u.bulk)
    for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values[i] = ub(rng);
  for (auto& g : u.boundary)
    for (Eigen::Index i = 0; i < g.values.size(); ++i) g.values[i] = ur(rng);
  return u;
}

std::optional<ControlPair> initial_control(const RunConfig& cfg, const Problem& problem) {
  if (cfg.optimizer_init == "random") return random_box_control(problem, cfg.seed, 1.0);
  return std::nullopt;
}

void report_optimization(StructuredReport& r, const Problem& problem,
                         const OptimizationReport& rep) {
  const FirstOrderCheck foc = verify_first_order(problem, rep.control, rep.adjoint);
  r.section("optimization");
  r.put("converged", rep.converged);
  r.put("iterations", rep.iterations);
  r.put("stationarity_residual", rep.residual);
  r.put("vi_min", foc.vi_min);
  r.put("cost", rep.cost);
  r.put("control_max_abs", rep.control.max_abs());
  std::vector<std::vector<double>> hist;
  for (const auto& h : rep.history)
    hist.push_back({static_cast<double>(h.iteration), h.cost, h.smooth, h.sparse, h.residual, h.step});
  r.table("history", {"iteration", "cost", "smooth", "sparse", "residual", "step"}, hist);
  r.section("sparsity");
  r.put("mode", std::string(to_string(problem.mode())));
  put_sparsity(r, rep.sparsity);
}

void run_solve_state(Bundle& b, const RunConfig& cfg, const Problem& problem) {
  const ControlPair u = cfg.control(problem.mesh(), problem.grid());
  SolveStats st;
  const Trajectory y =
      solve_state(problem.disc(), problem.potentials(), problem.y0(), u, problem.solver(), &st);
  b.field("state.csv", "state", problem.mesh(), problem.grid(), records_of(problem.mesh(), y),
          problem.grid().n_t() + 1);
  const SeparationEstimate sep = estimate_separation(y);
  StructuredReport r;
  r.section("separation");
  r.put("r_minus", sep.r_minus);
  r.put("r_plus", sep.r_plus);
  r.put("delta_obs", sep.delta_obs());
  r.section("solver");
  put_stats(r, st);
  r.put("max_weak_form_residual", max_weak_form_residual(problem.disc(), problem.potentials(), y, u));
  b.report("report.txt", r);
}

void run_optimize(Bundle& b, const RunConfig& cfg, const Problem& problem) {
  const OptimizationReport rep = optimize(problem, initial_control(cfg, problem));
  write_controls(b, "", problem.mesh(), problem.grid(), rep.control);
  b.field("state.csv", "state", problem.mesh(), problem.grid(),
          records_of(problem.mesh(), rep.state), problem.grid().n_t() + 1);
  b.field("adjoint.csv", "adjoint", problem.mesh(), problem.grid(),
          records_of(problem.mesh(), rep.adjoint), problem.grid().n_t() + 1);
  StructuredReport r;
  report_optimization(r, problem, rep);
  b.report("report.txt", r);
}

void run_check_gradient(Bundle& b, const RunConfig& cfg, const Problem& problem) {
  const Discretization& disc = problem.disc();
  const bool given = cfg.control_bulk.explicit_set || cfg.control_boundary.explicit_set;
  const ControlPair u = given ? cfg.control(problem.mesh(), problem.grid())
                              : random_box_control(problem, cfg.seed, 0.5);
  const SmoothEvaluation at = evaluate_smooth(problem, u);
  const FrozenOperators ops(disc, problem.potentials(), at.state, problem.solver());
  std::mt19937_64 rng(cfg.seed + 1);
  std::vector<std::vector<double>> grad_rows;
  std::vector<std::vector<double>> d2_rows;
  double worst_best = 0.0;
  double worst_d2 = 0.0;
  for (int k = 0; k < cfg.gradient_directions; ++k) {
    ControlPair h = random_control(problem.mesh(), problem.grid(), rng);
    h *= 1.0 / disc.norm(h);
    const double ad = disc.inner(at.gradient, h);
    double best = std::numeric_limits<double>::infinity();
    for (double t : cfg.gradient_steps) {
      const double fd = (smooth_cost(problem, u + t * h) - smooth_cost(problem, u - t * h)) / (2 * t);
      const double rel = std::abs(fd - ad) / std::max(std::abs(ad), 1e-300);
      best = std::min(best, rel);
      grad_rows.push_back({static_cast<double>(k), t, ad, fd, rel});
    }
    worst_best = std::max(worst_best, best);
    const double t = cfg.second_difference_step;
    const double q = quadratic_form_D2J(problem, ops, at.adjoint, h, h);
    const double fd2 =
        (smooth_cost(problem, u + t * h) - 2.0 * at.cost + smooth_cost(problem, u - t * h)) / (t * t);
    const double rel2 = std::abs(q - fd2) / std::max(std::abs(fd2), 1e-300);
    worst_d2 = std::max(worst_d2, rel2);
    d2_rows.push_back({static_cast<double>(k), t, q, fd2, rel2});
  }
  StructuredReport r;
  r.section("gradient");
  r.put("directions", cfg.gradient_directions);
  r.put("worst_best_step_relative_error", worst_best);
  r.table("gradient", {"direction", "step", "adjoint", "finite_difference", "relative_error"},
          grad_rows);
  r.section("second_derivative");
  r.put("worst_relative_error", worst_d2);
  r.table("second_derivative", {"direction", "step", "quadratic_form", "second_difference",
                                "relative_error"},
          d2_rows);
  b.report("gradient.txt", r);
}

void put_soc(StructuredReport& r, const SocReport& s) {
  r.put("requested", s.requested);
  r.put("kept", s.kept);
  r.put("all_projections_zero", s.all_projections_zero);
  r.put("min_rayleigh", s.min_rayleigh);
  r.put("max_rayleigh", s.max_rayleigh);
  r.put("label", s.label);
  std::vector<std::vector<double>> rows;
  for (const auto& c : s.samples)
    rows.push_back({c.rayleigh, c.oracle.value_or(NAN), c.oracle_rel_error.value_or(NAN)});
  r.table("samples", {"rayleigh", "oracle", "relative_error"}, rows);
  std::vector<std::vector<double>> hist;
  for (std::size_t i = 0; i < s.histogram_counts.size(); ++i)
    hist.push_back({s.histogram_edges[i], s.histogram_edges[i + 1],
                    static_cast<double>(s.histogram_counts[i])});
  r.table("histogram", {"from", "to", "count"}, hist);
}

void run_check_soc(Bundle& b, const RunConfig& cfg, const Problem& problem) {
  const OptimizationReport rep = optimize(problem, initial_control(cfg, problem));
  StructuredReport r;
  report_optimization(r, problem, rep);

  CoercivityOptions co;
  co.n_samples = cfg.soc_samples;
  co.seed = cfg.seed;
  co.oracle_step = cfg.soc_oracle_step;
  r.section("coercivity_critical_cone");
  put_soc(r, sample_coercivity(problem, rep.control, co));
  if (cfg.soc_simple_cone) {
    co.simple_cone = true;
    r.section("coercivity_simple_cone");
    put_soc(r, sample_coercivity(problem, rep.control, co));
  }

  const GrowthReport g =
      quadratic_growth_probe(problem, rep.control, cfg.growth_radii, cfg.growth_directions, cfg.seed);
  r.section("quadratic_growth");
  r.put("sigma", g.sigma);
  std::vector<std::vector<double>> rows;
  for (const auto& row : g.rows) rows.push_back({row.radius, row.min_ratio, row.worst_slack});
  r.table("growth", {"radius", "min_ratio", "worst_slack"}, rows);

  std::mt19937_64 rng(cfg.seed + 7);
  ControlPair h = random_control(problem.mesh(), problem.grid(), rng);
  h *= 1.0 / problem.disc().norm(h);
  const TaylorReport t = taylor_test_DS(problem, rep.control, h, cfg.taylor_steps);
  r.section("taylor");
  r.put("first_slope", t.first_slope);
  r.put("second_slope", t.second_slope);
  rows.clear();
  for (std::size_t i = 0; i < t.steps.size(); ++i)
    rows.push_back({t.steps[i], t.first_remainder[i], t.second_remainder[i]});
  r.table("remainders", {"step", "first", "second"}, rows);

  const ContinuityReport c =
      continuity_test_appendix(problem, rep.control, cfg.continuity_scales, cfg.seed + 11);
  r.section("continuity");
  r.put("adjoint_rate", c.adjoint_rate);
  r.put("adjoint_monotone", c.adjoint_monotone);
  r.put("first_derivative_monotone", c.first_monotone);
  r.put("second_derivative_monotone", c.second_monotone);
  rows.clear();
  for (const auto& row : c.rows)
    rows.push_back({row.scale, row.adjoint_diff, row.first_derivative_diff, row.second_derivative_diff});
  r.table("continuity", {"scale", "adjoint_diff", "first_derivative_diff", "second_derivative_diff"},
          rows);
  b.report("soc.txt", r);
}

void run_sweep_alpha(Bundle& b, const RunConfig& cfg, const Problem& problem, int threads) {
  if (problem.mode() == SparsityMode::none)
    throw ConfigError(0, "sweep-alpha needs sparsity.mode = full or time");
  const VanishingThreshold th =
      estimate_vanishing_threshold(problem, problem.mode(), cfg.threshold_samples, cfg.seed);
  std::vector<double> alphas = cfg.sweep_alphas;
  std::vector<double> alpha_gammas = cfg.sweep_alpha_gammas;
  if (alphas.empty()) {
    for (double f : {0.25, 0.5, 0.75, 1.1}) {
      alphas.push_back(f * th.alpha_star);
      alpha_gammas.push_back(f * th.alpha_star_gamma);
    }
  } else if (alpha_gammas.empty()) {
    const double ratio = th.alpha_star > 0.0 ? th.alpha_star_gamma / th.alpha_star : 1.0;
    for (double a : alphas) alpha_gammas.push_back(a * ratio);
  }
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0) || !(alpha_gammas[i] > 0.0))
      throw ConfigError(0, "sweep: alpha values must be positive (threshold estimate is zero)");
  }

  struct Row {
    OptimizationReport rep;
    std::string error;
  };
  std::vector<Row> rows(alphas.size());
  auto work = [&](std::size_t i) {
    CostWeights w = problem.weights();
    w.alpha = alphas[i];
    w.alpha_gamma = alpha_gammas[i];
    const Problem p = problem.with_weights(w);
    rows[i].rep = optimize(p, initial_control(cfg, p));
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min<std::size_t>(threads, alphas.size()));
  std::vector<std::exception_ptr> errors(alphas.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < alphas.size(); i += n_threads) {
          try {
            work(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  StructuredReport r;
  r.section("threshold");
  r.put("mode", std::string(to_string(problem.mode())));
  r.put("alpha_star", th.alpha_star);
  r.put("alpha_star_gamma", th.alpha_star_gamma);
  std::vector<std::vector<double>> table;
  bool vanish_ok = true;
  bool any_above = false;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const auto& rep = rows[i].rep;
    char dir[32];
    std::snprintf(dir, sizeof dir, "alpha_%02zu/", i);
    write_controls(b, dir, problem.mesh(), problem.grid(), rep.control);
    const bool above = alphas[i] > th.alpha_star && alpha_gammas[i] > th.alpha_star_gamma;
    if (above) {
      any_above = true;
      vanish_ok = vanish_ok && rep.control.max_abs() == 0.0;
    }
    table.push_back({alphas[i], alpha_gammas[i], rep.sparsity.support_measure_bulk,
                     rep.sparsity.support_measure_boundary, rep.cost, rep.residual,
                     static_cast<double>(rep.iterations), rep.converged ? 1.0 : 0.0,
                     above ? 1.0 : 0.0});
  }
  r.section("sweep");
  r.table("sweep", {"alpha", "alpha_gamma", "support_bulk", "support_boundary", "cost", "residual",
                    "iterations", "converged", "above_threshold"},
          table);
  r.section("vanishing");
  r.put("rows_above_threshold", any_above);
  r.put("controls_vanish_above_threshold", vanish_ok);
  b.report("sweep.txt", r);
}

void audit_potential(StructuredReport& r, const std::string& name, const PotentialSpec& spec) {
  r.section(name);
  r.put("kind", std::string(to_string(spec.kind)));
  r.put("c1", spec.c1);
  r.put("c2", spec.c2);
  r.put("nonconvex", spec.nonconvex());
  const std::vector<double> points{-0.9, -0.5, -0.1, 0.0, 0.3, 0.7, 0.9};
  const double h = 1e-5;
  for (int order = 1; order <= 4; ++order) {
    double worst = 0.0;
    for (double x : points) {
      const double fd =
          (eval_derivative(spec, order - 1, x + h) - eval_derivative(spec, order - 1, x - h)) / (2 * h);
      const double ex = eval_derivative(spec, order, x);
      worst = std::max(worst, std::abs(fd - ex) / std::max(1.0, std::abs(ex)));
    }
    r.put("derivative_check_order_" + std::to_string(order), worst);
  }
  double min_convex = std::numeric_limits<double>::infinity();
  for (int i = -99; i <= 99; ++i)
    min_convex = std::min(min_convex, eval_convex_derivative(spec, 2, i / 100.0));
  r.put("min_convex_second_derivative", min_convex);
  r.put("convex_part_at_zero", eval_convex_derivative(spec, 0, 0.0));
  if (spec.is_singular()) {
    const std::vector<double> deltas{0.1, 0.01, 1e-3, 1e-4, 1e-6};
    r.put("blowup_deltas", deltas);
    r.put("blowup_values", singular_blowup_probe(spec, deltas));
  }
}

void run_audit_assumptions(Bundle& b, const RunConfig&, const Problem& problem) {
  StructuredReport r;
  audit_potential(r, "bulk_potential", problem.potentials().bulk);
  audit_potential(r, "surface_potential", problem.potentials().surface);
  r.section("domination");
  const PotentialPair& pots = problem.potentials();
  if (pots.bulk.is_singular() && pots.surface.is_singular()) {
    std::vector<double> sample;
    for (int i = -999; i <= 999; i += 3) sample.push_back(i / 1000.0);
    const DominationAudit a = audit_domination(pots, sample);
    r.put("feasible", a.feasible);
    r.put("M1", a.m1);
    r.put("M2", a.m2);
  } else {
    r.put("applicable", false);
  }
  r.section("problem");
  const auto v = assumption_violations(problem.spec());
  r.put("violations", static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) r.put("violation_" + std::to_string(i), v[i]);
  const CostWeights& w = problem.weights();
  r.put("A6_beta3_equals_beta4", w.beta3 == w.beta4);
  r.put("A7_beta3_beta4_zero", w.beta3 == 0.0 && w.beta4 == 0.0);
  r.put("box_contains_zero", problem.bounds().contains_zero_strictly());
  r.put("initial_max_abs", problem.y0().values().cwiseAbs().maxCoeff());
  b.report("assumptions.txt", r);
}

}  // namespace

ResultBundle run_subcommand(Subcommand cmd, const RunConfig& config, const RunOptions& options) {
  RunConfig cfg = config;
  if (options.seed) cfg.seed = *options.seed;
  const auto start = std::chrono::steady_clock::now();
  const Problem problem(cfg.to_problem_spec(), Validation::assumptions);
  Bundle b(options.out);
  switch (cmd) {
    case Subcommand::solve_state:
      run_solve_state(b, cfg, problem);
      break;
    case Subcommand::optimize:
      run_optimize(b, cfg, problem);
      break;
    case Subcommand::check_gradient:
      run_check_gradient(b, cfg, problem);
      break;
    case Subcommand::check_soc:
      run_check_soc(b, cfg, problem);
      break;
    case Subcommand::sweep_alpha:
      run_sweep_alpha(b, cfg, problem, std::max(1, options.threads));
      break;
    case Subcommand::audit_assumptions:
      run_audit_assumptions(b, cfg, problem);
      break;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return b.finish(cmd, cfg, seconds);
}

}  // namespace acsparse::cli
