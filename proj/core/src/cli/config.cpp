#include "acsparse/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "acsparse/cli/serialize.hpp"

namespace acsparse::cli {

ConfigError::ConfigError(int line, const std::string& message)
    : InvalidArgument(line > 0 ? "config line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

double FieldGenerator::value(const Mesh& mesh, int row, int col, double t) const {
  return offset +
         amplitude * std::cos(2.0 * std::numbers::pi * mode * mesh.x(col) / mesh.circumference()) +
         y_slope * (mesh.z(row) / mesh.height() - 0.5) + time_slope * t;
}

BulkField FieldGenerator::bulk(const Mesh& mesh, double t) const {
  BulkField f = BulkField::zeros(mesh);
  for (int row = 0; row < mesh.rows(); ++row)
    for (int col = 0; col < mesh.n_x(); ++col) f.at(mesh, row, col) = value(mesh, row, col, t);
  return f;
}

BoundaryField FieldGenerator::boundary(const Mesh& mesh, double t) const {
  BoundaryField g = BoundaryField::zeros(mesh);
  for (int ring = 0; ring < 2; ++ring)
    for (int col = 0; col < mesh.n_x(); ++col)
      g.at(mesh, ring, col) = value(mesh, mesh.ring_row(ring), col, t);
  return g;
}

RunConfig::RunConfig() {
  PotentialSpec log;
  log.kind = PotentialKind::logarithmic;
  log.c1 = 1.0;
  log.c2 = 1.5;
  potentials = {log, log};
  initial.amplitude = 0.3;
  initial.y_slope = 0.2;
  target_q.offset = 0.4;
  target_q.amplitude = 0.4;
  target_q.mode = 1;
  target_q.y_slope = -0.3;
  target_omega_T = target_q;
  weights.beta1 = 1.0;
  weights.beta2 = 1.0;
  weights.beta3 = 0.0;
  weights.beta4 = 0.0;
  weights.nu = 1e-2;
  weights.nu_gamma = 1e-2;
  weights.alpha = 2e-3;
  weights.alpha_gamma = 2e-3;
}

namespace {

struct Key {
  std::string name;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_real(std::string_view s) {
  double v = 0.0;
  std::string t = trim(s);
  if (!t.empty() && t.front() == '+') t.erase(0, 1);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw InvalidArgument("expected a real number, got '" + std::string(s) + "'");
  if (!std::isfinite(v)) throw InvalidArgument("value must be finite");
  return v;
}

long long to_integer(std::string_view s) {
  long long v = 0;
  const std::string t = trim(s);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw InvalidArgument("expected an integer, got '" + std::string(s) + "'");
  return v;
}

int to_int(std::string_view s) {
  const long long v = to_integer(s);
  if (v < -1000000000LL || v > 1000000000LL) throw InvalidArgument("integer out of range");
  return static_cast<int>(v);
}

bool to_bool(std::string_view s) {
  const std::string t = trim(s);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw InvalidArgument("expected true or false, got '" + t + "'");
}

std::vector<double> to_list(std::string_view s) {
  std::vector<double> out;
  const std::string t = trim(s);
  if (t.empty()) return out;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_real(item));
  return out;
}

std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_real(v[i]);
  }
  return s;
}

Key real(std::string name, std::function<double&(RunConfig&)> ref) {
  return {std::move(name), [ref](RunConfig& c, std::string_view v) { ref(c) = to_real(v); },
          [ref](const RunConfig& c) { return format_real(ref(const_cast<RunConfig&>(c))); }};
}

Key integer(std::string name, std::function<int&(RunConfig&)> ref) {
  return {std::move(name), [ref](RunConfig& c, std::string_view v) { ref(c) = to_int(v); },
          [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }};
}

Key boolean(std::string name, std::function<bool&(RunConfig&)> ref) {
  return {std::move(name), [ref](RunConfig& c, std::string_view v) { ref(c) = to_bool(v); },
          [ref](const RunConfig& c) {
            return std::string(ref(const_cast<RunConfig&>(c)) ? "true" : "false");
          }};
}

Key list(std::string name, std::function<std::vector<double>&(RunConfig&)> ref) {
  return {std::move(name), [ref](RunConfig& c, std::string_view v) { ref(c) = to_list(v); },
          [ref](const RunConfig& c) { return list_text(ref(const_cast<RunConfig&>(c))); }};
}

void add_potential(std::vector<Key>& keys, const std::string& section, bool surface) {
  auto spec = [surface](RunConfig& c) -> PotentialSpec& {
    return surface ? c.potentials.surface : c.potentials.bulk;
  };
  keys.push_back({section + ".kind",
                  [spec](RunConfig& c, std::string_view v) {
                    spec(c).kind = parse_potential_kind(trim(v));
                  },
                  [spec](const RunConfig& c) {
                    return std::string(to_string(spec(const_cast<RunConfig&>(c)).kind));
                  }});
  keys.push_back(real(section + ".c1", [spec](RunConfig& c) -> double& { return spec(c).c1; }));
  keys.push_back(real(section + ".c2", [spec](RunConfig& c) -> double& { return spec(c).c2; }));
  keys.push_back(real(section + ".safe_margin",
                      [spec](RunConfig& c) -> double& { return spec(c).safe_margin; }));
}

void add_generator(std::vector<Key>& keys, const std::string& section,
                   FieldGenerator RunConfig::*member) {
  // Any key of the section marks the generator as given.
  auto gen = [member](RunConfig& c) -> FieldGenerator& {
    (c.*member).explicit_set = true;
    return c.*member;
  };
  keys.push_back(real(section + ".offset", [gen](RunConfig& c) -> double& { return gen(c).offset; }));
  keys.push_back(
      real(section + ".amplitude", [gen](RunConfig& c) -> double& { return gen(c).amplitude; }));
  keys.push_back(integer(section + ".mode", [gen](RunConfig& c) -> int& { return gen(c).mode; }));
  keys.push_back(
      real(section + ".y_slope", [gen](RunConfig& c) -> double& { return gen(c).y_slope; }));
  keys.push_back(
      real(section + ".time_slope", [gen](RunConfig& c) -> double& { return gen(c).time_slope; }));
}

std::vector<Key> build_keys() {
  std::vector<Key> k;
  k.push_back(integer("mesh.n_x", [](RunConfig& c) -> int& { return c.n_x; }));
  k.push_back(integer("mesh.n_y", [](RunConfig& c) -> int& { return c.n_y; }));
  k.push_back(real("mesh.circumference", [](RunConfig& c) -> double& { return c.circumference; }));
  k.push_back(real("mesh.height", [](RunConfig& c) -> double& { return c.height; }));
  k.push_back(real("time.final", [](RunConfig& c) -> double& { return c.final_time; }));
  k.push_back(integer("time.n_t", [](RunConfig& c) -> int& { return c.n_t; }));
  add_potential(k, "bulk_potential", false);
  add_potential(k, "surface_potential", true);
  add_generator(k, "initial", &RunConfig::initial);
  add_generator(k, "target_q", &RunConfig::target_q);
  add_generator(k, "target_sigma", &RunConfig::target_sigma);
  add_generator(k, "target_omega_T", &RunConfig::target_omega_T);
  add_generator(k, "target_gamma_T", &RunConfig::target_gamma_T);
  add_generator(k, "control_bulk", &RunConfig::control_bulk);
  add_generator(k, "control_boundary", &RunConfig::control_boundary);
  k.push_back(real("weights.beta1", [](RunConfig& c) -> double& { return c.weights.beta1; }));
  k.push_back(real("weights.beta2", [](RunConfig& c) -> double& { return c.weights.beta2; }));
  k.push_back(real("weights.beta3", [](RunConfig& c) -> double& { return c.weights.beta3; }));
  k.push_back(real("weights.beta4", [](RunConfig& c) -> double& { return c.weights.beta4; }));
  k.push_back(real("weights.nu", [](RunConfig& c) -> double& { return c.weights.nu; }));
  k.push_back(real("weights.nu_gamma", [](RunConfig& c) -> double& { return c.weights.nu_gamma; }));
  k.push_back(real("weights.alpha", [](RunConfig& c) -> double& { return c.weights.alpha; }));
  k.push_back(
      real("weights.alpha_gamma", [](RunConfig& c) -> double& { return c.weights.alpha_gamma; }));
  k.push_back(real("bounds.rho_min", [](RunConfig& c) -> double& { return c.bounds.rho_min; }));
  k.push_back(real("bounds.rho_max", [](RunConfig& c) -> double& { return c.bounds.rho_max; }));
  k.push_back(
      real("bounds.rho_gamma_min", [](RunConfig& c) -> double& { return c.bounds.rho_gamma_min; }));
  k.push_back(
      real("bounds.rho_gamma_max", [](RunConfig& c) -> double& { return c.bounds.rho_gamma_max; }));
  k.push_back({"sparsity.mode",
               [](RunConfig& c, std::string_view v) { c.mode = parse_sparsity_mode(trim(v)); },
               [](const RunConfig& c) { return std::string(to_string(c.mode)); }});
  k.push_back(real("solver.newton_tol", [](RunConfig& c) -> double& { return c.solver.newton_tol; }));
  k.push_back(
      real("solver.newton_guard", [](RunConfig& c) -> double& { return c.solver.newton_guard; }));
  k.push_back(integer("solver.max_newton_iterations",
                      [](RunConfig& c) -> int& { return c.solver.max_newton_iterations; }));
  k.push_back(
      integer("solver.max_halvings", [](RunConfig& c) -> int& { return c.solver.max_halvings; }));
  k.push_back(real("solver.lin_tol", [](RunConfig& c) -> double& { return c.solver.lin_tol; }));
  k.push_back(real("optimizer.opt_tol", [](RunConfig& c) -> double& { return c.optimizer.opt_tol; }));
  k.push_back(
      integer("optimizer.max_iters", [](RunConfig& c) -> int& { return c.optimizer.max_iters; }));
  k.push_back(
      real("optimizer.backtrack", [](RunConfig& c) -> double& { return c.optimizer.backtrack; }));
  k.push_back(real("optimizer.initial_step",
                   [](RunConfig& c) -> double& { return c.optimizer.initial_step; }));
  k.push_back({"optimizer.init",
               [](RunConfig& c, std::string_view v) {
                 const std::string t = trim(v);
                 if (t != "zero" && t != "random")
                   throw InvalidArgument("optimizer.init must be zero or random");
                 c.optimizer_init = t;
               },
               [](const RunConfig& c) { return c.optimizer_init; }});
  k.push_back({"run.seed",
               [](RunConfig& c, std::string_view v) {
                 const long long s = to_integer(v);
                 if (s < 0) throw InvalidArgument("seed must be nonnegative");
                 c.seed = static_cast<std::uint64_t>(s);
               },
               [](const RunConfig& c) { return std::to_string(c.seed); }});
  k.push_back(integer("gradient.directions",
                      [](RunConfig& c) -> int& { return c.gradient_directions; }));
  k.push_back(list("gradient.steps", [](RunConfig& c) -> std::vector<double>& {
    return c.gradient_steps;
  }));
  k.push_back(real("gradient.second_difference_step",
                   [](RunConfig& c) -> double& { return c.second_difference_step; }));
  k.push_back(integer("soc.samples", [](RunConfig& c) -> int& { return c.soc_samples; }));
  k.push_back(real("soc.oracle_step", [](RunConfig& c) -> double& { return c.soc_oracle_step; }));
  k.push_back(boolean("soc.simple_cone", [](RunConfig& c) -> bool& { return c.soc_simple_cone; }));
  k.push_back(list("soc.growth_radii", [](RunConfig& c) -> std::vector<double>& {
    return c.growth_radii;
  }));
  k.push_back(
      integer("soc.growth_directions", [](RunConfig& c) -> int& { return c.growth_directions; }));
  k.push_back(list("soc.taylor_steps", [](RunConfig& c) -> std::vector<double>& {
    return c.taylor_steps;
  }));
  k.push_back(list("soc.continuity_scales", [](RunConfig& c) -> std::vector<double>& {
    return c.continuity_scales;
  }));
  k.push_back(list("sweep.alphas", [](RunConfig& c) -> std::vector<double>& {
    return c.sweep_alphas;
  }));
  k.push_back(list("sweep.alpha_gammas", [](RunConfig& c) -> std::vector<double>& {
    return c.sweep_alpha_gammas;
  }));
  k.push_back(boolean("sweep.estimate_threshold",
                      [](RunConfig& c) -> bool& { return c.sweep_estimate_threshold; }));
  k.push_back(
      integer("sweep.threshold_samples", [](RunConfig& c) -> int& { return c.threshold_samples; }));
  return k;
}

const std::vector<Key>& keys() {
  static const std::vector<Key> k = build_keys();
  return k;
}

void check_ranges(const RunConfig& c) {
  if (c.gradient_directions < 1) throw ConfigError(0, "gradient.directions must be >= 1");
  for (double s : c.gradient_steps)
    if (!(s > 0.0)) throw ConfigError(0, "gradient.steps must be positive");
  if (!(c.second_difference_step > 0.0))
    throw ConfigError(0, "gradient.second_difference_step must be positive");
  if (c.soc_samples < 1) throw ConfigError(0, "soc.samples must be >= 1");
  if (c.growth_directions < 1) throw ConfigError(0, "soc.growth_directions must be >= 1");
  for (double s : c.taylor_steps)
    if (!(s > 0.0)) throw ConfigError(0, "soc.taylor_steps must be positive");
  for (double s : c.growth_radii)
    if (!(s > 0.0)) throw ConfigError(0, "soc.growth_radii must be positive");
  for (double s : c.continuity_scales)
    if (!(s >= 0.0)) throw ConfigError(0, "soc.continuity_scales must be nonnegative");
  for (double a : c.sweep_alphas)
    if (!(a > 0.0)) throw ConfigError(0, "sweep.alphas must be positive");
  for (double a : c.sweep_alpha_gammas)
    if (!(a > 0.0)) throw ConfigError(0, "sweep.alpha_gammas must be positive");
  if (!c.sweep_alpha_gammas.empty() && c.sweep_alpha_gammas.size() != c.sweep_alphas.size())
    throw ConfigError(0, "sweep.alpha_gammas must match sweep.alphas in length");
  if (c.threshold_samples < 0) throw ConfigError(0, "sweep.threshold_samples must be >= 0");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& k : keys()) n.push_back(k.name);
    return n;
  }();
  return names;
}

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : keys()) {
    RunConfig copy = *this;
    out.emplace_back(k.name, k.get(copy));
  }
  return out;
}

ProblemSpec RunConfig::to_problem_spec() const {
  ProblemSpec s(build_mesh(n_x, n_y, circumference, height), TimeGrid(final_time, n_t));
  s.potentials = potentials;
  s.y0 = initial.bulk(s.mesh, 0.0);
  for (int n = 0; n <= n_t; ++n) {
    const double t = s.grid.time(n);
    s.targets.y_q[n] = target_q.bulk(s.mesh, t);
    s.targets.y_sigma[n] = target_sigma.explicit_set ? target_sigma.boundary(s.mesh, t)
                                                     : target_q.boundary(s.mesh, t);
  }
  const double T = s.grid.final_time();
  s.targets.y_omega_T = target_omega_T.bulk(s.mesh, T);
  s.targets.y_gamma_T = target_gamma_T.explicit_set ? target_gamma_T.boundary(s.mesh, T)
                                                    : target_omega_T.boundary(s.mesh, T);
  s.weights = weights;
  s.bounds = bounds;
  s.mode = mode;
  s.solver = solver;
  s.optimizer = optimizer;
  s.seed = seed;
  return s;
}

ControlPair RunConfig::control(const Mesh& mesh, const TimeGrid& grid) const {
  ControlPair u = ControlPair::zeros(mesh, grid);
  for (int j = 0; j < grid.n_t(); ++j) {
    const double t = grid.time(j + 1);
    u.bulk[j] = control_bulk.bulk(mesh, t);
    u.boundary[j] = control_boundary.boundary(mesh, t);
  }
  return u;
}

RunConfig parse_config(std::string_view text) {
  std::map<std::string, const Key*> index;
  for (const auto& k : keys()) index[k.name] = &k;
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "expected 'section.key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    auto it = index.find(key);
    if (it == index.end()) throw ConfigError(line_no, "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(line_no, "duplicate key '" + key + "'");
    try {
      it->second->set(cfg, value);
    } catch (const InvalidArgument& e) {
      throw ConfigError(line_no, key + ": " + e.what());
    }
  }
  check_ranges(cfg);
  try {
    Problem p(cfg.to_problem_spec(), Validation::assumptions);
    (void)p;
  } catch (const InvalidArgument& e) {
    throw ConfigError(0, e.what());
  }
  if (cfg.sweep_estimate_threshold && cfg.mode == SparsityMode::full &&
      (cfg.weights.beta3 != 0.0 || cfg.weights.beta4 != 0.0))
    throw ConfigError(0, "A7: full-sparsity threshold estimation needs beta3 = beta4 = 0");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(0, "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace acsparse::cli
