#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "acsparse/errors.hpp"
#include "acsparse/problem.hpp"

namespace acsparse::cli {

/// Parse or validation failure; line() is 0 for whole-config checks.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

/// offset + amplitude cos(2 pi mode x / C) + y_slope (z / H - 1/2) + time_slope t
struct FieldGenerator {
  double offset = 0.0;
  double amplitude = 0.0;
  int mode = 1;
  double y_slope = 0.0;
  double time_slope = 0.0;
  /// False while no key of the section was given.
  bool explicit_set = false;

  double value(const Mesh& mesh, int row, int col, double t) const;
  BulkField bulk(const Mesh& mesh, double t) const;
  BoundaryField boundary(const Mesh& mesh, double t) const;
};

struct RunConfig {
  RunConfig();

  int n_x = 16;
  int n_y = 6;
  double circumference = 1.0;
  double height = 1.0;
  double final_time = 0.5;
  int n_t = 32;

  PotentialPair potentials;
  FieldGenerator initial;
  /// y_Sigma follows the trace of y_Q and y_Gamma,T the trace of y_Omega,T
  /// unless their sections are given.
  FieldGenerator target_q;
  FieldGenerator target_sigma;
  FieldGenerator target_omega_T;
  FieldGenerator target_gamma_T;
  FieldGenerator control_bulk;
  FieldGenerator control_boundary;

  CostWeights weights;
  BoxBounds bounds;
  SparsityMode mode = SparsityMode::full;
  SolverOptions solver;
  OptimizerOptions optimizer;
  /// "zero" or "random" (seeded uniform in the box).
  std::string optimizer_init = "zero";

  std::uint64_t seed = 0;

  int gradient_directions = 10;
  std::vector<double> gradient_steps{1e-3, 1e-4, 1e-5};
  double second_difference_step = 1e-3;

  int soc_samples = 16;
  double soc_oracle_step = 1e-3;
  bool soc_simple_cone = true;
  std::vector<double> growth_radii{1e-3, 1e-2};
  int growth_directions = 8;
  std::vector<double> taylor_steps{0.3, 0.1, 0.03, 0.01};
  std::vector<double> continuity_scales{1e-1, 3e-2, 1e-2, 3e-3};

  std::vector<double> sweep_alphas;
  std::vector<double> sweep_alpha_gammas;
  bool sweep_estimate_threshold = false;
  int threshold_samples = 4;

  /// Canonical key = value echo of every setting, in documented key order.
  std::vector<std::pair<std::string, std::string>> echo() const;

  ProblemSpec to_problem_spec() const;
  ControlPair control(const Mesh& mesh, const TimeGrid& grid) const;
};

/// Parses `section.key = value` lines ('#' starts a comment) and validates
/// the resulting problem, naming the violated assumption on failure.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Documented keys in canonical order.
const std::vector<std::string>& config_keys();

}  // namespace acsparse::cli
