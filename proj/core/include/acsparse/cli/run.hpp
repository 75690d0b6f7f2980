#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "acsparse/cli/config.hpp"

namespace acsparse::cli {

enum class Subcommand {
  solve_state,
  optimize,
  check_gradient,
  check_soc,
  sweep_alpha,
  audit_assumptions,
};

std::string_view to_string(Subcommand s);
Subcommand parse_subcommand(std::string_view name);

struct RunOptions {
  std::filesystem::path out;
  /// Overrides run.seed when set.
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

struct ResultBundle {
  std::filesystem::path dir;
  /// Emitted files relative to dir, manifest excluded.
  std::vector<std::string> files;
  std::filesystem::path manifest;
};

ResultBundle run_subcommand(Subcommand cmd, const RunConfig& config, const RunOptions& options);

/// 0 success, 1 validation error, 2 solver failure.
int exit_code_for(const std::exception& e);

}  // namespace acsparse::cli
