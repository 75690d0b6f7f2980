#include "acsparse/cost.hpp"

#include <string>

#include "acsparse/errors.hpp"

namespace acsparse {

std::string_view to_string(SparsityMode mode) {
  switch (mode) {
    case SparsityMode::none:
      return "none";
    case SparsityMode::full:
      return "full";
    case SparsityMode::time_directional:
      return "time";
  }
  return "none";
}

SparsityMode parse_sparsity_mode(std::string_view text) {
  if (text == "none") return SparsityMode::none;
  if (text == "full") return SparsityMode::full;
  if (text == "time" || text == "time_directional") return SparsityMode::time_directional;
  throw InvalidArgument("unknown sparsity mode '" + std::string(text) + "'");
}

Targets Targets::zeros(const Mesh& mesh, const TimeGrid& grid) {
  Targets t;
  t.y_q.assign(grid.n_t() + 1, BulkField::zeros(mesh));
  t.y_sigma.assign(grid.n_t() + 1, BoundaryField::zeros(mesh));
  t.y_omega_T = BulkField::zeros(mesh);
  t.y_gamma_T = BoundaryField::zeros(mesh);
  return t;
}

Targets Targets::from_trajectory(const Mesh& mesh, const Trajectory& traj) {
  Targets t;
  for (const auto& s : traj.states) {
    t.y_q.push_back(s.bulk());
    t.y_sigma.push_back(s.boundary(mesh));
  }
  t.y_omega_T = traj.states.back().bulk();
  t.y_gamma_T = traj.states.back().boundary(mesh);
  return t;
}

void Targets::check(const Mesh& mesh, const TimeGrid& grid) const {
  const auto nodes = static_cast<std::size_t>(grid.n_t() + 1);
  if (y_q.size() != nodes || y_sigma.size() != nodes)
    throw ShapeMismatch("targets y_Q and y_Sigma need n_t + 1 time nodes");
  for (const auto& f : y_q) check_conforms(f, mesh);
  for (const auto& g : y_sigma) check_conforms(g, mesh);
  check_conforms(y_omega_T, mesh);
  check_conforms(y_gamma_T, mesh);
  for (const auto& f : y_q)
    if (!f.values.allFinite()) throw InvalidArgument("target y_Q is not finite");
  for (const auto& g : y_sigma)
    if (!g.values.allFinite()) throw InvalidArgument("target y_Sigma is not finite");
  if (!y_omega_T.values.allFinite() || !y_gamma_T.values.allFinite())
    throw InvalidArgument("terminal target is not finite");
}

}  // namespace acsparse
