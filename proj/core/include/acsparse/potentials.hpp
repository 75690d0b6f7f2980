#pragma once

#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace acsparse {

enum class PotentialKind {
  /// c1((1+r)ln(1+r) + (1-r)ln(1-r)) - c2 r^2, singular derivative at +-1.
  logarithmic,
  /// (1/4)(r-1)^2, the regular potential in its printed form.
  regular_as_printed,
  /// (1/4)(r^2-1)^2, the smooth double well.
  quartic,
};

std::string_view to_string(PotentialKind kind);
PotentialKind parse_potential_kind(std::string_view text);

/// One double-well potential f = f1 + f2 with f1 convex, f1(0) = 0.
struct PotentialSpec {
  PotentialKind kind = PotentialKind::quartic;
  double c1 = 1.0;
  double c2 = 1.0;
  /// Logarithmic derivatives are refused within this distance of +-1.
  double safe_margin = 1e-9;

  bool is_singular() const { return kind == PotentialKind::logarithmic; }
  /// f''(0) < 0 for the logarithmic kind, i.e. c2 > c1.
  bool nonconvex() const;
  void validate() const;
};

/// Bulk potential f and surface potential f_Gamma.
struct PotentialPair {
  PotentialSpec bulk;
  PotentialSpec surface;

  bool any_singular() const { return bulk.is_singular() || surface.is_singular(); }
  void validate() const {
    bulk.validate();
    surface.validate();
  }
};

/// order-th derivative of f (order 0..4).
double eval_derivative(const PotentialSpec& spec, int order, double r);
/// order-th derivative of the convex part f1 (order 0..4).
double eval_convex_derivative(const PotentialSpec& spec, int order, double r);

/// f1'(1 - delta) for each delta; logarithmic kind only.
std::vector<double> singular_blowup_probe(const PotentialSpec& spec, std::span<const double> deltas);

struct DominationLimits {
  double max_m1 = std::numeric_limits<double>::infinity();
  double max_m2 = std::numeric_limits<double>::infinity();
};

struct DominationAudit {
  bool feasible = false;
  double m1 = 0.0;
  double m2 = 0.0;
};

/// Fits |f1'(r)| <= M1 + M2 |f_{Gamma,1}'(r)| over the sample by nonnegative
/// least squares, caps M2 at limits.max_m2 and raises M1 until every sample
/// point satisfies the bound. Both potentials must be logarithmic.
DominationAudit audit_domination(const PotentialPair& pair, std::span<const double> sample,
                                 const DominationLimits& limits = {});

}  // namespace acsparse
