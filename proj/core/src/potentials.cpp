#include "acsparse/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "acsparse/errors.hpp"

namespace acsparse {

std::string_view to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::logarithmic:
      return "logarithmic";
    case PotentialKind::regular_as_printed:
      return "regular_as_printed";
    case PotentialKind::quartic:
      return "quartic";
  }
  return "unknown";
}

PotentialKind parse_potential_kind(std::string_view text) {
  if (text == "logarithmic") return PotentialKind::logarithmic;
  if (text == "regular_as_printed") return PotentialKind::regular_as_printed;
  if (text == "quartic") return PotentialKind::quartic;
  throw InvalidArgument("unknown potential kind '" + std::string(text) + "'");
}

bool PotentialSpec::nonconvex() const {
  switch (kind) {
    case PotentialKind::logarithmic:
      return c2 > c1;
    case PotentialKind::quartic:
      return true;
    case PotentialKind::regular_as_printed:
      return false;
  }
  return false;
}

void PotentialSpec::validate() const {
  if (kind == PotentialKind::logarithmic) {
    if (!(c1 > 0.0)) throw InvalidArgument("logarithmic potential: c1 must be positive");
    if (!(c2 > 0.0)) throw InvalidArgument("logarithmic potential: c2 must be positive");
  }
  if (!(safe_margin > 0.0 && safe_margin < 0.5))
    throw InvalidArgument("potential: safe_margin must lie in (0, 0.5)");
}

namespace {

void check_order(int order) {
  if (order < 0 || order > 4)
    throw InvalidOrder("potential derivative order must be in 0..4, got " + std::to_string(order));
}

void check_log_domain(const PotentialSpec& spec, int order, double r) {
  if (order == 0) {
    if (!(std::abs(r) <= 1.0))
      throw DomainError("logarithmic potential is +infinity outside [-1, 1]");
    return;
  }
  if (!(std::abs(r) < 1.0 - spec.safe_margin))
    throw DomainError("logarithmic derivative of order " + std::to_string(order) +
                      " requested at r = " + std::to_string(r));
}

// x ln x with the continuous extension 0 at x = 0.
double xlogx(double x) { return x == 0.0 ? 0.0 : x * std::log(x); }

double log_convex(double c1, int order, double r) {
  const double one_m_r2 = (1.0 - r) * (1.0 + r);
  switch (order) {
    case 0:
      return c1 * (xlogx(1.0 + r) + xlogx(1.0 - r));
    case 1:
      return c1 * (std::log1p(r) - std::log1p(-r));
    case 2:
      return 2.0 * c1 / one_m_r2;
    case 3:
      return 4.0 * c1 * r / (one_m_r2 * one_m_r2);
    default:
      return 4.0 * c1 * (1.0 + 3.0 * r * r) / (one_m_r2 * one_m_r2 * one_m_r2);
  }
}

}  // namespace

double eval_convex_derivative(const PotentialSpec& spec, int order, double r) {
  check_order(order);
  switch (spec.kind) {
    case PotentialKind::logarithmic:
      check_log_domain(spec, order, r);
      return log_convex(spec.c1, order, r);
    case PotentialKind::regular_as_printed: {
      // f1 = r^2 / 4
      constexpr double coeff[] = {0.0, 0.0, 0.5, 0.0, 0.0};
      if (order == 0) return 0.25 * r * r;
      if (order == 1) return 0.5 * r;
      return coeff[order];
    }
    case PotentialKind::quartic:
      // f1 = r^4 / 4
      switch (order) {
        case 0:
          return 0.25 * r * r * r * r;
        case 1:
          return r * r * r;
        case 2:
          return 3.0 * r * r;
        case 3:
          return 6.0 * r;
        default:
          return 6.0;
      }
  }
  return 0.0;
}

double eval_derivative(const PotentialSpec& spec, int order, double r) {
  check_order(order);
  switch (spec.kind) {
    case PotentialKind::logarithmic: {
      check_log_domain(spec, order, r);
      if (order == 0 && std::abs(r) == 1.0) {
        return 2.0 * spec.c1 * std::numbers::ln2 - spec.c2;
      }
      double value = log_convex(spec.c1, order, r);
      if (order == 0) value -= spec.c2 * r * r;
      if (order == 1) value -= 2.0 * spec.c2 * r;
      if (order == 2) value -= 2.0 * spec.c2;
      return value;
    }
    case PotentialKind::regular_as_printed:
      switch (order) {
        case 0:
          return 0.25 * (r - 1.0) * (r - 1.0);
        case 1:
          return 0.5 * (r - 1.0);
        case 2:
          return 0.5;
        default:
          return 0.0;
      }
    case PotentialKind::quartic:
      switch (order) {
        case 0:
          return 0.25 * (r * r - 1.0) * (r * r - 1.0);
        case 1:
          return r * r * r - r;
        case 2:
          return 3.0 * r * r - 1.0;
        case 3:
          return 6.0 * r;
        default:
          return 6.0;
      }
  }
  return 0.0;
}

std::vector<double> singular_blowup_probe(const PotentialSpec& spec, std::span<const double> deltas) {
  if (!spec.is_singular())
    throw InvalidArgument("singular_blowup_probe requires a logarithmic potential");
  std::vector<double> out;
  out.reserve(deltas.size());
  for (double delta : deltas) {
    if (!(delta > 0.0 && delta < 0.5))
      throw InvalidArgument("singular_blowup_probe: delta must lie in (0, 0.5)");
    out.push_back(eval_convex_derivative(spec, 1, 1.0 - delta));
  }
  return out;
}

DominationAudit audit_domination(const PotentialPair& pair, std::span<const double> sample,
                                 const DominationLimits& limits) {
  if (!pair.bulk.is_singular() || !pair.surface.is_singular())
    throw InvalidArgument("audit_domination requires logarithmic bulk and surface potentials");
  if (sample.empty()) throw InvalidArgument("audit_domination: empty sample");

  std::vector<double> b(sample.size());
  std::vector<double> s(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    b[i] = std::abs(eval_convex_derivative(pair.bulk, 1, sample[i]));
    s[i] = std::abs(eval_convex_derivative(pair.surface, 1, sample[i]));
  }

  // Nonnegative least squares for b ~ m1 + m2 s (two unknowns: check the
  // unconstrained optimum, then the two faces).
  const double n = static_cast<double>(sample.size());
  double sb = 0, ss = 0, sbs = 0, sss = 0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    sb += b[i];
    ss += s[i];
    sbs += b[i] * s[i];
    sss += s[i] * s[i];
  }
  double m1 = 0.0;
  double m2 = 0.0;
  const double det = n * sss - ss * ss;
  bool solved = false;
  if (det > 1e-14 * n * sss) {
    m1 = (sss * sb - ss * sbs) / det;
    m2 = (n * sbs - ss * sb) / det;
    solved = m1 >= 0.0 && m2 >= 0.0;
  }
  if (!solved) {
    // Face m1 = 0 versus face m2 = 0; keep the smaller residual.
    const double m2_face = sss > 0.0 ? std::max(0.0, sbs / sss) : 0.0;
    const double m1_face = sb / n;
    double r_a = 0.0, r_b = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      r_a += std::pow(m2_face * s[i] - b[i], 2);
      r_b += std::pow(m1_face - b[i], 2);
    }
    if (r_a <= r_b) {
      m1 = 0.0;
      m2 = m2_face;
    } else {
      m1 = m1_face;
      m2 = 0.0;
    }
  }

  m2 = std::min(m2, limits.max_m2);
  double bmax = 0.0;
  double required = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    bmax = std::max(bmax, b[i]);
    required = std::max(required, b[i] - m2 * s[i]);
  }
  const double slack = 1e-12 * (1.0 + bmax);
  if (required > m1 + slack) m1 = required;

  DominationAudit audit;
  audit.m1 = m1;
  audit.m2 = m2;
  audit.feasible = m2 > 0.0 && m1 <= limits.max_m1;
  return audit;
}

}  // namespace acsparse
