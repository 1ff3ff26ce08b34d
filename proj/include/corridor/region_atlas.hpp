#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "corridor/errors.hpp"
#include "corridor/slow_fast.hpp"

namespace corridor {

// ---------------------------------------------------------------------------
// The (alpha, beta) square splits into eight regions G1..G8 separated by
// eleven curves. Vertical lines sit at alpha = rho_c0 and 1-rho_c0,
// horizontal ones at beta = 1-rho_c1 and rho_c1; three arcs (g12, g17, g78)
// bound the low- and high-density phases, and the whole bottom-left wedge
// below beta = rho*(alpha) belongs to the high-density phase G7.
// ---------------------------------------------------------------------------

enum class Curve { g12, g13, g17, g24, g34, g35, g37, g46, g56, g58, g78 };

inline const char* curve_name(Curve c) {
  switch (c) {
    case Curve::g12: return "gamma12";
    case Curve::g13: return "gamma13";
    case Curve::g17: return "gamma17";
    case Curve::g24: return "gamma24";
    case Curve::g34: return "gamma34";
    case Curve::g35: return "gamma35";
    case Curve::g37: return "gamma37";
    case Curve::g46: return "gamma46";
    case Curve::g56: return "gamma56";
    case Curve::g58: return "gamma58";
    case Curve::g78: return "gamma78";
  }
  return "?";
}

/// True on the curves where the singular solution degenerates into a
/// continuum; the remaining six curves still carry a unique solution.
inline bool curve_is_degenerate(Curve c) {
  return c == Curve::g17 || c == Curve::g13 || c == Curve::g24 || c == Curve::g37 ||
         c == Curve::g58;
}

struct RegionLabel {
  enum class Kind { region, boundary, degenerate_corner, out_of_domain };
  Kind kind = Kind::out_of_domain;
  int region = 0;                ///< 1..8 when kind == region
  Curve curve = Curve::g12;      ///< meaningful when kind == boundary
  /// Signed margins of the comparisons made on the way to the label.
  std::vector<std::pair<std::string, double>> margins;

  bool is_region(int i) const { return kind == Kind::region && region == i; }
  std::string name() const {
    switch (kind) {
      case Kind::region: return "G" + std::to_string(region);
      case Kind::boundary: return curve_name(curve);
      case Kind::degenerate_corner: return "degenerate_corner";
      default: return "out_of_domain";
    }
  }
};

/// Endpoint density of the special forward orbit started at (0, alpha):
/// rho*(alpha) = (1 -+ sqrt(1 - 4 alpha(1-alpha) k0/k1)) / 2, lower sign for
/// alpha below the canard band, upper above it.
inline double rho_star_forward(double alpha, const CanardData& c) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("rho_star_forward: inflow rate must lie in (0,1)");
  const double radicand = 1.0 - 4.0 * alpha * (1.0 - alpha) * c.k0 / c.k1;
  if (alpha < c.rho_c0)
    return 0.5 * (1.0 - std::sqrt(std::max(0.0, radicand)));
  if (alpha > 1.0 - c.rho_c0)
    return 0.5 * (1.0 + std::sqrt(std::max(0.0, radicand)));
  throw UndefinedInsideCanardBand(
      "rho_star_forward: orbit from (0, alpha) ends on the fold for rho_c0 <= alpha <= "
      "1-rho_c0");
}

/// Starting density of the special backward orbit ending at (1, 1-beta):
/// rho_*(beta) = (1 +- sqrt(1 - 4 beta(1-beta) k1/k0)) / 2.
inline double rho_star_backward(double beta, const CanardData& c) {
  if (!(beta > 0.0 && beta < 1.0))
    throw DomainError("rho_star_backward: outflow rate must lie in (0,1)");
  const double radicand = 1.0 - 4.0 * beta * (1.0 - beta) * c.k1 / c.k0;
  if (beta < 1.0 - c.rho_c1)
    return 0.5 * (1.0 + std::sqrt(std::max(0.0, radicand)));
  if (beta > c.rho_c1)
    return 0.5 * (1.0 - std::sqrt(std::max(0.0, radicand)));
  throw UndefinedInsideCanardBand(
      "rho_star_backward: orbit into (1, 1-beta) ends on the fold for 1-rho_c1 <= beta "
      "<= rho_c1");
}

/// Classifies an (alpha, beta) pair into a region, a boundary curve, or the
/// degenerate corner (rho_c0, 1-rho_c1). Comparisons within `tol` of a curve
/// yield the Boundary label.
inline RegionLabel classify(double alpha, double beta, const CanardData& c,
                            double tol = 1e-9) {
  RegionLabel out;
  if (!(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0)) {
    out.kind = RegionLabel::Kind::out_of_domain;
    return out;
  }

  const double rc0 = c.rho_c0;
  const double rc1 = c.rho_c1;
  const double beta_lo = 1.0 - rc1;

  auto region = [&](int i) {
    out.kind = RegionLabel::Kind::region;
    out.region = i;
    return out;
  };
  auto boundary = [&](Curve cv) {
    out.kind = RegionLabel::Kind::boundary;
    out.curve = cv;
    return out;
  };

  const double da0 = alpha - rc0;
  const double da1 = alpha - (1.0 - rc0);
  const double db_lo = beta - beta_lo;
  const double db_hi = beta - rc1;
  out.margins.emplace_back("alpha-rho_c0", da0);
  out.margins.emplace_back("alpha-(1-rho_c0)", da1);
  out.margins.emplace_back("beta-(1-rho_c1)", db_lo);
  out.margins.emplace_back("beta-rho_c1", db_hi);

  if (std::abs(da0) <= tol && std::abs(db_lo) <= tol) {
    out.kind = RegionLabel::Kind::degenerate_corner;
    return out;
  }

  // Bottom strip beta < 1-rho_c1: split by the arcs alpha = 1-rho_*(beta)
  // (g17) and alpha = rho_*(beta) (g78).
  auto bottom_strip = [&]() {
    const double rsb = rho_star_backward(beta, c);
    out.margins.emplace_back("alpha-rho_sub", alpha - rsb);
    out.margins.emplace_back("alpha-(1-rho_sub)", alpha - (1.0 - rsb));
    if (std::abs(alpha - rsb) <= tol) return boundary(Curve::g78);
    if (std::abs(alpha - (1.0 - rsb)) <= tol) return boundary(Curve::g17);
    if (alpha > rsb) return region(8);
    if (alpha > 1.0 - rsb) return region(7);
    return region(1);
  };

  if (da0 < -tol) {
    // Left column: compare beta against rho*(alpha) and its reflection.
    const double rs = rho_star_forward(alpha, c);
    out.margins.emplace_back("beta-rho_star", beta - rs);
    out.margins.emplace_back("beta-(1-rho_star)", beta - (1.0 - rs));
    if (std::abs(beta - rs) <= tol) return boundary(Curve::g17);
    if (std::abs(beta - (1.0 - rs)) <= tol) return boundary(Curve::g12);
    if (beta < rs) return region(7);
    if (beta < 1.0 - rs) return region(1);
    return region(2);
  }
  if (da0 <= tol) {
    // On the alpha = rho_c0 line.
    if (db_lo > tol) return boundary(db_hi <= tol ? Curve::g13 : Curve::g24);
    return bottom_strip();
  }
  if (da1 < -tol) {
    // Middle column.
    if (std::abs(db_lo) <= tol) return boundary(Curve::g37);
    if (db_lo < 0.0) return region(7);
    if (std::abs(db_hi) <= tol) return boundary(Curve::g34);
    return db_hi < 0.0 ? region(3) : region(4);
  }
  if (da1 <= tol) {
    // On the alpha = 1-rho_c0 line.
    if (db_lo > tol) return boundary(db_hi <= tol ? Curve::g35 : Curve::g46);
    if (std::abs(db_lo) <= tol) return boundary(Curve::g58);
    return bottom_strip();
  }
  // Right column.
  if (std::abs(db_hi) <= tol) return boundary(Curve::g56);
  if (db_hi > 0.0) return region(6);
  if (std::abs(db_lo) <= tol) return boundary(Curve::g58);
  if (db_lo > 0.0) return region(5);
  return bottom_strip();
}

struct CurveSamples {
  Curve id;
  std::vector<std::pair<double, double>> points;  ///< (alpha, beta)
};

/// Samples all eleven boundary curves for plotting: straight segments for the
/// eight constant-alpha / constant-beta pieces, parametrized arcs for g12,
/// g17 and g78.
inline std::vector<CurveSamples> boundary_curves(const CanardData& c, int n = 200) {
  if (n < 2) throw DomainError("boundary_curves: need at least 2 samples per curve");
  const double rc0 = c.rho_c0;
  const double rc1 = c.rho_c1;
  const double beta_lo = 1.0 - rc1;
  std::vector<CurveSamples> out;
  out.reserve(11);

  auto vertical = [&](Curve id, double a, double b_from, double b_to, bool open_end) {
    CurveSamples cs{id, {}};
    cs.points.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / (open_end ? n : n - 1);
      cs.points.emplace_back(a, b_from + (b_to - b_from) * t);
    }
    out.push_back(std::move(cs));
  };
  auto horizontal = [&](Curve id, double b, double a_from, double a_to, bool open_end) {
    CurveSamples cs{id, {}};
    cs.points.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / (open_end ? n : n - 1);
      cs.points.emplace_back(a_from + (a_to - a_from) * t, b);
    }
    out.push_back(std::move(cs));
  };

  {  // g12: beta = 1 - rho*(alpha), 0 < alpha <= rho_c0
    CurveSamples cs{Curve::g12, {}};
    for (int i = 1; i <= n; ++i) {
      const double a = rc0 * static_cast<double>(i) / n;
      const double rs = a < rc0 ? rho_star_forward(a, c) : beta_lo;
      cs.points.emplace_back(a, 1.0 - rs);
    }
    out.push_back(std::move(cs));
  }
  vertical(Curve::g13, rc0, beta_lo, rc1, false);
  {  // g17: alpha = 1 - rho_*(beta), 0 < beta <= 1-rho_c1
    CurveSamples cs{Curve::g17, {}};
    for (int i = 1; i <= n; ++i) {
      const double b = beta_lo * static_cast<double>(i) / n;
      const double rs = b < beta_lo ? rho_star_backward(b, c) : 1.0 - rc0;
      cs.points.emplace_back(1.0 - rs, b);
    }
    out.push_back(std::move(cs));
  }
  vertical(Curve::g24, rc0, rc1, 1.0, true);
  horizontal(Curve::g34, rc1, rc0, 1.0 - rc0, false);
  vertical(Curve::g35, 1.0 - rc0, beta_lo, rc1, false);
  horizontal(Curve::g37, beta_lo, rc0, 1.0 - rc0, false);
  vertical(Curve::g46, 1.0 - rc0, rc1, 1.0, true);
  horizontal(Curve::g56, rc1, 1.0 - rc0, 1.0, true);
  horizontal(Curve::g58, beta_lo, 1.0 - rc0, 1.0, true);
  {  // g78: alpha = rho_*(beta), 0 < beta <= 1-rho_c1
    CurveSamples cs{Curve::g78, {}};
    for (int i = 1; i <= n; ++i) {
      const double b = beta_lo * static_cast<double>(i) / n;
      const double rs = b < beta_lo ? rho_star_backward(b, c) : 1.0 - rc0;
      cs.points.emplace_back(rs, b);
    }
    out.push_back(std::move(cs));
  }
  return out;
}

}  // namespace corridor
