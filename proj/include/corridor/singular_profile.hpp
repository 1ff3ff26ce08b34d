#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "corridor/errors.hpp"
#include "corridor/region_atlas.hpp"
#include "corridor/slow_fast.hpp"
#include "corridor/width_profile.hpp"

namespace corridor {

// ---------------------------------------------------------------------------
// Zero-diffusion profiles: an optional vertical layer at each end glued to one
// slow segment. Eight types, indexed by the region of (alpha, beta):
//   1/2   no entry layer, slow on the repelling branch, exit layer up/down
//   3..6  entry layer up/down, slow = canard through the saddle, exit up/down
//   7/8   entry layer up/down, slow on the attracting branch, no exit layer
// ---------------------------------------------------------------------------

enum class LayerDirection { up, down };

/// Vertical jump of the layer problem at a domain end.
struct LayerJump {
  double x = 0.0;
  double from = 0.0;  ///< boundary-side density
  double to = 0.0;    ///< manifold-side density
  LayerDirection direction = LayerDirection::up;

  double height() const { return std::abs(to - from); }
};

struct SingularOrbit {
  int type_index = 0;
  double alpha = 0.0, beta = 0.0;
  std::optional<LayerJump> entry_layer;  ///< at x = 0, runs from rho0 to the slow start
  SlowSegment slow;
  std::optional<LayerJump> exit_layer;   ///< at x = 1, runs from the slow end to rho1
  double flux = 0.0;                     ///< J = k(x) j(x), constant along the orbit
  double rho0 = 0.0, rho1 = 0.0;         ///< boundary densities
};

/// Two-parameter family living on a degenerate boundary curve: jumps from the
/// lower reduced solution to the upper one are admissible anywhere inside the
/// jump window.
struct DegenerateFamily {
  Curve curve = Curve::g17;
  SlowSegment lower;   ///< pre-jump reduced solution (repelling within the window)
  SlowSegment upper;   ///< post-jump reduced solution
  double jump_lo = 0.0, jump_hi = 1.0;
  double rho0 = 0.0, rho1 = 0.0;
  double flux = 0.0;
};

/// Raised where the singular solution is not unique: the degenerate curves
/// carry a family (attached here); the triple corner carries none.
class DegenerateParameters : public std::runtime_error {
 public:
  explicit DegenerateParameters(const std::string& what,
                                std::optional<DegenerateFamily> fam = std::nullopt)
      : std::runtime_error(what), family(std::move(fam)) {}

  std::optional<DegenerateFamily> family;
};

namespace detail {

inline std::optional<LayerJump> make_layer(double x, double from, double to) {
  if (std::abs(to - from) < 1e-10) return std::nullopt;  // collapsed on a boundary curve
  return LayerJump{x, from, to, to > from ? LayerDirection::up : LayerDirection::down};
}

/// Slow segment running along the canard graphs: the first flag picks the
/// branch before xi*, the second after. Used for the degenerate families,
/// where the continuation through the saddle is deliberately not unique.
inline SlowSegment canard_path(const WidthProfile& profile, const CanardData& c,
                               bool upper_first, bool upper_second, int n_samples) {
  SlowSegment seg;
  seg.level = c.canard_level();
  seg.canard_crossing = upper_first != upper_second;
  const auto mesh = detail::orbit_mesh(0.0, 1.0, n_samples, true, c.xi_star);
  bool star_done = false;
  auto push = [&](double x, double r) {
    if (!seg.xi.empty() && seg.xi.back() == x) return;
    seg.xi.push_back(x);
    seg.rho.push_back(r);
  };
  for (double x : mesh) {
    if (!star_done && x >= c.xi_star) {
      push(c.xi_star, 0.5);
      star_done = true;
      if (x == c.xi_star) continue;
    }
    const bool upper = x < c.xi_star ? upper_first : upper_second;
    push(x, upper ? c.rho_plus(profile, x) : c.rho_minus(profile, x));
  }
  seg.termination = Termination::reached_target;
  return seg;
}

inline DegenerateFamily family_g17(double alpha, double beta, const WidthProfile& profile,
                                   const CanardData& c, int n_samples) {
  DegenerateFamily fam;
  fam.curve = Curve::g17;
  fam.lower = reduced_orbit(profile, {0.0, alpha}, Direction::forward, c,
                            OrbitOptions{n_samples, false, false});
  fam.upper = reduced_orbit(profile, {0.0, 1.0 - alpha}, Direction::forward, c,
                            OrbitOptions{n_samples, false, false});
  fam.jump_lo = 0.0;
  fam.jump_hi = 1.0;
  fam.rho0 = alpha;
  fam.rho1 = 1.0 - beta;
  fam.flux = c.k0 * alpha * (1.0 - alpha);
  return fam;
}

inline DegenerateFamily family_low_canard(Curve curve, double beta,
                                          const WidthProfile& profile, const CanardData& c,
                                          int n_samples) {
  // alpha = rho_c0: jumps allowed up to the saddle. The extremes are the
  // all-lower path and the canard (upper then lower).
  DegenerateFamily fam;
  fam.curve = curve;
  fam.lower = canard_path(profile, c, false, false, n_samples);
  fam.upper = canard_path(profile, c, true, false, n_samples);
  fam.jump_lo = 0.0;
  fam.jump_hi = c.xi_star;
  fam.rho0 = c.rho_c0;
  fam.rho1 = c.canard_level() / (beta * c.k1);
  fam.flux = c.canard_level();
  return fam;
}

inline DegenerateFamily family_high_canard(Curve curve, double alpha,
                                           const WidthProfile& profile, const CanardData& c,
                                           int n_samples) {
  // beta = 1 - rho_c1: jumps allowed from the saddle on. The extremes are the
  // canard and the all-upper path.
  DegenerateFamily fam;
  fam.curve = curve;
  fam.lower = canard_path(profile, c, true, false, n_samples);
  fam.upper = canard_path(profile, c, true, true, n_samples);
  fam.jump_lo = c.xi_star;
  fam.jump_hi = 1.0;
  fam.rho0 = 1.0 - c.canard_level() / (alpha * c.k0);
  fam.rho1 = c.rho_c1;
  fam.flux = c.canard_level();
  return fam;
}

}  // namespace detail

/// Assembles the unique singular orbit for (alpha, beta) in an open region or
/// on one of the six unique-solution boundary curves. On the five degenerate
/// curves it throws DegenerateParameters carrying the solution family; at the
/// triple corner the family is absent.
inline SingularOrbit build_singular(double alpha, double beta, const WidthProfile& profile,
                                    const CanardData& canard, const RegionLabel& label,
                                    int n_samples = 2001) {
  if (label.kind == RegionLabel::Kind::out_of_domain)
    throw OutOfScope("build_singular: (alpha, beta) outside (0,1)^2");
  if (label.kind == RegionLabel::Kind::degenerate_corner)
    throw DegenerateParameters(
        "build_singular: triple-degenerate corner (rho_c0, 1-rho_c1)");

  if (label.kind == RegionLabel::Kind::boundary && curve_is_degenerate(label.curve)) {
    switch (label.curve) {
      case Curve::g17:
        throw DegenerateParameters(
            "build_singular: continuum of singular solutions on gamma17",
            detail::family_g17(alpha, beta, profile, canard, n_samples));
      case Curve::g13:
      case Curve::g24:
        throw DegenerateParameters(
            "build_singular: continuum of singular solutions on gamma13/gamma24",
            detail::family_low_canard(label.curve, beta, profile, canard, n_samples));
      default:
        throw DegenerateParameters(
            "build_singular: continuum of singular solutions on gamma37/gamma58",
            detail::family_high_canard(label.curve, alpha, profile, canard, n_samples));
    }
  }

  // Map the label onto the three construction cases.
  int case_id = 0;
  if (label.kind == RegionLabel::Kind::region) {
    case_id = label.region <= 2 ? 1 : (label.region <= 6 ? 2 : 3);
  } else {
    switch (label.curve) {
      case Curve::g12: case_id = 1; break;
      case Curve::g78: case_id = 3; break;
      default: case_id = 2; break;  // g34, g35, g46, g56
    }
  }

  SingularOrbit orbit;
  orbit.alpha = alpha;
  orbit.beta = beta;
  const OrbitOptions opts{n_samples, false, false};

  if (case_id == 1) {
    // Low-density phase: start on the repelling branch at rho0 = alpha.
    orbit.rho0 = alpha;
    orbit.slow = reduced_orbit(profile, {0.0, alpha}, Direction::forward, canard, opts);
    orbit.flux = canard.k0 * alpha * (1.0 - alpha);
    orbit.rho1 = orbit.flux / (beta * canard.k1);
    orbit.exit_layer = detail::make_layer(1.0, orbit.slow.rho.back(), orbit.rho1);
    orbit.type_index =
        orbit.exit_layer && orbit.exit_layer->direction == LayerDirection::down ? 2 : 1;
  } else if (case_id == 2) {
    // Transitional phase: the slow part is the canard, both ends carry layers.
    const double hc = canard.canard_level();
    orbit.rho0 = 1.0 - hc / (alpha * canard.k0);
    orbit.rho1 = hc / (beta * canard.k1);
    orbit.slow = reduced_orbit(profile, {0.0, 1.0 - canard.rho_c0}, Direction::forward,
                               canard, opts);
    orbit.flux = hc;
    orbit.entry_layer = detail::make_layer(0.0, orbit.rho0, orbit.slow.rho.front());
    orbit.exit_layer = detail::make_layer(1.0, orbit.slow.rho.back(), orbit.rho1);
    const bool entry_down =
        orbit.entry_layer && orbit.entry_layer->direction == LayerDirection::down;
    const bool exit_down =
        orbit.exit_layer && orbit.exit_layer->direction == LayerDirection::down;
    orbit.type_index = 3 + (entry_down ? 2 : 0) + (exit_down ? 1 : 0);
  } else {
    // High-density phase: slow part on the attracting branch into rho1 = 1-beta.
    const double start = rho_star_backward(beta, canard);
    orbit.rho1 = 1.0 - beta;
    orbit.flux = canard.k1 * beta * (1.0 - beta);
    orbit.rho0 = 1.0 - orbit.flux / (alpha * canard.k0);
    orbit.slow = reduced_orbit(profile, {0.0, start}, Direction::forward, canard, opts);
    orbit.entry_layer = detail::make_layer(0.0, orbit.rho0, orbit.slow.rho.front());
    orbit.type_index =
        orbit.entry_layer && orbit.entry_layer->direction == LayerDirection::down ? 8 : 7;
  }
  return orbit;
}

/// Singular flux without building the orbit: k(0) alpha (1-alpha) in the low
/// phase, k(xi*)/4 through the canard, k(1) beta (1-beta) in the high phase.
inline double flux_singular(double alpha, double beta, const CanardData& canard,
                            const RegionLabel& label) {
  if (label.kind == RegionLabel::Kind::out_of_domain)
    throw OutOfScope("flux_singular: (alpha, beta) outside (0,1)^2");
  if (label.kind == RegionLabel::Kind::degenerate_corner)
    throw DegenerateParameters("flux_singular: degenerate corner");
  if (label.kind == RegionLabel::Kind::boundary && curve_is_degenerate(label.curve))
    throw DegenerateParameters(std::string("flux_singular: degenerate curve ") +
                               curve_name(label.curve));
  if (label.kind == RegionLabel::Kind::region) {
    if (label.region <= 2) return canard.k0 * alpha * (1.0 - alpha);
    if (label.region <= 6) return canard.canard_level();
    return canard.k1 * beta * (1.0 - beta);
  }
  switch (label.curve) {
    case Curve::g12: return canard.k0 * alpha * (1.0 - alpha);
    case Curve::g78: return canard.k1 * beta * (1.0 - beta);
    default: return canard.canard_level();  // g34, g35, g46, g56
  }
}

/// Renders the orbit as n points over [0,1]; zero-width layers appear as
/// duplicated x with both densities.
inline std::vector<std::pair<double, double>> sample_profile(const SingularOrbit& orbit,
                                                             int n) {
  if (n < 4) throw DomainError("sample_profile: need at least 4 points");
  const int extra = (orbit.entry_layer ? 1 : 0) + (orbit.exit_layer ? 1 : 0);
  const int n_slow = n - extra;

  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(n));
  if (orbit.entry_layer) out.emplace_back(0.0, orbit.entry_layer->from);

  // Resample the slow segment by linear interpolation on its stored samples,
  // keeping the saddle sample exact if the orbit crosses it.
  const auto& xs = orbit.slow.xi;
  const auto& rs = orbit.slow.rho;
  std::size_t seg_idx = 0;
  auto slow_at = [&](double x) {
    while (seg_idx + 2 < xs.size() && xs[seg_idx + 1] < x) ++seg_idx;
    const double x0 = xs[seg_idx], x1 = xs[seg_idx + 1];
    const double t = x1 > x0 ? (x - x0) / (x1 - x0) : 0.0;
    return rs[seg_idx] + t * (rs[seg_idx + 1] - rs[seg_idx]);
  };
  double star = orbit.slow.canard_crossing ? 0.0 : -1.0;
  if (orbit.slow.canard_crossing) {
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (rs[i] == 0.5) star = xs[i];
  }
  bool star_emitted = false;
  for (int i = 0; i < n_slow; ++i) {
    double x = static_cast<double>(i) / (n_slow - 1);
    if (star > 0.0 && !star_emitted && x >= star) {
      if (x > star) out.emplace_back(star, 0.5);
      star_emitted = true;
    }
    if (star > 0.0 && x == star) {
      out.emplace_back(x, 0.5);
      continue;
    }
    out.emplace_back(x, slow_at(x));
  }
  if (orbit.exit_layer) out.emplace_back(1.0, orbit.exit_layer->to);
  return out;
}

}  // namespace corridor
