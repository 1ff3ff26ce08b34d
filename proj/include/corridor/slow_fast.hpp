#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "corridor/errors.hpp"
#include "corridor/width_profile.hpp"

namespace corridor {

// ---------------------------------------------------------------------------
// Critical manifold j = rho(1-rho): attracting sheet above the fold rho = 1/2,
// repelling sheet below, meeting on the fold line j = 1/4.
// ---------------------------------------------------------------------------

enum class Branch { attracting, repelling, fold };

inline Branch branch_of(double rho, double tol = 1e-12) {
  if (std::abs(rho - 0.5) <= tol) return Branch::fold;
  return rho > 0.5 ? Branch::attracting : Branch::repelling;
}

inline const char* branch_name(Branch b) {
  switch (b) {
    case Branch::attracting: return "attracting";
    case Branch::repelling: return "repelling";
    default: return "fold";
  }
}

struct ManifoldPoint {
  double j = 0.0;
  double xi = 0.0;
  double rho = 0.0;
  Branch branch = Branch::fold;
};

/// Builds a point of the critical manifold, checking j = rho(1-rho).
inline ManifoldPoint make_manifold_point(double j, double xi, double rho) {
  detail::require_unit_interval(xi, "manifold point");
  if (std::abs(j - rho * (1.0 - rho)) > 1e-12)
    throw DomainError("point is not on the critical manifold: |j - rho(1-rho)| > 1e-12");
  return ManifoldPoint{j, xi, rho, branch_of(rho)};
}

/// Conserved quantity of the reduced flow: H(xi, rho) = k(xi) rho (1 - rho).
/// Level sets of H are the slow orbits.
inline double conserved_H(const WidthProfile& profile, double xi, double rho) {
  detail::require_unit_interval(xi, "conserved_H");
  if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("conserved_H: density outside [0,1]");
  return profile.k(xi) * rho * (1.0 - rho);
}

/// The two densities carrying flux density j on the critical manifold,
/// rho_minus <= 1/2 <= rho_plus. They coincide at the fold j = 1/4.
inline std::pair<double, double> critical_roots(double j) {
  if (j < 0.0) throw DomainError("critical_roots: flux density must be nonnegative");
  if (j > 0.25) {
    if (j <= 0.25 * (1.0 + 1e-14)) {
      j = 0.25;  // fold within rounding
    } else {
      throw NoRealRoot("critical_roots: j > 1/4 lies above the fold");
    }
  }
  const double s = std::sqrt(std::max(0.0, 0.25 - j));
  return {0.5 - s, 0.5 + s};
}

/// Admissible density band at the entrance: boundary points (alpha(1-s), 0, s)
/// connect to the critical manifold only for s >= rho_alpha.
inline double rho_admissible_left(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("rho_admissible_left: inflow rate must lie in (0,1)");
  return alpha <= 0.5 ? alpha : 1.0 - 0.25 / alpha;
}

/// Admissible density band at the exit: endpoints (beta t, 1, t) are reachable
/// only for t <= rho_beta.
inline double rho_admissible_right(double beta) {
  if (!(beta > 0.0 && beta < 1.0))
    throw DomainError("rho_admissible_right: outflow rate must lie in (0,1)");
  return beta <= 0.5 ? 1.0 - beta : 0.25 / beta;
}

/// Attracting-branch limit of the entrance layer: the fast flow started at
/// (alpha(1-s), 0, s) converges to this density on the critical manifold.
inline double layer_limit_entrance(double alpha, double s) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("layer_limit_entrance: inflow rate must lie in (0,1)");
  if (!(s <= 1.0)) throw DomainError("layer_limit_entrance: density above 1");
  const double bound = rho_admissible_left(alpha);
  if (s < bound - 1e-14)
    throw InadmissibleStart("layer start below rho_alpha: the layer flow escapes");
  const double j = alpha * (1.0 - s);
  return 0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - 4.0 * j)));
}

/// Repelling-branch point whose forward layer flow at the exit reaches
/// (beta t, 1, t).
inline double layer_limit_exit(double beta, double t) {
  if (!(beta > 0.0 && beta < 1.0))
    throw DomainError("layer_limit_exit: outflow rate must lie in (0,1)");
  if (!(t >= 0.0)) throw DomainError("layer_limit_exit: density below 0");
  const double bound = rho_admissible_right(beta);
  if (t > bound + 1e-14)
    throw InadmissibleEnd("layer end above rho_beta: the endpoint repels the layer flow");
  const double j = beta * t;
  return 0.5 * (1.0 - std::sqrt(std::max(0.0, 1.0 - 4.0 * j)));
}

// ---------------------------------------------------------------------------
// Canard data: the two fold-level graphs through the saddle above the neck.
// ---------------------------------------------------------------------------

struct CanardData {
  double rho_c0 = 0.0;  ///< lower-branch density at xi = 0
  double rho_c1 = 0.0;  ///< upper-branch density at xi = 1
  std::vector<std::pair<double, double>> upper_branch;  ///< (xi, rho_c^+)
  std::vector<std::pair<double, double>> lower_branch;  ///< (xi, rho_c^-)
  ManifoldPoint p_star;  ///< folded saddle (1/4, xi*, 1/2)
  ManifoldPoint p_c0;    ///< canard start (rho_c0(1-rho_c0), 0, 1-rho_c0)
  ManifoldPoint p_c1;    ///< canard end (rho_c1(1-rho_c1), 1, 1-rho_c1)
  std::array<std::array<double, 2>, 2> saddle_matrix{};  ///< desingularized linearization

  // Convenience copies of the bottleneck data the formulas reuse.
  double xi_star = 0.0, k_star = 0.0, k0 = 0.0, k1 = 0.0, g_prime_at_star = 0.0;
  bool quadratic = false;

  double canard_level() const { return 0.25 * k_star; }

  /// rho_c^+(xi) = (1 + sqrt(1 - k*/k(xi))) / 2, evaluated from stored k*.
  double rho_plus(const WidthProfile& profile, double xi) const {
    const double r = std::max(0.0, 1.0 - k_star / profile.k(xi));
    return 0.5 * (1.0 + std::sqrt(r));
  }
  double rho_minus(const WidthProfile& profile, double xi) const {
    const double r = std::max(0.0, 1.0 - k_star / profile.k(xi));
    return 0.5 * (1.0 - std::sqrt(r));
  }
};

/// Samples the canard branches and assembles the folded-saddle data.
inline CanardData canard_data(const WidthProfile& profile, const BottleneckInfo& info,
                              int n_samples = 2001) {
  if (!info.assumption_ok)
    throw AssumptionViolated("canard_data requires a validated bottleneck");
  if (n_samples < 3) throw DomainError("canard_data: need at least 3 samples");

  CanardData c;
  c.xi_star = info.xi_star;
  c.k_star = info.k_min;
  c.k0 = info.k0;
  c.k1 = info.k1;
  c.g_prime_at_star = info.g_prime_at_star;
  c.quadratic = info.quadratic;

  std::vector<double> mesh;
  mesh.reserve(static_cast<std::size_t>(n_samples) + 1);
  bool have_star = false;
  for (int i = 0; i < n_samples; ++i) {
    const double x = static_cast<double>(i) / (n_samples - 1);
    if (!have_star && x > info.xi_star) {
      mesh.push_back(info.xi_star);
      have_star = true;
    }
    if (x == info.xi_star) have_star = true;
    mesh.push_back(x);
  }

  c.upper_branch.reserve(mesh.size());
  c.lower_branch.reserve(mesh.size());
  for (double x : mesh) {
    if (x == info.xi_star) {
      c.upper_branch.emplace_back(x, 0.5);
      c.lower_branch.emplace_back(x, 0.5);
    } else {
      c.upper_branch.emplace_back(x, c.rho_plus(profile, x));
      c.lower_branch.emplace_back(x, c.rho_minus(profile, x));
    }
  }

  c.rho_c0 = c.lower_branch.front().second;
  c.rho_c1 = c.upper_branch.back().second;
  c.p_star = ManifoldPoint{0.25, info.xi_star, 0.5, Branch::fold};
  c.p_c0 = make_manifold_point(c.rho_c0 * (1.0 - c.rho_c0), 0.0, 1.0 - c.rho_c0);
  c.p_c1 = make_manifold_point(c.rho_c1 * (1.0 - c.rho_c1), 1.0, 1.0 - c.rho_c1);
  c.saddle_matrix = {{{0.0, -2.0}, {-info.g_prime_at_star / 4.0, 0.0}}};
  return c;
}

struct FoldedSaddleInfo {
  double det = 0.0;                        ///< -g'(xi*)/2
  std::array<double, 2> eigenvalues{};     ///< +/- sqrt(g'(xi*)/2)
};

/// Linearization diagnostics at the folded singularity. det < 0 certifies a
/// folded saddle; det = 0 signals a flat-bottomed (non-quadratic) neck.
inline FoldedSaddleInfo folded_saddle_check(const CanardData& canard) {
  FoldedSaddleInfo out;
  out.det = -0.5 * canard.g_prime_at_star;
  const double lam = std::sqrt(std::max(0.0, 0.5 * canard.g_prime_at_star));
  out.eigenvalues = {lam, -lam};
  return out;
}

// ---------------------------------------------------------------------------
// Reduced orbits: level sets of H traced as graphs over xi.
// ---------------------------------------------------------------------------

enum class Direction { forward, backward };

enum class Termination { reached_target, hit_fold, reached_canard_point };

/// One slow segment on a single level of H. Samples are ordered by strictly
/// increasing xi for forward orbits, strictly decreasing for backward ones.
struct SlowSegment {
  std::vector<double> xi;
  std::vector<double> rho;
  double level = 0.0;
  Termination termination = Termination::reached_target;
  double xi_hit = std::numeric_limits<double>::quiet_NaN();
  bool enters_region_n = false;
  bool canard_crossing = false;

  std::size_t size() const { return xi.size(); }
};

struct OrbitOptions {
  int n_samples = 2001;
  bool cluster_near_star = false;   ///< cosine-cluster samples toward xi*
  bool stop_at_canard_point = false;
};

namespace detail {

/// Bisect k(x) = target on [lo, hi] assuming k(lo) > target > k(hi) or the
/// reverse; returns the crossing point.
inline double bisect_k_level(const WidthProfile& p, double lo, double hi, double target) {
  const bool descending = p.k(lo) > target;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    const bool above = p.k(mid) > target;
    if (above == descending)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Sample positions between a and b (inclusive), optionally clustered toward
/// xi_star where the canard graphs have a square-root cusp.
inline std::vector<double> orbit_mesh(double a, double b, int n, bool cluster,
                                      double xi_star) {
  std::vector<double> mesh;
  mesh.reserve(static_cast<std::size_t>(n) + 2);
  if (n < 2 || a == b) {
    mesh.push_back(a);
    if (b != a) mesh.push_back(b);
    return mesh;
  }
  for (int i = 0; i < n; ++i) {
    double t = static_cast<double>(i) / (n - 1);
    if (cluster) {
      // Pull samples toward the point of the range nearest xi_star.
      const double lo = std::min(a, b), hi = std::max(a, b);
      const double star = std::clamp(xi_star, lo, hi);
      const double frac = (hi > lo) ? (star - lo) / (hi - lo) : 0.5;
      if (t < frac && frac > 0.0) {
        const double s = t / frac;
        t = frac * std::sin(0.5 * pi * s);
      } else if (frac < 1.0) {
        const double s = (t - frac) / (1.0 - frac);
        t = frac + (1.0 - frac) * (1.0 - std::cos(0.5 * pi * s));
      }
    }
    mesh.push_back(a + (b - a) * t);
  }
  mesh.front() = a;
  mesh.back() = b;
  return mesh;
}

}  // namespace detail

/// Traces the level set H = H(xi0, rho0) from the start point in the given
/// direction, staying on the starting branch.
///
///  * level < k*/4: the orbit clears the neck and runs to the domain end.
///  * level > k*/4: the orbit dies on the fold where k(xi) = 4*level; the
///    segment is flagged as entering the no-passing region N.
///  * level = k*/4 (within 1e-12 relative): the orbit is continued through
///    the folded saddle, switching branch there (canard for forward motion on
///    the attracting branch, faux canard from the repelling one).
inline SlowSegment reduced_orbit(const WidthProfile& profile,
                                 std::pair<double, double> start, Direction direction,
                                 const CanardData& canard,
                                 const OrbitOptions& options = {}) {
  const auto [xi0, rho0] = start;
  detail::require_unit_interval(xi0, "reduced_orbit");
  if (!(rho0 >= 0.0 && rho0 <= 1.0))
    throw DomainError("reduced_orbit: start density outside [0,1]");

  const double level_raw = conserved_H(profile, xi0, rho0);
  const double hc = canard.canard_level();
  const bool canard_level = std::abs(level_raw - hc) <= 1e-12 * hc;

  Branch start_branch = branch_of(rho0);
  if (start_branch == Branch::fold) {
    // Only the folded saddle admits a continuation; pick the canard branch
    // leaving it (repelling forward, attracting backward).
    if (!canard_level || std::abs(xi0 - canard.xi_star) > 1e-9)
      throw DomainError("reduced_orbit: start on the fold line away from the saddle");
    start_branch = direction == Direction::forward ? Branch::repelling : Branch::attracting;
  }

  SlowSegment seg;
  seg.level = canard_level ? hc : level_raw;

  const double target = direction == Direction::forward ? 1.0 : 0.0;
  const auto mesh =
      detail::orbit_mesh(xi0, target, options.n_samples,
                         options.cluster_near_star || canard_level, canard.xi_star);

  const bool forward = direction == Direction::forward;
  auto upper_value = [&](double x) {
    return canard_level ? canard.rho_plus(profile, x)
                        : 0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - 4.0 * seg.level / profile.k(x))));
  };
  auto lower_value = [&](double x) {
    return canard_level ? canard.rho_minus(profile, x)
                        : 0.5 * (1.0 - std::sqrt(std::max(0.0, 1.0 - 4.0 * seg.level / profile.k(x))));
  };

  bool on_upper = start_branch == Branch::attracting;
  double prev_x = xi0;

  auto push = [&](double x, double r) {
    if (!seg.xi.empty() && seg.xi.back() == x) return;
    seg.xi.push_back(x);
    seg.rho.push_back(r);
  };

  if (canard_level) {
    // Starting exactly on the saddle: the chosen branch already encodes the
    // continuation, so no switch happens later.
    bool star_passed = std::abs(xi0 - canard.xi_star) <= 1e-15;
    bool first = true;
    for (double x : mesh) {
      if (first) {
        first = false;
        push(x, star_passed ? 0.5 : (on_upper ? upper_value(x) : lower_value(x)));
        continue;
      }
      const bool beyond_star = forward ? x > canard.xi_star : x < canard.xi_star;
      if (!star_passed && (beyond_star || x == canard.xi_star)) {
        push(canard.xi_star, 0.5);
        star_passed = true;
        seg.canard_crossing = true;
        if (options.stop_at_canard_point) {
          seg.termination = Termination::reached_canard_point;
          return seg;
        }
        on_upper = !on_upper;  // pass through the saddle onto the other branch
        if (x == canard.xi_star) continue;
      }
      push(x, on_upper ? upper_value(x) : lower_value(x));
    }
    seg.termination = Termination::reached_target;
    return seg;
  }

  // Generic level: stay on the starting branch until the target or the fold.
  for (double x : mesh) {
    const double radicand = 1.0 - 4.0 * seg.level / profile.k(x);
    if (radicand < 0.0) {
      const double xhit = detail::bisect_k_level(profile, std::min(prev_x, x),
                                                 std::max(prev_x, x), 4.0 * seg.level);
      push(xhit, 0.5);
      seg.termination = Termination::hit_fold;
      seg.xi_hit = xhit;
      seg.enters_region_n = true;
      return seg;
    }
    push(x, on_upper ? upper_value(x) : lower_value(x));
    prev_x = x;
  }
  seg.termination = Termination::reached_target;
  return seg;
}

// ---------------------------------------------------------------------------
// Layer problem diagnostics: rho' = rho(1-rho) - j with j, xi frozen has the
// exact solution below (logistic in disguise). Solutions between the two
// manifold roots relax onto the attracting branch; below the repelling root
// they blow down in finite time.
// ---------------------------------------------------------------------------

/// Exact layer-flow density after fast time chi, starting from rho0 at flux
/// density j. Returns NaN past a finite-time blow-up.
inline double layer_density(double j, double rho0, double chi) {
  const double u0 = rho0 - 0.5;
  const double disc = 1.0 - 4.0 * j;
  if (disc > 0.0) {
    const double r = 0.5 * std::sqrt(disc);
    if (std::abs(u0) == r) return rho0;
    if (std::abs(u0) < r) {
      return 0.5 + r * std::tanh(r * chi + std::atanh(u0 / r));
    }
    // coth branch: valid until the argument crosses zero (finite-time escape).
    const double c0 = 0.5 * std::log((u0 / r + 1.0) / (u0 / r - 1.0));  // acoth
    const double arg = r * chi + c0;
    if (arg * c0 <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return 0.5 + r / std::tanh(arg);
  }
  if (disc == 0.0) {
    const double denom = 1.0 + u0 * chi;
    if (denom <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return 0.5 + u0 / denom;
  }
  const double q = 0.5 * std::sqrt(-disc);
  const double arg = std::atan(u0 / q) - q * chi;
  if (arg <= -0.5 * detail::pi) return std::numeric_limits<double>::quiet_NaN();
  return 0.5 + q * std::tan(arg);
}

/// Samples the layer orbit on chi in [0, chi_max].
inline std::vector<std::pair<double, double>> sample_layer_orbit(double j, double rho0,
                                                                 double chi_max, int n) {
  if (n < 2) throw DomainError("sample_layer_orbit: need at least 2 samples");
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double chi = chi_max * static_cast<double>(i) / (n - 1);
    out.emplace_back(chi, layer_density(j, rho0, chi));
  }
  return out;
}

}  // namespace corridor
