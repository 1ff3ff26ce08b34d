#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "corridor/bvp_solver.hpp"
#include "corridor/errors.hpp"
#include "corridor/region_atlas.hpp"
#include "corridor/singular_profile.hpp"
#include "corridor/width_profile.hpp"

namespace corridor {

namespace detail {

struct Segment2 {
  double x0, y0, x1, y1;
  double mid_x() const { return 0.5 * (x0 + x1); }
  double half_width() const { return 0.5 * std::abs(x1 - x0); }
};

inline double point_segment_dist2(double px, double py, const Segment2& s) {
  const double dx = s.x1 - s.x0, dy = s.y1 - s.y0;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((px - s.x0) * dx + (py - s.y0) * dy) / len2, 0.0, 1.0);
  const double qx = s.x0 + t * dx - px;
  const double qy = s.y0 + t * dy - py;
  return qx * qx + qy * qy;
}

/// Polyline with segments indexed by midpoint x for windowed nearest-distance
/// queries; the curves here are graphs plus vertical jumps, so the x-window
/// prunes almost everything.
class IndexedPolyline {
 public:
  explicit IndexedPolyline(const std::vector<std::pair<double, double>>& pts) {
    segs_.reserve(pts.size());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const auto& [ax, ay] = pts[i];
      const auto& [bx, by] = pts[i + 1];
      if (ax == bx && ay == by) continue;
      segs_.push_back(Segment2{ax, ay, bx, by});
    }
    if (segs_.empty()) throw DimensionMismatch("polyline needs at least one segment");
    std::sort(segs_.begin(), segs_.end(),
              [](const Segment2& a, const Segment2& b) { return a.mid_x() < b.mid_x(); });
    max_half_width_ = 0.0;
    mids_.reserve(segs_.size());
    for (const auto& s : segs_) {
      mids_.push_back(s.mid_x());
      max_half_width_ = std::max(max_half_width_, s.half_width());
    }
  }

  double distance(double px, double py) const {
    const auto it = std::lower_bound(mids_.begin(), mids_.end(), px);
    const std::size_t start = static_cast<std::size_t>(it - mids_.begin());
    double best2 = std::numeric_limits<double>::infinity();
    auto visit = [&](std::size_t i) {
      best2 = std::min(best2, point_segment_dist2(px, py, segs_[i]));
    };
    // Expand outward from the x-nearest midpoint until the window cannot
    // contain anything closer.
    std::size_t l = start, r = start;
    bool more = true;
    while (more) {
      more = false;
      const double best = std::sqrt(best2);
      if (r < segs_.size() && mids_[r] - px <= best + max_half_width_) {
        visit(r);
        ++r;
        more = true;
      }
      if (l > 0 && px - mids_[l - 1] <= best + max_half_width_) {
        visit(l - 1);
        --l;
        more = true;
      }
    }
    return std::sqrt(best2);
  }

 private:
  std::vector<Segment2> segs_;
  std::vector<double> mids_;
  double max_half_width_ = 0.0;
};

inline double directed_hausdorff(const std::vector<std::pair<double, double>>& from,
                                 const IndexedPolyline& to) {
  double worst = 0.0;
  for (const auto& [x, y] : from) worst = std::max(worst, to.distance(x, y));
  return worst;
}

/// Vertices of the singular orbit in the (x, rho) plane with the vertical
/// layers sampled densely, so both directed distances see them.
inline std::vector<std::pair<double, double>> orbit_polyline(const SingularOrbit& orbit,
                                                             int n) {
  auto pts = sample_profile(orbit, std::max(n, 16));
  std::vector<std::pair<double, double>> out;
  const int layer_n = std::max(64, n / 8);
  out.reserve(pts.size() + 2 * static_cast<std::size_t>(layer_n));
  if (orbit.entry_layer) {
    const auto& l = *orbit.entry_layer;
    for (int i = 0; i < layer_n; ++i)
      out.emplace_back(l.x, l.from + (l.to - l.from) * i / static_cast<double>(layer_n));
  }
  out.insert(out.end(), pts.begin() + (orbit.entry_layer ? 1 : 0),
             pts.end() - (orbit.exit_layer ? 1 : 0));
  if (orbit.exit_layer) {
    const auto& l = *orbit.exit_layer;
    for (int i = 1; i <= layer_n; ++i)
      out.emplace_back(l.x, l.from + (l.to - l.from) * i / static_cast<double>(layer_n));
  }
  return out;
}

}  // namespace detail

/// Symmetric Hausdorff distance between two polylines in the (x, rho) plane.
inline double hausdorff_distance(const std::vector<std::pair<double, double>>& a,
                                 const std::vector<std::pair<double, double>>& b) {
  if (a.size() < 2 || b.size() < 2)
    throw DimensionMismatch("hausdorff_distance: need at least two points per curve");
  const detail::IndexedPolyline pa(a), pb(b);
  return std::max(detail::directed_hausdorff(a, pb), detail::directed_hausdorff(b, pa));
}

/// Hausdorff distance between a singular orbit (layers included) and a
/// finite-diffusion solution, both resampled to ~n points.
inline double hausdorff_distance(const SingularOrbit& orbit, const EpsSolution& sol,
                                 int n = 4001) {
  if (sol.x.size() != sol.rho.size() || sol.x.size() < 2)
    throw DimensionMismatch("hausdorff_distance: malformed solution");
  const auto a = detail::orbit_polyline(orbit, n);
  std::vector<std::pair<double, double>> b;
  b.reserve(sol.x.size());
  for (std::size_t i = 0; i < sol.x.size(); ++i) b.emplace_back(sol.x[i], sol.rho[i]);
  return hausdorff_distance(a, b);
}

// ---------------------------------------------------------------------------
// Convergence-rate study: Hausdorff distances along a decreasing epsilon list
// and the fitted slope of log d against log eps. Expected slope 1 in the low-
// and high-density phases, 1/2 through the canard.
// ---------------------------------------------------------------------------

struct ConvergenceReport {
  double alpha = 0.0, beta = 0.0;
  RegionLabel label;
  std::vector<std::pair<double, double>> pairs;  ///< (eps, hausdorff distance)
  double mu_hat = 0.0;
  double r_squared = 0.0;
  double expected_mu = 0.0;
};

inline double expected_rate(const RegionLabel& label) {
  if (label.kind != RegionLabel::Kind::region) return 0.0;
  return (label.region >= 3 && label.region <= 6) ? 0.5 : 1.0;
}

inline ConvergenceReport convergence_rate(const WidthProfile& profile, double alpha,
                                          double beta, const std::vector<double>& eps_list,
                                          const SolverOptions& options = {}) {
  if (eps_list.size() < 4)
    throw DomainError("convergence_rate: need at least 4 epsilon values");
  const auto info = validate(profile);
  const auto canard = canard_data(profile, info);
  const auto label = classify(alpha, beta, canard);
  if (label.kind != RegionLabel::Kind::region)
    throw OutOfScope("convergence_rate: (alpha, beta) must lie in an open region");

  const auto orbit = build_singular(alpha, beta, profile, canard, label, 4001);
  const auto sols = continuation_solve(profile, alpha, beta, eps_list, options);

  ConvergenceReport rep;
  rep.alpha = alpha;
  rep.beta = beta;
  rep.label = label;
  rep.expected_mu = expected_rate(label);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& sol : sols) {
    const double d = hausdorff_distance(orbit, sol);
    rep.pairs.emplace_back(sol.epsilon, d);
    const double lx = std::log(sol.epsilon), ly = std::log(d);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  const double n = static_cast<double>(rep.pairs.size());
  const double denom = n * sxx - sx * sx;
  rep.mu_hat = (n * sxy - sx * sy) / denom;
  const double ss_res = syy - sy * sy / n - rep.mu_hat * (sxy - sx * sy / n);
  const double ss_tot = syy - sy * sy / n;
  rep.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Parameter sweeps over the open unit square.
// ---------------------------------------------------------------------------

struct SweepCell {
  double alpha = 0.0, beta = 0.0;
  RegionLabel label;
  double flux_singular = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> flux_eps;
  std::array<double, 5> fingerprint{};  ///< rho at x = 0, 1/4, 1/2, 3/4, 1
  std::string error;
};

struct SweepTable {
  int grid_n = 0;
  std::optional<double> epsilon;
  std::vector<SweepCell> cells;  ///< row-major: alpha index outer, beta inner
};

/// Classifies (and optionally solves) every point of the uniform grid
/// alpha_i = i/(n+1), beta_j = j/(n+1). Cells on boundary curves keep a NaN
/// singular flux. Per-cell failures land in the cell's error field.
inline SweepTable sweep(const WidthProfile& profile, int grid_n,
                        std::optional<double> epsilon = std::nullopt,
                        const SolverOptions& options = {}, int n_threads = 0) {
  if (grid_n < 2) throw DomainError("sweep: grid must be at least 2x2");
  const auto info = validate(profile);
  const auto canard = canard_data(profile, info);

  SweepTable table;
  table.grid_n = grid_n;
  table.epsilon = epsilon;
  table.cells.resize(static_cast<std::size_t>(grid_n) * grid_n);

  const int workers = n_threads > 0
                          ? n_threads
                          : std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= table.cells.size()) return;
      const int i = static_cast<int>(idx) / grid_n;
      const int j = static_cast<int>(idx) % grid_n;
      SweepCell& cell = table.cells[idx];
      cell.alpha = (i + 1.0) / (grid_n + 1.0);
      cell.beta = (j + 1.0) / (grid_n + 1.0);
      cell.label = classify(cell.alpha, cell.beta, canard);
      try {
        if (cell.label.kind == RegionLabel::Kind::region)
          cell.flux_singular = flux_singular(cell.alpha, cell.beta, canard, cell.label);
        if (epsilon) {
          const auto sol = solve(profile, cell.alpha, cell.beta, *epsilon, options);
          cell.flux_eps = sol.flux;
          const double probes[5] = {0.0, 0.25, 0.5, 0.75, 1.0};
          const auto vals = detail::interp_linear(
              sol.x, sol.rho, std::vector<double>(probes, probes + 5));
          std::copy(vals.begin(), vals.end(), cell.fingerprint.begin());
        }
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return table;
}

/// Fraction of grid cells labeled with the canard-mediated regions G3..G6.
inline double transitional_area_fraction(const SweepTable& table) {
  std::size_t hits = 0;
  for (const auto& cell : table.cells)
    if (cell.label.kind == RegionLabel::Kind::region && cell.label.region >= 3 &&
        cell.label.region <= 6)
      ++hits;
  return static_cast<double>(hits) / static_cast<double>(table.cells.size());
}

/// Reference flux of the flat corridor (k = 1): alpha(1-alpha), beta(1-beta),
/// or the fold value 1/4, whichever the rates select.
inline double flat_corridor_flux(double alpha, double beta) {
  if (alpha <= 0.5 && alpha <= beta) return alpha * (1.0 - alpha);
  if (beta <= 0.5 && beta <= alpha) return beta * (1.0 - beta);
  return 0.25;
}

}  // namespace corridor
