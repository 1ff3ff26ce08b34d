#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "corridor/analysis.hpp"
#include "corridor/bvp_solver.hpp"
#include "corridor/region_atlas.hpp"
#include "corridor/singular_profile.hpp"
#include "corridor/slow_fast.hpp"
#include "corridor/width_profile.hpp"

namespace corridor {

/// Fixed 17-significant-digit formatting so identical runs produce
/// byte-identical files.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_segment_csv(std::ostream& os, const SlowSegment& seg) {
  os << "xi,rho,branch\n";
  for (std::size_t i = 0; i < seg.size(); ++i)
    os << fmt(seg.xi[i]) << ',' << fmt(seg.rho[i]) << ','
       << branch_name(branch_of(seg.rho[i])) << '\n';
}

inline nlohmann::json to_json(const SlowSegment& seg) {
  nlohmann::json j;
  j["level"] = seg.level;
  j["xi"] = seg.xi;
  j["rho"] = seg.rho;
  j["canard_crossing"] = seg.canard_crossing;
  j["enters_region_n"] = seg.enters_region_n;
  switch (seg.termination) {
    case Termination::reached_target: j["termination"] = "reached_target"; break;
    case Termination::hit_fold:
      j["termination"] = "hit_fold";
      j["xi_hit"] = seg.xi_hit;
      break;
    case Termination::reached_canard_point: j["termination"] = "reached_canard_point"; break;
  }
  return j;
}

inline nlohmann::json to_json(const BottleneckInfo& info) {
  return nlohmann::json{{"xi_star", info.xi_star},
                        {"k_min", info.k_min},
                        {"k0", info.k0},
                        {"k1", info.k1},
                        {"g_prime_at_star", info.g_prime_at_star},
                        {"quadratic", info.quadratic},
                        {"assumption_ok", info.assumption_ok}};
}

inline nlohmann::json to_json(const CanardData& c) {
  nlohmann::json j;
  j["rho_c0"] = c.rho_c0;
  j["rho_c1"] = c.rho_c1;
  j["xi_star"] = c.xi_star;
  j["k_star"] = c.k_star;
  j["det_saddle"] = -0.5 * c.g_prime_at_star;
  return j;
}

inline nlohmann::json to_json(const RegionLabel& label) {
  nlohmann::json j;
  j["label"] = label.name();
  nlohmann::json margins = nlohmann::json::object();
  for (const auto& [name, value] : label.margins) margins[name] = value;
  j["margins"] = margins;
  return j;
}

inline void write_profile_csv(std::ostream& os,
                              const std::vector<std::pair<double, double>>& pts) {
  os << "x,rho\n";
  for (const auto& [x, r] : pts) os << fmt(x) << ',' << fmt(r) << '\n';
}

/// x,rho,piece rows: entry_layer / slow / exit_layer.
inline void write_orbit_csv(std::ostream& os, const SingularOrbit& orbit) {
  os << "x,rho,piece\n";
  if (orbit.entry_layer)
    os << fmt(orbit.entry_layer->x) << ',' << fmt(orbit.entry_layer->from)
       << ",entry_layer\n";
  for (std::size_t i = 0; i < orbit.slow.size(); ++i)
    os << fmt(orbit.slow.xi[i]) << ',' << fmt(orbit.slow.rho[i]) << ",slow\n";
  if (orbit.exit_layer)
    os << fmt(orbit.exit_layer->x) << ',' << fmt(orbit.exit_layer->to) << ",exit_layer\n";
}

inline nlohmann::json to_json(const SingularOrbit& orbit) {
  nlohmann::json j;
  j["type"] = orbit.type_index;
  j["alpha"] = orbit.alpha;
  j["beta"] = orbit.beta;
  j["flux"] = orbit.flux;
  j["rho0"] = orbit.rho0;
  j["rho1"] = orbit.rho1;
  auto layer_json = [](const LayerJump& l) {
    return nlohmann::json{{"x", l.x},
                          {"from", l.from},
                          {"to", l.to},
                          {"direction", l.direction == LayerDirection::up ? "up" : "down"}};
  };
  if (orbit.entry_layer) j["entry_layer"] = layer_json(*orbit.entry_layer);
  if (orbit.exit_layer) j["exit_layer"] = layer_json(*orbit.exit_layer);
  j["slow"] = to_json(orbit.slow);
  return j;
}

inline nlohmann::json to_json(const DegenerateFamily& fam) {
  nlohmann::json j;
  j["curve"] = curve_name(fam.curve);
  j["jump_window"] = {fam.jump_lo, fam.jump_hi};
  j["rho0"] = fam.rho0;
  j["rho1"] = fam.rho1;
  j["flux"] = fam.flux;
  j["lower"] = to_json(fam.lower);
  j["upper"] = to_json(fam.upper);
  return j;
}

inline void write_solution_csv(std::ostream& os, const EpsSolution& sol) {
  os << "x,rho\n";
  for (std::size_t i = 0; i < sol.x.size(); ++i)
    os << fmt(sol.x[i]) << ',' << fmt(sol.rho[i]) << '\n';
}

/// Sidecar metadata for a finite-diffusion solution.
inline nlohmann::json solution_meta_json(const EpsSolution& sol, double alpha,
                                         double beta) {
  return nlohmann::json{{"alpha", alpha},
                        {"beta", beta},
                        {"epsilon", sol.epsilon},
                        {"flux", sol.flux},
                        {"residual_norm", sol.residual_norm},
                        {"iterations", sol.newton_iterations},
                        {"continuation_trace", sol.continuation_trace},
                        {"mesh_points", sol.x.size()}};
}

inline nlohmann::json to_json(const EpsSolution& sol, double alpha, double beta) {
  auto j = solution_meta_json(sol, alpha, beta);
  j["x"] = sol.x;
  j["rho"] = sol.rho;
  return j;
}

/// Diagram CSV: alpha,beta,region,flux_singular[,flux_eps].
inline void write_sweep_csv(std::ostream& os, const SweepTable& table) {
  const bool with_eps = table.epsilon.has_value();
  os << "alpha,beta,region,flux_singular";
  if (with_eps) os << ",flux_eps";
  os << '\n';
  for (const auto& cell : table.cells) {
    os << fmt(cell.alpha) << ',' << fmt(cell.beta) << ',' << cell.label.name() << ','
       << (std::isnan(cell.flux_singular) ? std::string() : fmt(cell.flux_singular));
    if (with_eps) {
      os << ',';
      if (cell.flux_eps) os << fmt(*cell.flux_eps);
    }
    os << '\n';
  }
}

inline void write_flux_map_csv(std::ostream& os, const SweepTable& table) {
  os << "alpha,beta,flux\n";
  for (const auto& cell : table.cells)
    os << fmt(cell.alpha) << ',' << fmt(cell.beta) << ','
       << (std::isnan(cell.flux_singular) ? std::string() : fmt(cell.flux_singular))
       << '\n';
}

inline void write_convergence_csv(std::ostream& os, const ConvergenceReport& rep) {
  os << "eps,distance\n";
  for (const auto& [eps, d] : rep.pairs) os << fmt(eps) << ',' << fmt(d) << '\n';
}

inline nlohmann::json to_json(const ConvergenceReport& rep) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [eps, d] : rep.pairs) pairs.push_back({eps, d});
  return nlohmann::json{{"alpha", rep.alpha},
                        {"beta", rep.beta},
                        {"label", rep.label.name()},
                        {"mu_hat", rep.mu_hat},
                        {"expected_mu", rep.expected_mu},
                        {"r_squared", rep.r_squared},
                        {"pairs", pairs}};
}

inline void write_curves_csv(std::ostream& os, const std::vector<CurveSamples>& curves) {
  os << "curve,alpha,beta\n";
  for (const auto& cs : curves)
    for (const auto& [a, b] : cs.points)
      os << curve_name(cs.id) << ',' << fmt(a) << ',' << fmt(b) << '\n';
}

}  // namespace corridor
