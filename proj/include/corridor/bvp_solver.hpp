#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "corridor/errors.hpp"
#include "corridor/singular_profile.hpp"
#include "corridor/width_profile.hpp"

namespace corridor {

// ---------------------------------------------------------------------------
// Finite-diffusion stationary problem, reformulated as a scalar ODE with the
// total flux J as one extra unknown:
//
//     eps rho'(x) = rho(1-rho) - J/k(x),
//     rho(0) = 1 - J/(alpha k(0)),      rho(1) = J/(beta k(1)).
//
// Discretized with the box (implicit midpoint) scheme on a graded mesh; the
// Jacobian is tridiagonal plus one dense column/row for J and is factored
// with a sparse LU. Left-to-right condensation would be exponentially
// unstable along repelling slow manifolds, which is exactly where the
// interesting solutions live.
// ---------------------------------------------------------------------------

struct SolverOptions {
  int mesh_size = 0;  ///< cells; 0 = automatic max(2000, ceil(20/eps))
  enum class Grading { uniform, graded } grading = Grading::graded;
  double grading_ratio = 1.05;

  double newton_tol = 1e-10;
  int max_iterations = 50;
  double min_step = 9.5367431640625e-7;  ///< 2^-20 line-search floor

  bool use_continuation = true;
  double continuation_start = 0.1;
  double continuation_factor = 0.5;

  enum class InitialGuess { singular_orbit, constant_half, previous } initial_guess =
      InitialGuess::singular_orbit;

  /// Verification hook: adds f(x) to the right-hand side (manufactured
  /// solutions). Empty in production use.
  std::function<double(double)> forcing;

  int max_mesh = 400000;
};

struct EpsSolution {
  double epsilon = 0.0;
  std::vector<double> x;    ///< mesh nodes, x0 = 0 < ... < xN = 1
  std::vector<double> rho;  ///< densities at the nodes
  double flux = 0.0;        ///< J, constant in x by construction
  double residual_norm = 0.0;
  int newton_iterations = 0;
  std::vector<double> continuation_trace;  ///< epsilons solved on the way here
};

/// Newton failed to converge. Carries the continuation trace and, for the
/// sequence driver, the solutions completed before the failure.
class NoConvergence : public std::runtime_error {
 public:
  NoConvergence(const std::string& what, double failed_eps, std::vector<double> trace_,
                std::vector<EpsSolution> completed_ = {})
      : std::runtime_error(what),
        failed_epsilon(failed_eps),
        trace(std::move(trace_)),
        completed(std::move(completed_)) {}

  double failed_epsilon;
  std::vector<double> trace;
  std::vector<EpsSolution> completed;
};

namespace detail {

inline int auto_mesh_size(double eps, const SolverOptions& opts) {
  const int n = std::max(2000, static_cast<int>(std::ceil(20.0 / eps)));
  return std::min(n, opts.max_mesh);
}

/// Widths for one block of `cells` covering `length`, refined toward both
/// ends: geometric growth at ratio r from each end, capped, uniform middle.
inline void graded_block(double length, int cells, double r, std::vector<double>& widths) {
  if (cells <= 0) return;
  const double cap = 64.0;
  int geo = std::min(cells / 4, static_cast<int>(std::ceil(std::log(cap) / std::log(r))));
  geo = std::max(geo, 0);
  // total = w0 [ 2 (r^geo - 1)/(r - 1) + (cells - 2 geo) r^geo ]
  const double rg = std::pow(r, geo);
  const double geo_sum = geo > 0 ? 2.0 * (rg - 1.0) / (r - 1.0) : 0.0;
  const double w0 = length / (geo_sum + (cells - 2 * geo) * rg);
  for (int i = 0; i < geo; ++i) widths.push_back(w0 * std::pow(r, i));
  for (int i = 0; i < cells - 2 * geo; ++i) widths.push_back(w0 * rg);
  for (int i = geo - 1; i >= 0; --i) widths.push_back(w0 * std::pow(r, i));
}

/// Mesh over [0,1] with xi_star as a node, refined toward 0, xi_star and 1.
inline std::vector<double> build_mesh(int cells, double xi_star,
                                      const SolverOptions& opts) {
  std::vector<double> mesh;
  mesh.reserve(static_cast<std::size_t>(cells) + 2);
  if (opts.grading == SolverOptions::Grading::uniform || !(xi_star > 0.0) ||
      !(xi_star < 1.0)) {
    for (int i = 0; i <= cells; ++i)
      mesh.push_back(static_cast<double>(i) / cells);
    return mesh;
  }
  int left_cells = std::clamp(static_cast<int>(std::lround(cells * xi_star)), 4, cells - 4);
  std::vector<double> widths;
  widths.reserve(static_cast<std::size_t>(cells));
  graded_block(xi_star, left_cells, opts.grading_ratio, widths);
  graded_block(1.0 - xi_star, cells - left_cells, opts.grading_ratio, widths);
  mesh.push_back(0.0);
  double x = 0.0;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    x += widths[i];
    mesh.push_back(x);
  }
  mesh[static_cast<std::size_t>(left_cells)] = xi_star;  // exact by construction
  mesh.back() = 1.0;
  return mesh;
}

inline std::vector<double> interp_linear(const std::vector<double>& x_old,
                                         const std::vector<double>& y_old,
                                         const std::vector<double>& x_new) {
  std::vector<double> out;
  out.reserve(x_new.size());
  std::size_t k = 0;
  for (double x : x_new) {
    while (k + 2 < x_old.size() && x_old[k + 1] < x) ++k;
    const double x0 = x_old[k], x1 = x_old[k + 1];
    const double t = x1 > x0 ? std::clamp((x - x0) / (x1 - x0), 0.0, 1.0) : 0.0;
    out.push_back(y_old[k] + t * (y_old[k + 1] - y_old[k]));
  }
  return out;
}

struct DiscreteProblem {
  const WidthProfile* profile;
  double alpha, beta, eps;
  std::vector<double> mesh;
  std::vector<double> k_mid, h;  // per cell
  double k0, k1;
  const std::function<double(double)>* forcing;

  DiscreteProblem(const WidthProfile& p, double a, double b, double e,
                  std::vector<double> m, const std::function<double(double)>& f)
      : profile(&p), alpha(a), beta(b), eps(e), mesh(std::move(m)), forcing(&f) {
    const std::size_t n_cells = mesh.size() - 1;
    k_mid.reserve(n_cells);
    h.reserve(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) {
      h.push_back(mesh[i + 1] - mesh[i]);
      k_mid.push_back(p.k(0.5 * (mesh[i] + mesh[i + 1])));
    }
    k0 = p.k(0.0);
    k1 = p.k(1.0);
  }

  std::size_t cells() const { return h.size(); }
  std::size_t unknowns() const { return mesh.size() + 1; }  // rho nodes + J

  /// Residual of all equations; rho has mesh.size() entries, J is scalar.
  void assemble_residual(const std::vector<double>& rho, double J,
                         std::vector<double>& F) const {
    const std::size_t n = cells();
    F.resize(n + 2);
    F[0] = rho[0] - (1.0 - J / (alpha * k0));
    for (std::size_t i = 0; i < n; ++i) {
      const double m = 0.5 * (rho[i] + rho[i + 1]);
      double rhs = m * (1.0 - m) - J / k_mid[i];
      if (*forcing) rhs += (*forcing)(0.5 * (mesh[i] + mesh[i + 1]));
      F[1 + i] = eps * (rho[i + 1] - rho[i]) / h[i] - rhs;
    }
    F[n + 1] = rho[n] - J / (beta * k1);
  }

  void assemble_jacobian(const std::vector<double>& rho,
                         std::vector<Eigen::Triplet<double>>& trip) const {
    const std::size_t n = cells();
    const int jcol = static_cast<int>(n) + 1;
    trip.clear();
    trip.reserve(3 * n + 4);
    trip.emplace_back(0, 0, 1.0);
    trip.emplace_back(0, jcol, 1.0 / (alpha * k0));
    for (std::size_t i = 0; i < n; ++i) {
      const double m = 0.5 * (rho[i] + rho[i + 1]);
      const double dm = 0.5 * (1.0 - 2.0 * m);
      const int row = static_cast<int>(i) + 1;
      trip.emplace_back(row, static_cast<int>(i), -eps / h[i] - dm);
      trip.emplace_back(row, static_cast<int>(i) + 1, eps / h[i] - dm);
      trip.emplace_back(row, jcol, 1.0 / k_mid[i]);
    }
    trip.emplace_back(jcol, jcol - 1, 1.0);
    trip.emplace_back(jcol, jcol, -1.0 / (beta * k1));
  }
};

inline double max_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct NewtonOutcome {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
};

/// Damped Newton on the discrete problem; rho and J are updated in place.
inline NewtonOutcome newton_solve(const DiscreteProblem& prob, std::vector<double>& rho,
                                  double& J, const SolverOptions& opts) {
  const std::size_t nun = prob.unknowns();
  std::vector<double> F, F_trial, rho_trial(rho.size());
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::SparseMatrix<double> A(static_cast<int>(nun), static_cast<int>(nun));
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool pattern_ready = false;

  prob.assemble_residual(rho, J, F);
  double fnorm = max_norm(F);
  NewtonOutcome out;
  for (int it = 0; it < opts.max_iterations; ++it) {
    if (fnorm <= opts.newton_tol) {
      out.converged = true;
      out.iterations = it;
      out.residual = fnorm;
      return out;
    }
    prob.assemble_jacobian(rho, trip);
    A.setFromTriplets(trip.begin(), trip.end());
    if (!pattern_ready) {
      lu.analyzePattern(A);
      pattern_ready = true;
    }
    lu.factorize(A);
    if (lu.info() != Eigen::Success) {
      out.converged = false;
      out.iterations = it;
      out.residual = fnorm;
      return out;
    }
    Eigen::VectorXd rhs(static_cast<int>(nun));
    for (std::size_t i = 0; i < nun; ++i) rhs[static_cast<int>(i)] = -F[i];
    const Eigen::VectorXd delta = lu.solve(rhs);

    double lambda = 1.0;
    double J_trial = J;
    bool accepted = false;
    while (lambda >= opts.min_step) {
      for (std::size_t i = 0; i + 1 < nun; ++i)
        rho_trial[i] = std::clamp(rho[i] + lambda * delta[static_cast<int>(i)], 0.0, 1.0);
      J_trial = J + lambda * delta[static_cast<int>(nun) - 1];
      prob.assemble_residual(rho_trial, J_trial, F_trial);
      const double fnew = max_norm(F_trial);
      if (fnew < fnorm) {
        rho.swap(rho_trial);
        J = J_trial;
        F.swap(F_trial);
        fnorm = fnew;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      out.converged = fnorm <= opts.newton_tol;
      out.iterations = it + 1;
      out.residual = fnorm;
      return out;
    }
  }
  out.converged = fnorm <= opts.newton_tol;
  out.iterations = opts.max_iterations;
  out.residual = fnorm;
  return out;
}

inline std::vector<double> continuation_ladder(double eps, const SolverOptions& opts) {
  if (!opts.use_continuation || eps >= opts.continuation_start) return {eps};
  std::vector<double> ladder{opts.continuation_start};
  double e = opts.continuation_start;
  while (e * opts.continuation_factor > eps * (1.0 + 1e-12)) {
    e *= opts.continuation_factor;
    ladder.push_back(e);
  }
  ladder.push_back(eps);
  return ladder;
}

/// Initial guess sampled from the singular orbit, smoothed by a 5-point
/// moving average so Newton does not stall on the jump discontinuities.
inline std::vector<double> singular_guess(const SingularOrbit& orbit,
                                          const std::vector<double>& mesh) {
  std::vector<double> rho = interp_linear(orbit.slow.xi, orbit.slow.rho, mesh);
  rho.front() = orbit.rho0;
  rho.back() = orbit.rho1;
  std::vector<double> sm(rho.size());
  const int n = static_cast<int>(rho.size());
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    int cnt = 0;
    for (int d = -2; d <= 2; ++d) {
      const int k = i + d;
      if (k >= 0 && k < n) {
        acc += rho[static_cast<std::size_t>(k)];
        ++cnt;
      }
    }
    sm[static_cast<std::size_t>(i)] = acc / cnt;
  }
  return sm;
}

}  // namespace detail

/// Solves the stationary problem at the requested diffusion, continuing
/// geometrically from eps = 0.1 with warm starts unless disabled. The first
/// rung starts from the singular orbit (when constructible) or from the
/// constant-1/2 state.
inline EpsSolution solve(const WidthProfile& profile, double alpha, double beta,
                         double epsilon, const SolverOptions& options = {}) {
  if (!(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0))
    throw DomainError("solve: rates must lie in (0,1)");
  if (!(epsilon > 0.0)) throw DomainError("solve: epsilon must be positive");

  // Bottleneck data for mesh grading and the singular initial guess; both are
  // optional (constant widths have no interior minimum but solve fine).
  double xi_star = -1.0;
  const SingularOrbit* orbit_ptr = nullptr;
  SingularOrbit orbit;
  if (options.initial_guess == SolverOptions::InitialGuess::singular_orbit) {
    try {
      const auto info = validate(profile);
      const auto c = canard_data(profile, info);
      xi_star = info.xi_star;
      orbit = build_singular(alpha, beta, profile, c, classify(alpha, beta, c), 4001);
      orbit_ptr = &orbit;
    } catch (const AssumptionViolated&) {
    } catch (const DegenerateParameters&) {
    } catch (const OutOfScope&) {
    }
  } else {
    try {
      xi_star = validate(profile).xi_star;
    } catch (const AssumptionViolated&) {
    }
  }

  const auto ladder = detail::continuation_ladder(epsilon, options);

  std::vector<double> rho;
  double J = 0.0;
  std::vector<double> prev_mesh;
  EpsSolution sol;

  for (std::size_t rung = 0; rung < ladder.size(); ++rung) {
    const double eps = ladder[rung];
    const int cells =
        options.mesh_size > 0 ? options.mesh_size : detail::auto_mesh_size(eps, options);
    auto mesh = detail::build_mesh(cells, xi_star, options);

    if (rung == 0) {
      if (orbit_ptr) {
        rho = detail::singular_guess(*orbit_ptr, mesh);
        J = orbit_ptr->flux;
      } else {
        rho.assign(mesh.size(), 0.5);
        double kmin = profile.k(0.0);
        for (double x : mesh) kmin = std::min(kmin, profile.k(x));
        J = 0.25 * kmin;
      }
    } else {
      rho = detail::interp_linear(prev_mesh, rho, mesh);
    }

    detail::DiscreteProblem prob(profile, alpha, beta, eps, mesh, options.forcing);
    const auto outcome = detail::newton_solve(prob, rho, J, options);
    if (!outcome.converged) {
      throw NoConvergence("solve: Newton failed at eps = " + std::to_string(eps) +
                              " (residual " + std::to_string(outcome.residual) + ")",
                          eps, sol.continuation_trace);
    }
    sol.continuation_trace.push_back(eps);
    sol.newton_iterations = outcome.iterations;
    sol.residual_norm = outcome.residual;
    prev_mesh = mesh;
    if (rung + 1 == ladder.size()) {
      sol.epsilon = eps;
      sol.x = std::move(mesh);
      sol.rho = rho;
      sol.flux = J;
    }
  }
  return sol;
}

/// Recomputes the discrete residual of a solution; max-norm over all
/// equations.
inline double residual(const EpsSolution& solution, const WidthProfile& profile,
                       double alpha, double beta,
                       const std::function<double(double)>& forcing = {}) {
  if (solution.x.size() != solution.rho.size() || solution.x.size() < 2)
    throw DimensionMismatch("residual: mesh and density arrays do not match");
  detail::DiscreteProblem prob(profile, alpha, beta, solution.epsilon, solution.x,
                               forcing);
  std::vector<double> F;
  prob.assemble_residual(solution.rho, solution.flux, F);
  return detail::max_norm(F);
}

inline double extract_flux(const EpsSolution& solution) { return solution.flux; }

/// Solves a strictly decreasing list of epsilons, warm-starting each from the
/// previous solution interpolated onto the refined mesh. On failure throws
/// NoConvergence carrying all completed solutions.
inline std::vector<EpsSolution> continuation_solve(const WidthProfile& profile,
                                                   double alpha, double beta,
                                                   const std::vector<double>& eps_list,
                                                   const SolverOptions& options = {}) {
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0))
      throw DomainError("continuation_solve: epsilons must be positive");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
      throw DomainError("continuation_solve: epsilons must be strictly decreasing");
  }
  std::vector<EpsSolution> out;
  if (eps_list.empty()) return out;

  out.push_back(solve(profile, alpha, beta, eps_list.front(), options));

  double xi_star = -1.0;
  try {
    xi_star = validate(profile).xi_star;
  } catch (const AssumptionViolated&) {
  }

  for (std::size_t i = 1; i < eps_list.size(); ++i) {
    const double eps = eps_list[i];
    const int cells =
        options.mesh_size > 0 ? options.mesh_size : detail::auto_mesh_size(eps, options);
    auto mesh = detail::build_mesh(cells, xi_star, options);
    std::vector<double> rho = detail::interp_linear(out.back().x, out.back().rho, mesh);
    double J = out.back().flux;

    detail::DiscreteProblem prob(profile, alpha, beta, eps, mesh, options.forcing);
    const auto outcome = detail::newton_solve(prob, rho, J, options);
    if (!outcome.converged) {
      std::vector<double> trace = out.back().continuation_trace;
      throw NoConvergence("continuation_solve: Newton failed at eps = " +
                              std::to_string(eps),
                          eps, std::move(trace), std::move(out));
    }

    EpsSolution sol;
    sol.epsilon = eps;
    sol.x = std::move(mesh);
    sol.rho = std::move(rho);
    sol.flux = J;
    sol.residual_norm = outcome.residual;
    sol.newton_iterations = outcome.iterations;
    sol.continuation_trace = out.back().continuation_trace;
    sol.continuation_trace.push_back(eps);
    out.push_back(std::move(sol));
  }
  return out;
}

}  // namespace corridor
