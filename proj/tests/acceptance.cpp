// Acceptance suite: end-to-end checks of the singular construction, the
// region atlas, the finite-diffusion solver and the convergence rates.
// One pass/fail line per criterion; exit code 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "corridor/analysis.hpp"
#include "corridor/bvp_solver.hpp"
#include "corridor/region_atlas.hpp"
#include "corridor/singular_profile.hpp"
#include "corridor/slow_fast.hpp"
#include "corridor/width_profile.hpp"

using namespace corridor;

namespace {

int g_failures = 0;

class Criterion {
 public:
  Criterion(int id, std::string title)
      : id_(id), title_(std::move(title)), start_(std::chrono::steady_clock::now()) {}

  void require(bool ok, const std::string& detail) {
    if (!ok && first_failure_.empty()) first_failure_ = detail;
    ok_ = ok_ && ok;
    ++checks_;
  }

  ~Criterion() {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start_)
                        .count();
    if (ok_) {
      std::printf("[PASS] criterion %d: %s (%d checks, %lld ms)\n", id_, title_.c_str(),
                  checks_, static_cast<long long>(ms));
    } else {
      std::printf("[FAIL] criterion %d: %s -- %s\n", id_, title_.c_str(),
                  first_failure_.c_str());
      ++g_failures;
    }
    std::fflush(stdout);
  }

 private:
  int id_;
  std::string title_;
  std::chrono::steady_clock::time_point start_;
  bool ok_ = true;
  int checks_ = 0;
  std::string first_failure_;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double bisect_on_H(const WidthProfile& p, double xi, double level, double lo, double hi) {
  auto f = [&](double r) { return conserved_H(p, xi, r) - level; };
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(lo) * f(mid) <= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

int main() {
  const auto cosine = WidthProfile::cosine(0.3, 1.5);
  const auto cos_info = validate(cosine);
  const auto cos_canard = canard_data(cosine, cos_info);

  {  // 1. Canard endpoints: closed form vs independent bisection on H.
    Criterion c(1, "canard endpoints match the H-level bisection oracle to 1e-12");
    const double hc = 0.25 * cos_info.k_min;
    const double rc0_oracle = bisect_on_H(cosine, 0.0, hc, 0.0, 0.5);
    const double rc1_oracle = bisect_on_H(cosine, 1.0, hc, 0.5, 1.0);
    c.require(std::abs(cos_canard.rho_c0 - rc0_oracle) <= 1e-12,
              "rho_c0 off by " + num(std::abs(cos_canard.rho_c0 - rc0_oracle)));
    c.require(std::abs(cos_canard.rho_c1 - rc1_oracle) <= 1e-12,
              "rho_c1 off by " + num(std::abs(cos_canard.rho_c1 - rc1_oracle)));
  }

  {  // 2. Region atlas: the eight published pairs plus a full 100x100 tiling.
    Criterion c(2, "atlas: caption pairs classify as labeled, 100x100 sweep tiles");
    const std::vector<std::pair<std::pair<double, double>, int>> cases = {
        {{0.1, 0.4}, 1}, {{0.1, 0.9}, 2}, {{0.3, 0.6}, 3}, {{0.3, 0.8}, 4},
        {{0.9, 0.6}, 5}, {{0.9, 0.8}, 6}, {{0.7, 0.2}, 7}, {{0.9, 0.2}, 8}};
    for (const auto& [ab, expected] : cases) {
      const auto label = classify(ab.first, ab.second, cos_canard);
      c.require(label.is_region(expected), "(" + num(ab.first) + "," + num(ab.second) +
                                               ") -> " + label.name() + ", expected G" +
                                               std::to_string(expected));
    }
    const auto table = sweep(cosine, 100);
    int labeled = 0;
    int region_counts[9] = {0};
    for (const auto& cell : table.cells) {
      if (cell.label.kind != RegionLabel::Kind::out_of_domain) ++labeled;
      if (cell.label.kind == RegionLabel::Kind::region) ++region_counts[cell.label.region];
    }
    c.require(labeled == 100 * 100, "unlabeled interior cells: " +
                                        std::to_string(100 * 100 - labeled));
    for (int r = 1; r <= 8; ++r)
      c.require(region_counts[r] > 0, "region G" + std::to_string(r) + " never appears");
  }

  {  // 3. Singular-orbit identities on a 50x50 interior grid.
    Criterion c(3, "orbit identities on 50x50: flux, boundary conditions, types");
    int built = 0;
    for (int i = 1; i <= 50 && built >= 0; ++i) {
      for (int j = 1; j <= 50; ++j) {
        const double a = i / 51.0, b = j / 51.0;
        const auto label = classify(a, b, cos_canard);
        if (label.kind != RegionLabel::Kind::region) continue;
        const auto o = build_singular(a, b, cosine, cos_canard, label, 501);
        ++built;
        const std::string at = " at (" + num(a) + "," + num(b) + ")";
        double worst = 0.0;
        for (std::size_t s = 0; s < o.slow.size(); ++s)
          worst = std::max(worst, std::abs(cosine.k(o.slow.xi[s]) * o.slow.rho[s] *
                                               (1.0 - o.slow.rho[s]) -
                                           o.flux));
        c.require(worst <= 1e-10, "flux drift " + num(worst) + at);
        c.require(std::abs(cos_info.k0 * a * (1.0 - o.rho0) - o.flux) <= 1e-10,
                  "entry boundary identity" + at);
        c.require(std::abs(cos_info.k1 * b * o.rho1 - o.flux) <= 1e-10,
                  "exit boundary identity" + at);
        c.require(o.rho0 >= rho_admissible_left(a) - 1e-12, "rho0 inadmissible" + at);
        c.require(o.rho1 <= rho_admissible_right(b) + 1e-12, "rho1 inadmissible" + at);
        c.require(o.type_index == label.region, "type != region" + at);
        c.require(o.entry_layer.has_value() == (label.region >= 3),
                  "entry-layer presence" + at);
        c.require(o.exit_layer.has_value() == (label.region <= 6),
                  "exit-layer presence" + at);
        c.require(o.slow.canard_crossing == (label.region >= 3 && label.region <= 6),
                  "canard crossing" + at);
      }
    }
    c.require(built > 2300, "too few interior cells built: " + std::to_string(built));
  }

  {  // 4. Layer-endpoint formulas against the layer-limit computations.
    Criterion c(4, "layer endpoints match the layer-limit roots to 1e-10");
    for (int i = 1; i <= 20; ++i) {
      for (int j = 1; j <= 20; ++j) {
        const double a = i / 21.0, b = j / 21.0;
        const auto label = classify(a, b, cos_canard);
        if (label.kind != RegionLabel::Kind::region) continue;
        const std::string at = " at (" + num(a) + "," + num(b) + ")";
        if (label.region <= 2) {
          const double rho1 = a * (1.0 - a) * cos_info.k0 / (b * cos_info.k1);
          const double rs = rho_star_forward(a, cos_canard);
          c.require(std::abs(layer_limit_exit(b, rho1) - rs) <= 1e-10,
                    "case-1 exit root" + at);
        } else if (label.region <= 6) {
          const double hc = 0.25 * cos_info.k_min;
          const double rho0 = 1.0 - hc / (a * cos_info.k0);
          const double rho1 = hc / (b * cos_info.k1);
          c.require(std::abs(layer_limit_entrance(a, rho0) - (1.0 - cos_canard.rho_c0)) <=
                        1e-10,
                    "case-2 entrance root" + at);
          c.require(std::abs(layer_limit_exit(b, rho1) - (1.0 - cos_canard.rho_c1)) <=
                        1e-10,
                    "case-2 exit root" + at);
        } else {
          const double rho0 = 1.0 - b * (1.0 - b) * cos_info.k1 / (a * cos_info.k0);
          const double rs = rho_star_backward(b, cos_canard);
          c.require(std::abs(layer_limit_entrance(a, rho0) - rs) <= 1e-10,
                    "case-3 entrance root" + at);
        }
      }
    }
  }

  {  // 5. Solver: manufactured order, residuals, bounds, uniqueness per region.
    Criterion c(5, "solver: order 2.0 +/- 0.2, residual <= 1e-10, uniqueness per region");
    {
      std::vector<std::pair<double, double>> knots;
      for (int i = 0; i <= 10; ++i) knots.emplace_back(i / 10.0, 1.0);
      const auto flat_profile = WidthProfile::tabulated(knots);
      const double eps = 0.05, J = 0.15;
      auto rho_hat = [](double x) { return 0.5 + 0.3 * std::sin(detail::pi * x); };
      auto rho_hat_d = [](double x) { return 0.3 * detail::pi * std::cos(detail::pi * x); };
      SolverOptions opts;
      opts.grading = SolverOptions::Grading::uniform;
      opts.use_continuation = false;
      opts.initial_guess = SolverOptions::InitialGuess::constant_half;
      opts.forcing = [&](double x) {
        return eps * rho_hat_d(x) - rho_hat(x) * (1.0 - rho_hat(x)) + J;
      };
      const double alpha = J / (1.0 - rho_hat(0.0));
      const double beta = J / rho_hat(1.0);
      std::vector<double> errs;
      for (int n : {500, 1000, 2000}) {
        opts.mesh_size = n;
        const auto sol = solve(flat_profile, alpha, beta, eps, opts);
        double e = 0.0;
        for (std::size_t i = 0; i < sol.x.size(); ++i)
          e = std::max(e, std::abs(sol.rho[i] - rho_hat(sol.x[i])));
        errs.push_back(e);
      }
      const double order01 = std::log2(errs[0] / errs[1]);
      const double order12 = std::log2(errs[1] / errs[2]);
      const double order = 0.5 * (order01 + order12);
      c.require(order >= 1.8 && order <= 2.2, "manufactured order " + num(order));
    }
    const std::vector<std::pair<double, double>> pairs = {
        {0.1, 0.4}, {0.1, 0.9}, {0.3, 0.6}, {0.3, 0.8},
        {0.9, 0.6}, {0.9, 0.8}, {0.7, 0.2}, {0.9, 0.2}};
    for (const auto& [a, b] : pairs) {
      SolverOptions sing, half;
      sing.initial_guess = SolverOptions::InitialGuess::singular_orbit;
      half.initial_guess = SolverOptions::InitialGuess::constant_half;
      const auto s1 = solve(cosine, a, b, 1e-3, sing);
      const auto s2 = solve(cosine, a, b, 1e-3, half);
      const std::string at = " at (" + num(a) + "," + num(b) + ")";
      c.require(s1.residual_norm <= 1e-10, "residual" + at);
      c.require(s2.residual_norm <= 1e-10, "residual (constant guess)" + at);
      double in_bounds = true, diff = 0.0;
      for (double r : s1.rho) in_bounds = in_bounds && r >= 0.0 && r <= 1.0;
      const auto interp = detail::interp_linear(s2.x, s2.rho, s1.x);
      for (std::size_t i = 0; i < s1.x.size(); ++i)
        diff = std::max(diff, std::abs(s1.rho[i] - interp[i]));
      c.require(in_bounds, "solution leaves [0,1]" + at);
      c.require(diff < 1e-8, "two guesses differ by " + num(diff) + at);
    }
  }

  {  // 6. Theorem-style rates at desk scale.
    Criterion c(6, "Hausdorff rates: mu in [0.6,1.4] (G1,G8), [0.3,0.8] (G4,G5)");
    const std::vector<double> eps_list = {8e-3, 4e-3, 2e-3, 1e-3};
    struct Case {
      double a, b, lo, hi;
      const char* name;
    };
    const std::vector<Case> cases = {{0.1, 0.4, 0.6, 1.4, "G1"},
                                     {0.9, 0.2, 0.6, 1.4, "G8"},
                                     {0.3, 0.8, 0.3, 0.8, "G4"},
                                     {0.9, 0.6, 0.3, 0.8, "G5"}};
    for (const auto& cs : cases) {
      const auto rep = convergence_rate(cosine, cs.a, cs.b, eps_list);
      bool decreasing = true;
      for (std::size_t i = 1; i < rep.pairs.size(); ++i)
        decreasing = decreasing && rep.pairs[i].second < rep.pairs[i - 1].second;
      c.require(decreasing, std::string(cs.name) + ": distances not strictly decreasing");
      c.require(rep.mu_hat >= cs.lo && rep.mu_hat <= cs.hi,
                std::string(cs.name) + ": mu_hat " + num(rep.mu_hat) + " outside [" +
                    num(cs.lo) + "," + num(cs.hi) + "]");
      std::printf("       %s: mu_hat = %.3f (expected %.1f, r^2 = %.4f)\n", cs.name,
                  rep.mu_hat, rep.expected_mu, rep.r_squared);
    }
  }

  {  // 7. Flux saturation at the neck and the capped flat-corridor identity.
    Criterion c(7, "flux saturates at wm/4; singular map = min(J_1, min k / 4)");
    for (double wm : {0.9, 0.5}) {
      const auto sg = WidthProfile::supergaussian(1.0, wm, 0.2, 0.6);
      const auto sol = solve(sg, 0.5, 0.5, 1e-3);
      const double target = 0.25 * wm;
      c.require(std::abs(sol.flux - target) / target < 0.10,
                "wm=" + num(wm) + ": flux " + num(sol.flux) + " vs " + num(target));
    }
    const auto sg = WidthProfile::supergaussian(1.0, 0.5, 0.2, 0.6);
    const double cap = 0.25 * validate(sg).k_min;
    const auto table = sweep(sg, 50);
    int checked = 0;
    for (const auto& cell : table.cells) {
      if (cell.label.kind != RegionLabel::Kind::region) continue;
      ++checked;
      const double expected = std::min(flat_corridor_flux(cell.alpha, cell.beta), cap);
      if (std::abs(cell.flux_singular - expected) > 1e-10) {
        c.require(false, "identity off at (" + num(cell.alpha) + "," + num(cell.beta) +
                             "): " + num(cell.flux_singular) + " vs " + num(expected));
        break;
      }
    }
    c.require(checked > 2300, "too few cells checked: " + std::to_string(checked));
  }

  {  // 8. Narrower neck -> strictly larger transitional area.
    Criterion c(8, "transitional area fraction grows as the neck narrows");
    const auto wide = sweep(WidthProfile::supergaussian(1.0, 0.9, 0.2, 0.6), 50);
    const auto narrow = sweep(WidthProfile::supergaussian(1.0, 0.5, 0.2, 0.6), 50);
    const double fw = transitional_area_fraction(wide);
    const double fn = transitional_area_fraction(narrow);
    c.require(fn > fw, "fractions " + num(fn) + " (wm=0.5) vs " + num(fw) + " (wm=0.9)");
  }

  {  // 9. Degenerate detection on gamma17.
    Criterion c(9, "gamma17 detection and the jump-window [0,1] family");
    for (double a : {0.05, 0.1, 0.15}) {
      const double b = rho_star_forward(a, cos_canard);
      const auto label = classify(a, b, cos_canard);
      c.require(label.kind == RegionLabel::Kind::boundary && label.curve == Curve::g17,
                "classify(" + num(a) + ", rho*(alpha)) -> " + label.name());
      bool threw = false;
      try {
        build_singular(a, b, cosine, cos_canard, label);
      } catch (const DegenerateParameters& e) {
        threw = true;
        c.require(e.family.has_value(), "family missing at alpha=" + num(a));
        if (e.family) {
          c.require(e.family->jump_lo == 0.0 && e.family->jump_hi == 1.0,
                    "jump window not [0,1] at alpha=" + num(a));
          c.require(std::abs(e.family->rho0 - a) <= 1e-12, "family rho0 != alpha");
        }
      }
      c.require(threw, "no DegenerateParameters raised at alpha=" + num(a));
    }
  }

  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", g_failures);
  return 1;
}
