#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "corridor/analysis.hpp"
#include "corridor/io.hpp"

using namespace corridor;
using Catch::Approx;

namespace {

const WidthProfile& cosine_profile() {
  static const WidthProfile p = WidthProfile::cosine(0.3, 1.5);
  return p;
}

const CanardData& cosine_canard() {
  static const CanardData c = canard_data(cosine_profile(), validate(cosine_profile()));
  return c;
}

}  // namespace

TEST_CASE("hausdorff distance basics") {
  std::vector<std::pair<double, double>> a, b;
  for (int i = 0; i <= 100; ++i) {
    const double x = i / 100.0;
    a.emplace_back(x, 0.3 + 0.1 * std::sin(3.0 * x));
  }
  CHECK(hausdorff_distance(a, a) == 0.0);

  // Vertical translation of a curve with flat spots realizes the shift.
  const double delta = 0.017;
  b = a;
  for (auto& [x, y] : b) y += delta;
  CHECK(hausdorff_distance(a, b) == Approx(delta).margin(1e-6));

  CHECK_THROWS_AS(hausdorff_distance(a, {{0.0, 0.0}}), DimensionMismatch);
}

TEST_CASE("hausdorff distance between singular orbit and its solve") {
  const auto& p = cosine_profile();
  const auto& c = cosine_canard();
  const auto orbit = build_singular(0.1, 0.4, p, c, classify(0.1, 0.4, c), 4001);
  const auto sol = solve(p, 0.1, 0.4, 1e-3);
  const double d = hausdorff_distance(orbit, sol);
  CHECK(d > 0.0);
  CHECK(d < 0.05);
}

TEST_CASE("convergence report fits the decay rate") {
  const std::vector<double> eps_list = {1.6e-2, 8e-3, 4e-3, 2e-3};
  const auto rep = convergence_rate(cosine_profile(), 0.1, 0.4, eps_list);
  REQUIRE(rep.pairs.size() == 4);
  CHECK(rep.expected_mu == 1.0);
  CHECK(rep.label.is_region(1));
  for (std::size_t i = 1; i < rep.pairs.size(); ++i) {
    CHECK(rep.pairs[i].first < rep.pairs[i - 1].first);
    CHECK(rep.pairs[i].second < rep.pairs[i - 1].second);  // strictly decreasing
  }
  CHECK(rep.mu_hat > 0.5);
  CHECK(rep.mu_hat < 1.5);
  CHECK(rep.r_squared > 0.9);

  CHECK_THROWS_AS(convergence_rate(cosine_profile(), 0.1, 0.4, {8e-3, 4e-3, 2e-3}),
                  DomainError);
  // Boundary parameters are refused.
  const double b17 = rho_star_forward(0.1, cosine_canard());
  CHECK_THROWS_AS(convergence_rate(cosine_profile(), 0.1, b17, eps_list), OutOfScope);
}

TEST_CASE("sweep classifies the grid and stays consistent with flux_singular") {
  const auto table = sweep(cosine_profile(), 3);
  REQUIRE(table.cells.size() == 9);
  // Center cell (0.5, 0.5) sits in G3.
  const auto& center = table.cells[4];
  CHECK(center.alpha == Approx(0.5));
  CHECK(center.beta == Approx(0.5));
  CHECK(center.label.is_region(3));
  CHECK(center.flux_singular == Approx(0.175).margin(1e-14));

  const auto& c = cosine_canard();
  for (const auto& cell : table.cells) {
    if (cell.label.kind != RegionLabel::Kind::region) continue;
    CHECK(cell.flux_singular ==
          Approx(flux_singular(cell.alpha, cell.beta, c, cell.label)).margin(1e-12));
  }
}

TEST_CASE("sweep with epsilon fills fluxes and fingerprints") {
  SolverOptions opts;
  const auto table = sweep(cosine_profile(), 3, 5e-3, opts, 2);
  for (const auto& cell : table.cells) {
    INFO("alpha=" << cell.alpha << " beta=" << cell.beta << " err=" << cell.error);
    REQUIRE(cell.error.empty());
    REQUIRE(cell.flux_eps.has_value());
    CHECK(*cell.flux_eps > 0.0);
    CHECK(*cell.flux_eps < 0.33);
    for (double r : cell.fingerprint) {
      CHECK(r >= 0.0);
      CHECK(r <= 1.0);
    }
    if (cell.label.kind == RegionLabel::Kind::region)
      CHECK(*cell.flux_eps == Approx(cell.flux_singular).margin(0.05));
  }
}

TEST_CASE("narrow necks enlarge the transitional area fraction") {
  const auto wide = sweep(WidthProfile::supergaussian(1.0, 0.9, 0.2, 0.6), 50);
  const auto narrow = sweep(WidthProfile::supergaussian(1.0, 0.5, 0.2, 0.6), 50);
  CHECK(transitional_area_fraction(narrow) > transitional_area_fraction(wide));
}

TEST_CASE("singular flux map equals the capped flat-corridor flux") {
  // Supergaussian ends have width 1 up to below double precision, so the
  // min-identity holds cellwise: J_k = min(J_1, min k / 4).
  const auto p = WidthProfile::supergaussian(1.0, 0.5, 0.2, 0.6);
  const auto table = sweep(p, 40);
  const double cap = 0.25 * validate(p).k_min;
  int checked = 0;
  for (const auto& cell : table.cells) {
    if (cell.label.kind != RegionLabel::Kind::region) continue;
    ++checked;
    const double expected = std::min(flat_corridor_flux(cell.alpha, cell.beta), cap);
    CHECK(cell.flux_singular == Approx(expected).margin(1e-10));
  }
  CHECK(checked > 1500);
}

TEST_CASE("sweep output is deterministic") {
  std::ostringstream a, b;
  write_sweep_csv(a, sweep(cosine_profile(), 12, std::nullopt, {}, 2));
  write_sweep_csv(b, sweep(cosine_profile(), 12, std::nullopt, {}, 2));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("alpha,beta,region,flux_singular\n", 0) == 0);
}

TEST_CASE("csv and json emission round out") {
  const auto& p = cosine_profile();
  const auto& c = cosine_canard();
  const auto orbit = build_singular(0.3, 0.6, p, c, classify(0.3, 0.6, c), 401);

  std::ostringstream os;
  write_orbit_csv(os, orbit);
  const auto text = os.str();
  CHECK(text.rfind("x,rho,piece\n", 0) == 0);
  CHECK(text.find(",entry_layer") != std::string::npos);
  CHECK(text.find(",slow") != std::string::npos);
  CHECK(text.find(",exit_layer") != std::string::npos);

  const auto j = to_json(orbit);
  CHECK(j["type"] == 3);
  CHECK(j["flux"] == Approx(0.175));

  const auto info = validate(p);
  CHECK(to_json(info)["assumption_ok"] == true);
  CHECK(to_json(classify(0.3, 0.6, c))["label"] == "G3");

  const auto sol = solve(p, 0.3, 0.6, 2e-2);
  std::ostringstream ss;
  write_solution_csv(ss, sol);
  CHECK(ss.str().rfind("x,rho\n", 0) == 0);
  const auto meta = solution_meta_json(sol, 0.3, 0.6);
  CHECK(meta["epsilon"] == Approx(2e-2));
  CHECK(meta["residual_norm"].get<double>() <= 1e-10);

  std::ostringstream cs;
  write_curves_csv(cs, boundary_curves(c, 16));
  CHECK(cs.str().find("gamma17") != std::string::npos);
}
