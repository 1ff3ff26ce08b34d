// Command-line front end: classification, singular profiles, finite-diffusion
// solves and parameter sweeps, with CSV/JSON output for plotting tools.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "corridor/analysis.hpp"
#include "corridor/bvp_solver.hpp"
#include "corridor/io.hpp"
#include "corridor/region_atlas.hpp"
#include "corridor/singular_profile.hpp"
#include "corridor/width_profile.hpp"

namespace {

struct Cli {
  std::string profile_spec;
  std::string out_path;
  std::string format = "csv";
  double alpha = 0.0, beta = 0.0;
  double eps = 0.0;
  int grid = 50;
  int mesh = 0;
  int samples = 2001;
  int threads = 0;
  double tol = 1e-9;
  std::string eps_list;
  std::string guess = "singular";

  bool has_alpha = false, has_beta = false, has_eps = false;
};

std::vector<double> parse_eps_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    out.push_back(std::stod(token));
  }
  return out;
}

// Writes with --out, falls back to stdout.
int with_output(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  if (path.empty()) {
    fn(std::cout);
    return 0;
  }
  std::ofstream os(path);
  if (!os) {
    std::cerr << "error: cannot open output file '" << path << "'\n";
    return 1;
  }
  fn(os);
  return 0;
}

std::string sidecar_path(const std::string& path) {
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of("/\\");
  std::string base = (dot == std::string::npos || (slash != std::string::npos && dot < slash))
                         ? path
                         : path.substr(0, dot);
  std::string candidate = base + ".json";
  return candidate == path ? path + ".meta.json" : candidate;
}

int require_rates(const Cli& cli) {
  if (!cli.has_alpha || !cli.has_beta) {
    std::cerr << "usage error: this subcommand needs --alpha and --beta\n";
    return 2;
  }
  return 0;
}

corridor::SolverOptions solver_options(const Cli& cli) {
  corridor::SolverOptions opts;
  opts.mesh_size = cli.mesh;
  opts.initial_guess = cli.guess == "half"
                           ? corridor::SolverOptions::InitialGuess::constant_half
                           : corridor::SolverOptions::InitialGuess::singular_orbit;
  return opts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stationary corridor-bottleneck profiles: singular construction,"
               " region atlas, and finite-diffusion solves"};
  app.require_subcommand(0, 1);
  app.set_config("--config", "", "key=value file with defaults for all flags");

  Cli cli;
  app.add_option("--profile", cli.profile_spec,
                 "width profile: cosine:a=..,b=.. | supergauss:we=..,wm=..,d=..,xi0=.. |"
                 " table:file.csv");
  app.add_option("--out", cli.out_path, "output file (default: stdout)");
  app.add_option("--format", cli.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  auto* oa = app.add_option("--alpha", cli.alpha, "inflow rate in (0,1)");
  auto* ob = app.add_option("--beta", cli.beta, "outflow rate in (0,1)");
  auto* oe = app.add_option("--eps", cli.eps, "diffusion coefficient");
  app.add_option("--grid", cli.grid, "sweep grid size per axis");
  app.add_option("--mesh", cli.mesh, "solver mesh cells (0 = automatic)");
  app.add_option("--samples", cli.samples, "samples for singular profiles");
  app.add_option("--threads", cli.threads, "sweep worker threads (0 = hardware)");
  app.add_option("--tol", cli.tol, "classification tolerance");
  app.add_option("--eps-list", cli.eps_list, "comma-separated decreasing epsilons");
  app.add_option("--guess", cli.guess, "solver initial guess: singular or half")
      ->check(CLI::IsMember({"singular", "half"}));

  auto* cmd_validate = app.add_subcommand("validate-k", "check the bottleneck assumption");
  auto* cmd_classify = app.add_subcommand("classify", "label an (alpha,beta) pair");
  auto* cmd_singular = app.add_subcommand("singular", "assemble the singular profile");
  auto* cmd_solve = app.add_subcommand("solve", "solve the stationary problem at eps > 0");
  auto* cmd_sweep = app.add_subcommand("sweep", "classify and solve over a grid");
  auto* cmd_fluxmap = app.add_subcommand("flux-map", "singular flux over a grid");
  auto* cmd_converge = app.add_subcommand("converge", "Hausdorff convergence-rate study");
  for (auto* sub : {cmd_validate, cmd_classify, cmd_singular, cmd_solve, cmd_sweep,
                    cmd_fluxmap, cmd_converge})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  cli.has_alpha = oa->count() > 0;
  cli.has_beta = ob->count() > 0;
  cli.has_eps = oe->count() > 0;

  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 2;
  }
  if (cli.profile_spec.empty()) {
    std::cerr << "usage error: --profile is required\n";
    return 2;
  }

  using namespace corridor;
  try {
    const WidthProfile profile = parse_profile_spec(cli.profile_spec);

    if (cmd_validate->parsed()) {
      const auto info = validate(profile, cli.tol);
      nlohmann::json j = to_json(info);
      return with_output(cli.out_path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    }

    if (cmd_classify->parsed()) {
      if (int rc = require_rates(cli)) return rc;
      const auto canard = canard_data(profile, validate(profile));
      const auto label = classify(cli.alpha, cli.beta, canard, cli.tol);
      nlohmann::json j = to_json(label);
      j["alpha"] = cli.alpha;
      j["beta"] = cli.beta;
      const int rc =
          with_output(cli.out_path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
      if (label.kind == RegionLabel::Kind::out_of_domain) {
        std::cerr << "error: rates outside (0,1)^2\n";
        return 1;
      }
      return rc;
    }

    if (cmd_singular->parsed()) {
      if (int rc = require_rates(cli)) return rc;
      const auto canard = canard_data(profile, validate(profile));
      const auto label = classify(cli.alpha, cli.beta, canard, cli.tol);
      try {
        const auto orbit =
            build_singular(cli.alpha, cli.beta, profile, canard, label, cli.samples);
        if (cli.format == "json") {
          return with_output(cli.out_path,
                             [&](std::ostream& os) { os << to_json(orbit).dump(2) << '\n'; });
        }
        return with_output(cli.out_path,
                           [&](std::ostream& os) { write_orbit_csv(os, orbit); });
      } catch (const DegenerateParameters& e) {
        std::cerr << "degenerate parameters: " << e.what() << '\n';
        if (e.family && !cli.out_path.empty()) {
          std::ofstream os(cli.out_path);
          os << to_json(*e.family).dump(2) << '\n';
          std::cerr << "wrote the two extreme solutions to " << cli.out_path << '\n';
        }
        return 1;
      }
    }

    if (cmd_solve->parsed()) {
      if (int rc = require_rates(cli)) return rc;
      if (!cli.has_eps) {
        std::cerr << "usage error: solve needs --eps\n";
        return 2;
      }
      const auto sol = solve(profile, cli.alpha, cli.beta, cli.eps, solver_options(cli));
      if (cli.format == "json") {
        return with_output(cli.out_path, [&](std::ostream& os) {
          os << to_json(sol, cli.alpha, cli.beta).dump(2) << '\n';
        });
      }
      const int rc =
          with_output(cli.out_path, [&](std::ostream& os) { write_solution_csv(os, sol); });
      if (rc == 0 && !cli.out_path.empty()) {
        std::ofstream meta(sidecar_path(cli.out_path));
        meta << solution_meta_json(sol, cli.alpha, cli.beta).dump(2) << '\n';
      }
      return rc;
    }

    if (cmd_sweep->parsed()) {
      std::optional<double> eps;
      if (cli.has_eps) eps = cli.eps;
      const auto table = sweep(profile, cli.grid, eps, solver_options(cli), cli.threads);
      return with_output(cli.out_path, [&](std::ostream& os) { write_sweep_csv(os, table); });
    }

    if (cmd_fluxmap->parsed()) {
      const auto table = sweep(profile, cli.grid, std::nullopt, {}, cli.threads);
      return with_output(cli.out_path,
                         [&](std::ostream& os) { write_flux_map_csv(os, table); });
    }

    if (cmd_converge->parsed()) {
      if (int rc = require_rates(cli)) return rc;
      const auto eps_list = parse_eps_list(cli.eps_list);
      if (eps_list.size() < 4) {
        std::cerr << "usage error: converge needs --eps-list with at least 4 values\n";
        return 2;
      }
      const auto rep =
          convergence_rate(profile, cli.alpha, cli.beta, eps_list, solver_options(cli));
      if (cli.format == "json") {
        return with_output(cli.out_path,
                           [&](std::ostream& os) { os << to_json(rep).dump(2) << '\n'; });
      }
      const int rc = with_output(cli.out_path,
                                 [&](std::ostream& os) { write_convergence_csv(os, rep); });
      if (rc == 0 && !cli.out_path.empty()) {
        std::ofstream meta(sidecar_path(cli.out_path));
        nlohmann::json j = to_json(rep);
        j.erase("pairs");
        meta << j.dump(2) << '\n';
      }
      return rc;
    }
  } catch (const CLI::ParseError&) {
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
