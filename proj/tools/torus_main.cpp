// torus: spectral solver for weakly-hyperbolic lower-dimensional invariant
// tori of near-integrable Hamiltonians. Subcommands: solve, sweep, bifurcate,
// verify. See README.md for the file formats.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "torus/variational.hpp"
#include "torus/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace torus;

namespace {

json field_to_json(const Field& f) {
  json out = json::array();
  f.for_each_mode([&](const Mode& m, const Complex& c) {
    if (std::abs(c) < 1e-16) return;
    json entry = json::array();
    for (int i = 0; i < m.dim; ++i) entry.push_back(m[i]);
    entry.push_back(c.real());
    entry.push_back(c.imag());
    out.push_back(entry);
  });
  return out;
}

json vfield_to_json(const VField& v) {
  json out = json::array();
  for (int i = 0; i < v.rows(); ++i) out.push_back(field_to_json(v[i]));
  return out;
}

json solution_to_json(const ModifiedSolution& sol, const HamiltonianSpec& H) {
  json j;
  j["alpha"] = sol.params.alpha;
  j["k"] = sol.params.k;
  j["epsilon"] = H.epsilon();
  j["cutoff"] = sol.state.coord.cutoff();
  j["converged"] = sol.converged;
  j["newton_iters"] = sol.newton_iters;
  j["residual_history"] = sol.residual_history;
  j["residual"] = sol.residual_history.empty() ? -1.0 : sol.residual_history.back();
  j["worst_divisor"] = sol.worst_divisor;
  j["e"] = sol.state.e;
  j["m"] = sol.state.m;
  j["M"] = sol.state.M;
  json c;
  c["beta"] = std::vector<double>(sol.state.coord.beta.data(),
                                  sol.state.coord.beta.data() +
                                      sol.state.coord.beta.size());
  c["phi0"] = field_to_json(sol.state.coord.phi0);
  c["u"] = vfield_to_json(sol.state.coord.u);
  c["w"] = vfield_to_json(sol.state.coord.w);
  c["W11"] = field_to_json(sol.state.coord.W11);
  c["W12"] = field_to_json(sol.state.coord.W12);
  c["W21"] = field_to_json(sol.state.coord.W21);
  j["coefficients"] = c;
  return j;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << j.dump(2) << "\n";
}

std::vector<double> alpha_grid(int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(2.0 * M_PI * i / n);
  return g;
}

std::vector<double> k_grid(int n) {
  std::vector<double> g;
  if (n == 1) {
    g.push_back(0.0);
    return g;
  }
  for (int i = 0; i < n; ++i) g.push_back(double(i) / (n - 1));
  return g;
}

void write_surface_csv(const fs::path& path, const ActionSurface& surf) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << "alpha,k,psi,m,M,L11,L12,L22\n";
  f.precision(17);
  for (size_t ik = 0; ik < surf.ks.size(); ++ik)
    for (size_t ia = 0; ia < surf.alphas.size(); ++ia) {
      const ActionSample& s = surf.at(ia, ik);
      f << s.alpha << ',' << s.k << ',' << s.psi << ',' << s.m << ',' << s.M
        << ',' << s.L11 << ',' << s.L12 << ',' << s.L22 << "\n";
    }
}

struct Cli {
  std::string input;
  std::string out_dir = ".";
  int cutoff = 32;
  double tol = 1e-11;
  double alpha = 0;
  double k = 0;
  int alpha_grid_n = 8;
  int k_grid_n = 3;
  double horizon = 1e3;
  int samples = 8;
  unsigned seed = 1;
  int threads = 1;
  int max_newton = 20;

  SolveOptions solve_opts() const {
    SolveOptions o;
    o.cutoff = cutoff;
    o.tol_residual = tol;
    o.threads = threads;
    o.max_newton = max_newton;
    return o;
  }
};

int run_solve(const Cli& cli) {
  HamiltonianSpec H = HamiltonianSpec::from_toml_file(cli.input);
  Params f{cli.alpha, cli.k};
  ModifiedSolution sol = solve_modified(f, H, cli.solve_opts());
  write_json(fs::path(cli.out_dir) / "solution.json", solution_to_json(sol, H));
  std::cout << "solve: converged=" << sol.converged
            << " residual=" << sol.residual_history.back() << " m=" << sol.state.m
            << " M=" << sol.state.M << "\n";
  return 0;
}

int run_sweep(const Cli& cli) {
  HamiltonianSpec H = HamiltonianSpec::from_toml_file(cli.input);
  SweepTable table =
      sweep(alpha_grid(cli.alpha_grid_n), k_grid(cli.k_grid_n), H, cli.solve_opts());
  ActionSurface surf = action_surface(table, H);
  write_surface_csv(fs::path(cli.out_dir) / "psi_surface.csv", surf);
  int ok = 0;
  for (const auto& c : table.cells) ok += c.converged ? 1 : 0;
  std::cout << "sweep: " << ok << "/" << table.cells.size() << " cells converged\n";
  return 0;
}

int run_bifurcate(const Cli& cli) {
  HamiltonianSpec H = HamiltonianSpec::from_toml_file(cli.input);
  SweepTable table =
      sweep(alpha_grid(cli.alpha_grid_n), k_grid(cli.k_grid_n), H, cli.solve_opts());
  ActionSurface surf = action_surface(table, H);
  write_surface_csv(fs::path(cli.out_dir) / "psi_surface.csv", surf);
  BifurcationReport rep = minimize_action(table, surf, H, cli.solve_opts());
  json j;
  j["alpha0"] = rep.alpha0;
  j["k0"] = rep.k0;
  j["psi"] = rep.psi;
  j["m"] = rep.m;
  j["M"] = rep.M;
  j["boundary_k0"] = rep.boundary_k0;
  j["degenerate_w1star"] = rep.degenerate_w1star;
  j["flat_landscape"] = rep.flat_landscape;
  j["grid_psi_min"] = rep.grid_psi_min;
  j["refine_evals"] = rep.refine_evals;
  write_json(fs::path(cli.out_dir) / "bifurcation.json", j);
  std::cout << "bifurcate: alpha0=" << rep.alpha0 << " k0=" << rep.k0
            << " |m|=" << std::abs(rep.m) << " |M|=" << std::abs(rep.M) << "\n";
  return 0;
}

int run_verify(const Cli& cli) {
  HamiltonianSpec H = HamiltonianSpec::from_toml_file(cli.input);
  Params f{cli.alpha, cli.k};
  ModifiedSolution sol = solve_modified(f, H, cli.solve_opts());
  write_json(fs::path(cli.out_dir) / "solution.json", solution_to_json(sol, H));
  VerifyOptions vopt;
  vopt.horizon = cli.horizon;
  vopt.samples = cli.samples;
  vopt.seed = cli.seed;
  VerifyReport rep = verify(sol, H, vopt);
  json j;
  j["max_invariance_defect"] = rep.max_invariance_defect;
  j["conjugacy_defect"] = rep.conjugacy_defect;
  j["horizon"] = rep.horizon;
  j["samples"] = rep.samples;
  j["against_modified"] = rep.against_modified;
  j["energy_drift"] = rep.energy_drift;
  j["residual"] = sol.residual_history.back();
  write_json(fs::path(cli.out_dir) / "verify.json", j);
  std::cout << "verify: invariance_defect=" << rep.max_invariance_defect
            << " conjugacy_defect=" << rep.conjugacy_defect << "\n";
  return 0;
}

struct Failure {
  int code;
  const char* category;
};

Failure classify(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return {2, "config"};
  if (dynamic_cast<const ChartSingular*>(&e)) return {3, "chart"};
  if (dynamic_cast<const NoContraction*>(&e)) return {4, "contraction"};
  if (dynamic_cast<const NoConvergence*>(&e)) return {5, "convergence"};
  if (dynamic_cast<const DivisorUnderflow*>(&e)) return {6, "divisor"};
  if (dynamic_cast<const IntegratorFailure*>(&e)) return {7, "integrator"};
  if (dynamic_cast<const Error*>(&e)) return {10, "internal"};
  return {11, "unexpected"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral solver for weakly-hyperbolic invariant tori"};
  app.require_subcommand(1);
  Cli cli;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--input", cli.input, "Hamiltonian spec (TOML)")->required();
    sub->add_option("--out", cli.out_dir, "output directory");
    sub->add_option("--cutoff", cli.cutoff, "Fourier cutoff K");
    sub->add_option("--tol", cli.tol, "Newton residual tolerance");
    sub->add_option("--max-newton", cli.max_newton, "Newton iteration cap");
  };

  CLI::App* solve_cmd = app.add_subcommand("solve", "solve at one (alpha, k)");
  add_common(solve_cmd);
  solve_cmd->add_option("--alpha", cli.alpha, "torus label alpha");
  solve_cmd->add_option("--k", cli.k, "hyperbolicity parameter k");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "sweep the (alpha,k) grid");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--alpha-grid", cli.alpha_grid_n, "alpha grid size");
  sweep_cmd->add_option("--k-grid", cli.k_grid_n, "k grid size");
  sweep_cmd->add_option("--threads", cli.threads, "parallel sweep rows");

  CLI::App* bif_cmd = app.add_subcommand("bifurcate", "locate m = M = 0");
  add_common(bif_cmd);
  bif_cmd->add_option("--alpha-grid", cli.alpha_grid_n, "alpha grid size")
      ->default_val(64);
  bif_cmd->add_option("--k-grid", cli.k_grid_n, "k grid size")->default_val(17);
  bif_cmd->add_option("--threads", cli.threads, "parallel sweep rows");

  CLI::App* ver_cmd = app.add_subcommand("verify", "integrate and check invariance");
  add_common(ver_cmd);
  ver_cmd->add_option("--alpha", cli.alpha, "torus label alpha");
  ver_cmd->add_option("--k", cli.k, "hyperbolicity parameter k");
  ver_cmd->add_option("--horizon", cli.horizon, "integration horizon");
  ver_cmd->add_option("--samples", cli.samples, "trajectory samples");
  ver_cmd->add_option("--seed", cli.seed, "rng seed for samples");

  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(cli.out_dir);
    if (solve_cmd->parsed()) return run_solve(cli);
    if (sweep_cmd->parsed()) return run_sweep(cli);
    if (bif_cmd->parsed()) return run_bifurcate(cli);
    if (ver_cmd->parsed()) return run_verify(cli);
  } catch (const std::exception& e) {
    Failure f = classify(e);
    json err;
    err["error"]["category"] = f.category;
    err["error"]["message"] = e.what();
    std::cerr << err.dump() << "\n";
    return f.code;
  }
  return 1;
}
