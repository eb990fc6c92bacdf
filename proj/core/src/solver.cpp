#include "torus/solver.hpp"

#include <cmath>
#include <future>

namespace torus {

State seed(const Params& f, const HamiltonianSpec& H, int cutoff) {
  State s;
  s.coord = Coord::trivial(H.dim(), cutoff, f.alpha);
  s.M = -f.k;
  s.m = f.k * f.alpha;
  s.e = H.h0_at_origin() + s.m * f.alpha + 0.5 * s.M * f.alpha * f.alpha;
  return s;
}

ModifiedSolution solve_modified(const Params& f, const HamiltonianSpec& H,
                                const SolveOptions& opts, const State* warm_start) {
  if (std::abs(H.epsilon()) > opts.eps_trust)
    throw NoConvergence(
        "solve_modified: epsilon outside the configured trust region");

  ModifiedSolution out;
  out.params = f;
  out.state = warm_start ? *warm_start : seed(f, H, opts.cutoff);

  ResidualOptions ropt;
  ropt.grid = opts.grid;
  CohomologyOptions copt;
  copt.divisor_floor_rel = opts.divisor_floor_rel;
  SolveStats stats;

  int cutoff = out.state.coord.cutoff();
  for (int it = 0; it < opts.max_newton; ++it) {
    Residual r = phi(f, out.state, H, ropt);
    double rn = r.norm();
    out.residual_history.push_back(rn);
    if (rn <= opts.tol_residual) {
      out.converged = true;
      out.newton_iters = it;
      break;
    }
    // Stalled at truncation level: optionally double the cutoff and retry.
    if (opts.doubling && out.residual_history.size() >= 2) {
      double prev = out.residual_history[out.residual_history.size() - 2];
      if (rn > 0.25 * prev && cutoff < opts.max_cutoff) {
        cutoff *= 2;
        State lifted = out.state;
        lifted.coord.phi0 = out.state.coord.phi0.truncated(cutoff);
        lifted.coord.W11 = out.state.coord.W11.truncated(cutoff);
        lifted.coord.W12 = out.state.coord.W12.truncated(cutoff);
        lifted.coord.W21 = out.state.coord.W21.truncated(cutoff);
        VField u(out.state.coord.dim(), out.state.coord.dim(), cutoff);
        for (int i = 0; i < u.rows(); ++i)
          u[i] = out.state.coord.u[i].truncated(cutoff);
        VField w(2, out.state.coord.dim(), cutoff);
        for (int i = 0; i < 2; ++i)
          w[i] = out.state.coord.w[i].truncated(cutoff);
        lifted.coord.u = u;
        lifted.coord.w = w;
        out.state = lifted;
        continue;
      }
    }
    StateDelta ds = approx_inverse(f, out.state, -r, H, copt, ropt, &stats);
    out.state = apply(out.state, ds);
    // mean(phi0) is pure gauge: only grad(phi0) enters Theta.
    Field& p0 = out.state.coord.phi0;
    p0.at(p0.zero_mode()) = Complex(0, 0);
    p0.enforce_reality();
  }
  if (!out.converged) {
    Residual r = phi(f, out.state, H, ropt);
    double rn = r.norm();
    out.residual_history.push_back(rn);
    if (rn <= opts.tol_residual) out.converged = true;
    out.newton_iters = opts.max_newton;
  }
  out.worst_divisor = stats.worst_divisor;
  if (!out.converged)
    throw NoConvergence("solve_modified: residual " +
                        std::to_string(out.residual_history.back()) +
                        " after max Newton steps");
  return out;
}

SweepTable sweep(const std::vector<double>& alphas, const std::vector<double>& ks,
                 const HamiltonianSpec& H, const SolveOptions& opts) {
  if (alphas.empty() || ks.empty()) throw ConfigError("sweep: empty grids");
  SweepTable table;
  table.alphas = alphas;
  table.ks = ks;
  table.cells.resize(alphas.size() * ks.size());

  auto solve_cell = [&](size_t ik, size_t ia) {
    Params f{alphas[ia], ks[ik]};
    size_t idx = ik * alphas.size() + ia;
    try {
      // Warm start from the previous alpha on the same k-row when available.
      const State* warm = nullptr;
      State prev;
      if (ia > 0 && table.cells[idx - 1].converged) {
        prev = table.cells[idx - 1].state;
        warm = &prev;
      }
      table.cells[idx] = solve_modified(f, H, opts, warm);
    } catch (const Error&) {
      table.cells[idx].params = f;
      table.cells[idx].converged = false;
    }
  };

  if (opts.threads <= 1 || ks.size() == 1) {
    for (size_t ik = 0; ik < ks.size(); ++ik)
      for (size_t ia = 0; ia < alphas.size(); ++ia) solve_cell(ik, ia);
  } else {
    // Each k-row is independent; rows run in parallel, cells within a row
    // stay sequential so warm starts remain deterministic.
    std::vector<std::future<void>> rows;
    for (size_t ik = 0; ik < ks.size(); ++ik)
      rows.push_back(std::async(std::launch::async, [&, ik] {
        for (size_t ia = 0; ia < alphas.size(); ++ia) solve_cell(ik, ia);
      }));
    for (auto& r : rows) r.get();
  }
  return table;
}

}  // namespace torus
