#ifndef TORUS_SOLVER_HPP
#define TORUS_SOLVER_HPP

#include <optional>
#include <vector>

#include "torus/cohomology.hpp"

namespace torus {

struct SolveOptions {
  int cutoff = 32;
  double tol_residual = 1e-11;
  int max_newton = 20;
  double divisor_floor_rel = 1e-8;
  bool doubling = false;       // optional cutoff doubling when stalled
  int max_cutoff = 128;
  double eps_trust = 0.05;     // refuse |epsilon| beyond this
  int grid = 0;                // composition grid override
  int threads = 1;             // sweep parallelism
};

struct ModifiedSolution {
  Params params;
  State state;
  std::vector<double> residual_history;
  double worst_divisor = std::numeric_limits<double>::infinity();
  bool converged = false;
  int newton_iters = 0;
};

// Exact solution of the unmodified problem at epsilon = 0:
// phi0(alpha), e = H0(0,0) + m alpha + M alpha^2 / 2, m = k alpha, M = -k.
State seed(const Params& f, const HamiltonianSpec& H, int cutoff);

ModifiedSolution solve_modified(const Params& f, const HamiltonianSpec& H,
                                const SolveOptions& opts,
                                const State* warm_start = nullptr);

struct SweepTable {
  std::vector<double> alphas;
  std::vector<double> ks;
  std::vector<ModifiedSolution> cells;  // row-major, alpha fastest

  const ModifiedSolution& at(int ia, int ik) const {
    return cells[size_t(ik) * alphas.size() + size_t(ia)];
  }
};

SweepTable sweep(const std::vector<double>& alphas, const std::vector<double>& ks,
                 const HamiltonianSpec& H, const SolveOptions& opts);

}  // namespace torus

#endif
