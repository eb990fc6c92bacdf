#ifndef TORUS_VARIATIONAL_HPP
#define TORUS_VARIATIONAL_HPP

#include "torus/solver.hpp"

namespace torus {

// Solutions of the two Jacobi systems; the parameter derivatives of the torus
// family are their linear combinations.
struct JacobiSet {
  VField mu1, lambda1, chi1;
  double p1 = 0;
  VField mu2, lambda2, chi2;
  double p2 = 0;
  double gamma_residue = 0;  // Gamma/dM defect of the reduced solves
};

JacobiSet jacobi(const Params& f, const ModifiedSolution& sol,
                 const HamiltonianSpec& H, const CohomologyOptions& copt = {},
                 const ResidualOptions& ropt = {});

struct QForm {
  double L11 = 0, L12 = 0, L22 = 0;
};

QForm qform(const JacobiSet& js, const LinCoeffs& lc, double k, const Freq& freq);

// Percival action of the computed torus, with the original Hamiltonian.
double action(const Params& f, const ModifiedSolution& sol,
              const HamiltonianSpec& H, const ResidualOptions& ropt = {});

struct ActionSample {
  double alpha = 0, k = 0;
  double psi = 0;
  double m = 0, M = 0;
  double L11 = 0, L12 = 0, L22 = 0;
  double sigma1 = 0, sigma2 = 0;      // secular integrals from w1*
  double dpsi_dalpha_id = 0;          // identity value (2pi)^{n-1}(m+aM)+s1*M
  double dpsi_dk_id = 0;              // identity value M dM/dk L22
  double fd_dalpha = 0, fd_dk = 0;    // finite differences over the grid
  double dM_dk_fd = 0;
  bool converged = false;
};

struct ActionSurface {
  std::vector<double> alphas, ks;
  std::vector<ActionSample> samples;  // row-major, alpha fastest

  const ActionSample& at(size_t ia, size_t ik) const {
    return samples[ik * alphas.size() + ia];
  }
};

ActionSurface action_surface(const SweepTable& table, const HamiltonianSpec& H,
                             const CohomologyOptions& copt = {},
                             const ResidualOptions& ropt = {});

struct BifurcationReport {
  double alpha0 = 0, k0 = 0;
  double psi = 0;
  double m = 0, M = 0;
  bool boundary_k0 = false;      // minimizer classified at k = 0
  bool degenerate_w1star = false;  // w1* ~ 0 along the alpha0 fiber
  bool flat_landscape = false;   // action constant over the grid (epsilon = 0)
  double grid_psi_min = 0;
  int refine_evals = 0;
};

struct RefineOptions {
  int max_evals = 400;
  double simplex_tol = 1e-12;
  double degenerate_tol = 1e-12;
  double flat_tol = 1e-13;
  double k_boundary_tol = 1e-7;
};

BifurcationReport minimize_action(const SweepTable& table,
                                  const ActionSurface& surface,
                                  const HamiltonianSpec& H,
                                  const SolveOptions& sopts,
                                  const RefineOptions& ropts = {});

}  // namespace torus

#endif
