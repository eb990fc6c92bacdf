#ifndef TORUS_COHOMOLOGY_HPP
#define TORUS_COHOMOLOGY_HPP

#include "torus/residual.hpp"

namespace torus {

struct SolveStats {
  double worst_divisor = std::numeric_limits<double>::infinity();
  int inner_iters = 0;
  int outer_iters = 0;
  double inner_contraction = 0;  // last observed reduction factor
  double outer_contraction = 0;

  void merge(const SolveStats& o) {
    worst_divisor = std::min(worst_divisor, o.worst_divisor);
    inner_iters = std::max(inner_iters, o.inner_iters);
    outer_iters = std::max(outer_iters, o.outer_iters);
    inner_contraction = std::max(inner_contraction, o.inner_contraction);
    outer_contraction = std::max(outer_contraction, o.outer_contraction);
  }
};

struct CohomologyOptions {
  double divisor_floor_rel = 1e-8;  // floor = rel * gamma
  double fp_tol = 1e-12;            // fixed-point relative tolerance
  int max_inner = 50;
  int max_outer = 50;
  double zero_mean_tol = 1e-9;
};

// d`psi = g with mean(psi) = 0; modewise division by i(omega.s).
Field solve_dpartial(const Field& g, const Freq& freq,
                     const CohomologyOptions& opt = {},
                     SolveStats* stats = nullptr);

// J d`lambda + Omega lambda = Hrhs with mean(lambda) = 0, Omega = diag(-k,1).
VField solve_oscillator(const VField& Hrhs, double k, const Freq& freq,
                        const CohomologyOptions& opt = {},
                        SolveStats* stats = nullptr);

// d`(J Gamma) + Omega Gamma + (Omega Gamma)^T + diag(dM,0) = G with
// trace Gamma = 0 and mean(Gamma_12) = f4. Returns (Gamma, dM).
struct GammaSolution {
  MField Gamma;
  double dM = 0;
};
GammaSolution solve_gamma(const MField& G, double f4, double k, const Freq& freq,
                          const CohomologyOptions& opt = {},
                          SolveStats* stats = nullptr);

// Truncated triangular system with constant-coefficient orthogonality
// conditions: mean(psi0) = f1, mean(chi) = f3, mean(lambda_1) = f5.
struct TruncatedSolution {
  Field psi0;
  VField lambda;
  VField chi;
  Eigen::VectorXd dbeta;
  double q = 0, p = 0;
  SolveStats stats;
};
TruncatedSolution solve_truncated(const LinCoeffs& lc, const Field& F1,
                                  const VField& F2, const VField& F3, double f1,
                                  const Eigen::VectorXd& f3, double f5, double k,
                                  const Freq& freq,
                                  const CohomologyOptions& opt = {});

// Full variable-coefficient problem (the approximate equations after the
// secular substitution), solved by the outer contraction around the
// truncated solver. Back-substitutes (de, dm) from (q, p, dM).
struct LinSolution {
  Tangent tangent;
  double q = 0, p = 0;
  double de = 0, dm = 0, dM = 0;
  SolveStats stats;
};
LinSolution solve_extended(const LinCoeffs& lc, const Residual& F, double alpha,
                           double k, const Freq& freq,
                           const CohomologyOptions& opt = {});

// R(f, u)[F]: approximate inverse of D Phi built from the approximate
// equations; returns the state increment.
StateDelta approx_inverse(const Params& f, const State& s, const Residual& F,
                          const HamiltonianSpec& H,
                          const CohomologyOptions& opt = {},
                          const ResidualOptions& ropt = {},
                          SolveStats* stats = nullptr);
// Variant reusing precomputed linear data.
StateDelta approx_inverse(const Params& f, const State& s, const LinCoeffs& lc,
                          const Residual& F, const Freq& freq,
                          const CohomologyOptions& opt = {},
                          SolveStats* stats = nullptr);

}  // namespace torus

#endif
