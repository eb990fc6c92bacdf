#ifndef TORUS_RESIDUAL_HPP
#define TORUS_RESIDUAL_HPP

#include "torus/canonical.hpp"
#include "torus/hamiltonian.hpp"

namespace torus {

struct Params {
  double alpha = 0;
  double k = 0;
};

struct State {
  Coord coord;
  double e = 0;
  double m = 0;
  double M = 0;
};

struct StateDelta {
  DeltaCoord dcoord;
  double de = 0, dm = 0, dM = 0;
};

State apply(State s, const StateDelta& d);

// Residual of the modified problem plus the orthogonality defects that close
// the system.
struct Residual {
  Field F1;
  VField F2;      // 2
  VField F3;      // n-1
  MField F4;      // symmetric 2x2
  double f5 = 0;  // mean(w1) - alpha
  // mean(phi0), mean(u), mean(W12)
  double o1 = 0;
  Eigen::VectorXd o3;
  double o4 = 0;

  double norm() const;
  Residual operator-() const;
};

// Coefficients of the triangular representation of D Phi, along with the
// chart data the linear solvers need at this state.
struct LinCoeffs {
  MField S;  // (n-1)x(n-1), symmetric
  MField T;  // 2x(n-1)
  // Gamma-equation forcing families: U_{ij} multiplies d lambda_i / d xi_j,
  // E_i multiplies mu_i, K_i multiplies lambda_i; all symmetric 2x2.
  std::vector<MField> U1, U2;   // j = 0..n-2
  std::vector<MField> E;        // i = 0..n-2
  std::vector<MField> Kf;       // i = 0..1
  Coeffs th;                    // Theta at the state
  Field w1star;                 // w1 - mean(w1)
  VField grad_w1;               // n-1
  MField Vinvt;                 // V^{-T} = I + u'
};

struct ResidualOptions {
  int grid = 0;
  double det_floor = 1e-10;
};

Residual phi(const Params& f, const State& s, const HamiltonianSpec& H,
             const ResidualOptions& opt = {});

LinCoeffs lin_coeffs(const Params& f, const State& s, const HamiltonianSpec& H,
                     const ResidualOptions& opt = {});

// The Gamma-equation forcing U.(d lambda) + mu_i E_i + lambda_i K_i as one
// linear map; shared by dphi and the extended linear solver.
MField gamma_forcing(const LinCoeffs& lc, const VField& lambda, const VField& mu);

// Exact directional derivative of Phi in the triangular representation,
// including the Pi remainders (they vanish at exact solutions).
Residual dphi(const Params& f, const State& s, const Tangent& t, double de,
              double dm, double dM, const HamiltonianSpec& H,
              const ResidualOptions& opt = {});

// Flow identities of the converged torus: omega + d`u = grad_y Hm, etc.
// Returns the worst defect; used as a property check.
double flow_identity_defect(const Params& f, const State& s,
                            const HamiltonianSpec& H,
                            const ResidualOptions& opt = {});

}  // namespace torus

#endif
