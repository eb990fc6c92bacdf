#ifndef TORUS_CANONICAL_HPP
#define TORUS_CANONICAL_HPP

#include <Eigen/Core>

#include "torus/field.hpp"

namespace torus {

// Chart coordinates phi = (beta, phi0, u, w, W11, W12, W21) on the group of
// canonical transformations. mean(phi0) = mean(u) = mean(W12) = 0 on the
// solution manifold; the entries are stored as-is and the defects are what
// Newton drives to zero.
struct Coord {
  Eigen::VectorXd beta;  // n-1
  Field phi0;
  VField u;  // n-1
  VField w;  // 2
  Field W11, W12, W21;

  int dim() const { return u.rows(); }
  int cutoff() const { return phi0.cutoff(); }

  static Coord trivial(int dim, int cutoff, double alpha);
};

Coord operator+(Coord a, const Coord& b);
Coord operator-(Coord a, const Coord& b);
Coord operator*(double s, Coord a);

// Tangent increment in chart coordinates, same component list as Coord.
using DeltaCoord = Coord;

// Full coefficient vector Theta(phi) of the transformation.
struct Coeffs {
  VField u;        // n-1
  VField v;        // n-1
  VField w;        // 2
  MField V;        // (n-1)x(n-1)
  MField Lambda;   // (n-1)x2
  MField W;        // 2x2
  std::vector<MField> R;  // n-1 symmetric 2x2
};

// Normalized tangent coordinates (the triangularizing variables).
struct Tangent {
  Eigen::VectorXd dbeta;  // n-1
  Field psi0;
  VField chi;     // n-1
  VField lambda;  // 2
  MField Gamma;   // 2x2 with trace 0

  static Tangent zero(int dim, int cutoff);
};

struct SymplecticDefects {
  double v_identity;    // V (I+u')^T - I
  double w_symplectic;  // W^T J W - J
  double lambda_rel;    // Lambda + V grad(w) J W
  double r_rel;         // R_i + V_ik d_k(W^T) J W and symmetry of R_i
  double closedness;    // d(xi+u) ^ dv + dw1 ^ dw2
  double max() const;
};

struct ChartOptions {
  int grid = 0;           // 0: derived from cutoff
  double det_floor = 1e-10;
};

// Theta(phi): V = (I+u')^{-T}, v = beta + V(grad phi0 - w2 grad w1),
// W22 = (1 + W12 W21)/W11, Lambda = -V grad(w) J W,
// R_i = -V_ik d_k(W^T) J W.
Coeffs theta(const Coord& c, const ChartOptions& opt = {});

// Analytic differential of theta at c in direction dc (product rule on the
// defining formulas; drives the tangency checks and xi_inv).
struct CoeffsDelta {
  VField du, dv;
  VField dw;
  MField dV, dLambda, dW;
  std::vector<MField> dR;
};
CoeffsDelta dtheta(const Coord& c, const Coeffs& th, const DeltaCoord& dc,
                   const ChartOptions& opt = {});

SymplecticDefects check_symplectic(const Coord& c, const Coeffs& t);

// Xi(phi): normalized tangent -> chart increment.
DeltaCoord xi(const Coord& c, const Coeffs& th, const Tangent& t);

// Xi^{-1}(phi): chart increment -> normalized tangent, with mu reconstructed
// through dtheta and dbeta = mean(mu).
Tangent xi_inv(const Coord& c, const Coeffs& th, const DeltaCoord& d,
               const ChartOptions& opt = {});

}  // namespace torus

#endif
