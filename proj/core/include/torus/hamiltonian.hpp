#ifndef TORUS_HAMILTONIAN_HPP
#define TORUS_HAMILTONIAN_HPP

#include <string>
#include <vector>

#include <Eigen/Core>

#include "torus/field.hpp"

namespace torus {

// One monomial-times-harmonic term
//   coef * prod_i y_i^{ypow_i} * z2^{z2pow} * phase(xmode.x + z1mode*z1),
// phase in {cos, sin}. H0 terms carry xmode = 0, z1mode = 0.
struct HamTerm {
  double coef = 0;
  std::vector<int> ypow;
  int z2pow = 0;
  std::vector<int> xmode;
  int z1mode = 0;
  bool is_sin = false;
};

// H = H0(y, z2) + eps*H1(x, y, z) + m z1 + (M/2) z1^2.  The two modification
// monomials are stored exactly in their own slots; everything else lives in
// the term lists.
class HamiltonianSpec {
 public:
  HamiltonianSpec(int n, std::vector<HamTerm> h0, std::vector<HamTerm> h1,
                  double epsilon, Freq freq);

  static HamiltonianSpec from_toml_file(const std::string& path);
  static HamiltonianSpec from_toml_string(const std::string& text);

  int n() const { return n_; }
  int dim() const { return n_ - 1; }
  double epsilon() const { return eps_; }
  const Freq& freq() const { return freq_; }
  double mod_m() const { return mod_m_; }
  double mod_M() const { return mod_M_; }
  const std::vector<HamTerm>& h0_terms() const { return h0_; }
  const std::vector<HamTerm>& h1_terms() const { return h1_; }

  // Value of H0 at (y, z2) = (0, 0): the constant term.
  double h0_at_origin() const;
  // S0 = d^2 H0 / dy^2 (0,0), t0 = grad_y d_{z2} H (0,0), K0 = S0 - t0 t0^T.
  Eigen::MatrixXd S0() const;
  Eigen::VectorXd t0() const;
  Eigen::MatrixXd K0() const;

  // Pointwise evaluation in phase space (used by the verifier).
  double value(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
               const Eigen::Vector2d& z) const;
  void gradients(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                 const Eigen::Vector2d& z, Eigen::VectorXd& gx,
                 Eigen::VectorXd& gy, Eigen::Vector2d& gz) const;

 private:
  friend HamiltonianSpec modify(const HamiltonianSpec& H, double m, double M);
  void validate() const;

  int n_;
  std::vector<HamTerm> h0_, h1_;
  double eps_;
  Freq freq_;
  double mod_m_ = 0, mod_M_ = 0;
};

// H_m = H + m z1 + (M/2) z1^2.
HamiltonianSpec modify(const HamiltonianSpec& H, double m, double M);

// Torus embedding x = xi + u(xi), y = v(xi), z = w(xi).
struct Embedding {
  VField u;  // n-1
  VField v;  // n-1
  VField w;  // 2
};

// Derivative request for eval_composed: orders per variable block.
// xd: which x-coordinate(s), yd: y-coordinates, z1d/z2d: z orders.
struct DerivOrder {
  std::vector<int> x;  // list of x-indices to differentiate (with multiplicity)
  std::vector<int> y;  // same for y
  int z1 = 0;
  int z2 = 0;
  int total() const { return int(x.size() + y.size()) + z1 + z2; }
};

// All composed derivative blocks needed by the residual operator and its
// linearization, evaluated in one pseudo-spectral sweep.
struct HamDerivs {
  Field value;
  VField grad_x, grad_y;  // n-1 each
  VField grad_z;          // 2
  MField hess_yy;         // (n-1)x(n-1)
  MField hess_zy;         // 2x(n-1): entries d2H/dz_p dy_j
  MField hess_zz;         // 2x2
  // Third derivatives, leading index names the extra derivative.
  std::vector<MField> d3_y_yy;  // a -> d_{y_a} hess_yy
  std::vector<MField> d3_y_zy;  // a -> d_{y_a} hess_zy
  std::vector<MField> d3_y_zz;  // a -> d_{y_a} hess_zz
  std::vector<MField> d3_z_yy;  // p -> d_{z_p} hess_yy
  std::vector<MField> d3_z_zy;  // p -> d_{z_p} hess_zy
  std::vector<MField> d3_z_zz;  // p -> d_{z_p} hess_zz
};

enum class DerivDepth { Value, First, Second, Third };

// xi -> (d^order H)(xi + u, v, w), dealiased on `grid` points per dimension
// (0 = pick from cutoff). Throws CutoffOverflow when the output cutoff does
// not fit the working grid.
Field eval_composed(const HamiltonianSpec& H, const DerivOrder& d,
                    const Embedding& emb, int grid = 0);

HamDerivs eval_all(const HamiltonianSpec& H, const Embedding& emb,
                   DerivDepth depth, int grid = 0);

}  // namespace torus

#endif
