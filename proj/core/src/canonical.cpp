#include "torus/canonical.hpp"

#include <cmath>

namespace torus {

namespace {

MField identity_m(int n, int dim, int cutoff) {
  MField I(n, n, dim, cutoff);
  for (int i = 0; i < n; ++i) I(i, i) = Field::constant(dim, cutoff, 1.0);
  return I;
}

MField sympl_j(int dim, int cutoff) {
  MField J(2, 2, dim, cutoff);
  J(0, 1) = Field::constant(dim, cutoff, 1.0);
  J(1, 0) = Field::constant(dim, cutoff, -1.0);
  return J;
}

int chart_grid(const ChartOptions& opt, int cutoff) {
  return opt.grid > 0 ? opt.grid : default_product_grid(cutoff);
}

// chi_k d_k F for matrix fields.
MField transport(const VField& chi, const MField& F) {
  const int d = chi.rows();
  MField acc = scale(chi[0], deriv(F, 0));
  for (int k = 1; k < d; ++k) acc += scale(chi[k], deriv(F, k));
  return acc;
}

Field transport(const VField& chi, const Field& f) {
  const int d = chi.rows();
  Field acc = field_mul(chi[0], deriv(f, 0));
  for (int k = 1; k < d; ++k) acc += field_mul(chi[k], deriv(f, k));
  return acc;
}

VField transport(const VField& chi, const VField& f) {
  VField acc(f.rows(), f[0].dim(), f[0].cutoff());
  for (int i = 0; i < f.rows(); ++i) acc[i] = transport(chi, f[i]);
  return acc;
}

}  // namespace

Coord Coord::trivial(int dim, int cutoff, double alpha) {
  Coord c;
  c.beta = Eigen::VectorXd::Zero(dim);
  c.phi0 = Field(dim, cutoff);
  c.u = VField(dim, dim, cutoff);
  c.w = VField(2, dim, cutoff);
  c.w[0] = Field::constant(dim, cutoff, alpha);
  c.W11 = Field::constant(dim, cutoff, 1.0);
  c.W12 = Field(dim, cutoff);
  c.W21 = Field(dim, cutoff);
  return c;
}

Coord operator+(Coord a, const Coord& b) {
  a.beta += b.beta;
  a.phi0 += b.phi0;
  a.u += b.u;
  a.w += b.w;
  a.W11 += b.W11;
  a.W12 += b.W12;
  a.W21 += b.W21;
  return a;
}

Coord operator-(Coord a, const Coord& b) {
  a.beta -= b.beta;
  a.phi0 -= b.phi0;
  a.u -= b.u;
  a.w -= b.w;
  a.W11 -= b.W11;
  a.W12 -= b.W12;
  a.W21 -= b.W21;
  return a;
}

Coord operator*(double s, Coord a) {
  a.beta *= s;
  a.phi0 *= s;
  a.u = s * a.u;
  a.w = s * a.w;
  a.W11 *= s;
  a.W12 *= s;
  a.W21 *= s;
  return a;
}

Tangent Tangent::zero(int dim, int cutoff) {
  Tangent t;
  t.dbeta = Eigen::VectorXd::Zero(dim);
  t.psi0 = Field(dim, cutoff);
  t.chi = VField(dim, dim, cutoff);
  t.lambda = VField(2, dim, cutoff);
  t.Gamma = MField(2, 2, dim, cutoff);
  return t;
}

Coeffs theta(const Coord& c, const ChartOptions& opt) {
  const int d = c.dim();
  const int K = c.cutoff();
  const int grid = chart_grid(opt, K);
  Coeffs th;
  th.u = c.u;
  th.w = c.w;

  MField A = identity_m(d, d, K) + gradient(c.u);  // (I + u')^T
  th.V = pointwise_inverse(A, grid, opt.det_floor);

  // W22 = (1 + W12 W21) / W11, assembled pointwise.
  Field num = Field::constant(d, K, 1.0) + field_mul(c.W12, c.W21);
  Field W22 = pointwise_divide(num, c.W11, grid, opt.det_floor);
  th.W = MField(2, 2, d, K);
  th.W(0, 0) = c.W11;
  th.W(0, 1) = c.W12;
  th.W(1, 0) = c.W21;
  th.W(1, 1) = W22;

  VField gphi0 = grad_scalar(c.phi0);
  VField gw1 = grad_scalar(c.w[0]);
  VField rhs = gphi0 - scale(c.w[1], gw1);
  th.v = mat_vec(th.V, rhs);
  for (int i = 0; i < d; ++i) th.v[i] += Field::constant(d, K, c.beta[i]);

  MField J = sympl_j(d, K);
  MField gw = gradient(c.w);  // (n-1) x 2
  th.Lambda = -1.0 * mat_mat(mat_mat(mat_mat(th.V, gw), J), th.W);

  MField Wt = th.W.transposed();
  th.R.clear();
  std::vector<MField> Dk;  // d_k(W^T) J W
  for (int k = 0; k < d; ++k)
    Dk.push_back(mat_mat(mat_mat(deriv(Wt, k), J), th.W));
  for (int i = 0; i < d; ++i) {
    MField Ri(2, 2, d, K);
    for (int k = 0; k < d; ++k) Ri += scale(th.V(i, k), Dk[size_t(k)]);
    th.R.push_back(-1.0 * Ri);
  }
  return th;
}

CoeffsDelta dtheta(const Coord& c, const Coeffs& th, const DeltaCoord& dc,
                   const ChartOptions& opt) {
  const int d = c.dim();
  const int K = c.cutoff();
  const int grid = chart_grid(opt, K);
  CoeffsDelta out;
  out.du = dc.u;
  out.dw = dc.w;

  out.dV = -1.0 * mat_mat(mat_mat(th.V, gradient(dc.u)), th.V);

  Field dW22_num = field_mul(dc.W12, c.W21) + field_mul(c.W12, dc.W21) -
                   field_mul(th.W(1, 1), dc.W11);
  Field dW22 = pointwise_divide(dW22_num, c.W11, grid, opt.det_floor);
  out.dW = MField(2, 2, d, K);
  out.dW(0, 0) = dc.W11;
  out.dW(0, 1) = dc.W12;
  out.dW(1, 0) = dc.W21;
  out.dW(1, 1) = dW22;

  VField gphi0 = grad_scalar(c.phi0);
  VField gw1 = grad_scalar(c.w[0]);
  VField base = gphi0 - scale(c.w[1], gw1);
  VField dbase = grad_scalar(dc.phi0) - scale(dc.w[1], gw1) -
                 scale(c.w[1], grad_scalar(dc.w[0]));
  out.dv = mat_vec(out.dV, base) + mat_vec(th.V, dbase);
  for (int i = 0; i < d; ++i) out.dv[i] += Field::constant(d, K, dc.beta[i]);

  MField J = sympl_j(d, K);
  MField gw = gradient(c.w);
  MField dgw = gradient(dc.w);
  out.dLambda = -1.0 * (mat_mat(mat_mat(mat_mat(out.dV, gw), J), th.W) +
                        mat_mat(mat_mat(mat_mat(th.V, dgw), J), th.W) +
                        mat_mat(mat_mat(mat_mat(th.V, gw), J), out.dW));

  MField Wt = th.W.transposed();
  MField dWt = out.dW.transposed();
  out.dR.clear();
  std::vector<MField> Dk, dDk;
  for (int k = 0; k < d; ++k) {
    Dk.push_back(mat_mat(mat_mat(deriv(Wt, k), J), th.W));
    dDk.push_back(mat_mat(mat_mat(deriv(dWt, k), J), th.W) +
                  mat_mat(mat_mat(deriv(Wt, k), J), out.dW));
  }
  for (int i = 0; i < d; ++i) {
    MField acc(2, 2, d, K);
    for (int k = 0; k < d; ++k) {
      acc += scale(out.dV(i, k), Dk[size_t(k)]);
      acc += scale(th.V(i, k), dDk[size_t(k)]);
    }
    out.dR.push_back(-1.0 * acc);
  }
  return out;
}

double SymplecticDefects::max() const {
  return std::max({v_identity, w_symplectic, lambda_rel, r_rel, closedness});
}

SymplecticDefects check_symplectic(const Coord& c, const Coeffs& t) {
  const int d = c.dim();
  const int K = c.cutoff();
  SymplecticDefects def{};
  MField A = identity_m(d, d, K) + gradient(c.u);
  def.v_identity = (mat_mat(t.V, A) - identity_m(d, d, K)).norm_weighted(0, 0);

  MField J = sympl_j(d, K);
  def.w_symplectic =
      (mat_mat(mat_mat(t.W.transposed(), J), t.W) - J).norm_weighted(0, 0);

  MField gw = gradient(t.w);
  def.lambda_rel =
      (t.Lambda + mat_mat(mat_mat(mat_mat(t.V, gw), J), t.W)).norm_weighted(0, 0);

  MField Wt = t.W.transposed();
  double rdef = 0;
  for (int i = 0; i < d; ++i) {
    MField Ri(2, 2, d, K);
    for (int k = 0; k < d; ++k)
      Ri += scale(t.V(i, k), mat_mat(mat_mat(deriv(Wt, k), J), t.W));
    rdef = std::max(rdef, (t.R[size_t(i)] + Ri).norm_weighted(0, 0));
    rdef = std::max(
        rdef, (t.R[size_t(i)] - t.R[size_t(i)].transposed()).norm_weighted(0, 0));
  }
  def.r_rel = rdef;

  // Closedness d(xi_k+u_k) ^ dv_k + dw_1 ^ dw_2 = 0: antisymmetric part of
  // (I + grad u) v' plus the w-form coefficients.
  double closed = 0;
  if (d > 1) {
    MField M = mat_mat(A, jacobian(t.v));
    VField gw1 = grad_scalar(t.w[0]);
    VField gw2 = grad_scalar(t.w[1]);
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        Field dij = M(i, j) - M(j, i) + field_mul(gw1[i], gw2[j]) -
                    field_mul(gw1[j], gw2[i]);
        closed = std::max(closed, norm_weighted(dij, 0, 0));
      }
  }
  def.closedness = closed;
  return def;
}

DeltaCoord xi(const Coord& c, const Coeffs& th, const Tangent& t) {
  const int d = c.dim();
  const int K = c.cutoff();
  DeltaCoord out;
  out.beta = t.dbeta;

  // du = (I + u') chi
  out.u = t.chi + mat_vec(jacobian(c.u), t.chi);

  // dw = W lambda + w' chi
  VField Wl = mat_vec(th.W, t.lambda);
  out.w = Wl + mat_vec(jacobian(c.w), t.chi);

  // dW = W Gamma + chi_k d_k W, chart slots (11, 12, 21)
  MField dW = mat_mat(th.W, t.Gamma) + transport(t.chi, th.W);
  out.W11 = dW(0, 0);
  out.W12 = dW(0, 1);
  out.W21 = dW(1, 0);

  // dphi0 = psi0 + w2 (W lambda)_1 + chi_k d_k phi0 - dbeta . u
  out.phi0 = t.psi0 + field_mul(c.w[1], Wl[0]) + transport(t.chi, c.phi0);
  for (int i = 0; i < d; ++i) out.phi0 -= t.dbeta[i] * c.u[i];
  (void)K;
  return out;
}

Tangent xi_inv(const Coord& c, const Coeffs& th, const DeltaCoord& dc,
               const ChartOptions& opt) {
  const int d = c.dim();
  const int K = c.cutoff();
  const int grid = chart_grid(opt, K);
  Tangent t;

  // chi solves (I + u') chi = du, pointwise on the grid.
  MField Iu = identity_m(d, d, K) + jacobian(c.u);
  t.chi = pointwise_solve(Iu, dc.u, grid, opt.det_floor);

  // lambda solves W lambda = dw - w' chi.
  VField rhs_l = dc.w - mat_vec(jacobian(c.w), t.chi);
  t.lambda = pointwise_solve(th.W, rhs_l, grid, opt.det_floor);

  // Gamma solves W Gamma = dW - chi_k d_k W, with dW22 from the chart slots.
  Field dW22_num = field_mul(dc.W12, c.W21) + field_mul(c.W12, dc.W21) -
                   field_mul(th.W(1, 1), dc.W11);
  Field dW22 = pointwise_divide(dW22_num, c.W11, grid, opt.det_floor);
  MField dW(2, 2, d, K);
  dW(0, 0) = dc.W11;
  dW(0, 1) = dc.W12;
  dW(1, 0) = dc.W21;
  dW(1, 1) = dW22;
  MField rhs_G = dW - transport(t.chi, th.W);
  t.Gamma = pointwise_solve(th.W, rhs_G, grid, opt.det_floor);

  // mu = V^{-1} (dv - chi_k d_k v - Lambda lambda), V^{-1} = I + grad u.
  CoeffsDelta cd = dtheta(c, th, dc, opt);
  VField rhs_m = cd.dv - transport(t.chi, th.v) - mat_vec(th.Lambda, t.lambda);
  MField Vinv = identity_m(d, d, K) + gradient(c.u);
  VField mu = mat_vec(Vinv, rhs_m);

  t.dbeta = mu.mean();

  // psi0 from the algebraic inverse of the phi0 transport formula.
  VField Wl = mat_vec(th.W, t.lambda);
  t.psi0 = dc.phi0 - field_mul(c.w[1], Wl[0]) - transport(t.chi, c.phi0);
  for (int i = 0; i < d; ++i) t.psi0 += t.dbeta[i] * c.u[i];
  return t;
}

}  // namespace torus
