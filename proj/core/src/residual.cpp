#include "torus/residual.hpp"

#include <cmath>

namespace torus {

namespace {

MField omega_matrix(double k, int dim, int cutoff) {
  MField O(2, 2, dim, cutoff);
  O(0, 0) = Field::constant(dim, cutoff, -k);
  O(1, 1) = Field::constant(dim, cutoff, 1.0);
  return O;
}

MField sympl_j(int dim, int cutoff) {
  MField J(2, 2, dim, cutoff);
  J(0, 1) = Field::constant(dim, cutoff, 1.0);
  J(1, 0) = Field::constant(dim, cutoff, -1.0);
  return J;
}

Field transport(const VField& chi, const Field& f) {
  Field acc = field_mul(chi[0], deriv(f, 0));
  for (int k = 1; k < chi.rows(); ++k) acc += field_mul(chi[k], deriv(f, k));
  return acc;
}

VField transport(const VField& chi, const VField& f) {
  VField acc(f.rows(), f[0].dim(), f[0].cutoff());
  for (int i = 0; i < f.rows(); ++i) acc[i] = transport(chi, f[i]);
  return acc;
}

MField transport(const VField& chi, const MField& F) {
  MField acc = scale(chi[0], deriv(F, 0));
  for (int k = 1; k < chi.rows(); ++k) acc += scale(chi[k], deriv(F, k));
  return acc;
}

}  // namespace

State apply(State s, const StateDelta& d) {
  s.coord = s.coord + d.dcoord;
  s.e += d.de;
  s.m += d.dm;
  s.M += d.dM;
  return s;
}

double Residual::norm() const {
  double n = norm_weighted(F1, 0, 0);
  n = std::max(n, F2.norm_weighted(0, 0));
  n = std::max(n, F3.norm_weighted(0, 0));
  n = std::max(n, F4.norm_weighted(0, 0));
  n = std::max(n, std::abs(f5));
  n = std::max(n, std::abs(o1));
  n = std::max(n, o3.size() ? o3.cwiseAbs().maxCoeff() : 0.0);
  n = std::max(n, std::abs(o4));
  return n;
}

Residual Residual::operator-() const {
  Residual r = *this;
  r.F1 = -1.0 * r.F1;
  r.F2 = -1.0 * r.F2;
  r.F3 = -1.0 * r.F3;
  r.F4 = -1.0 * r.F4;
  r.f5 = -r.f5;
  r.o1 = -r.o1;
  r.o3 = -r.o3;
  r.o4 = -r.o4;
  return r;
}

Residual phi(const Params& f, const State& s, const HamiltonianSpec& H,
             const ResidualOptions& opt) {
  const int d = s.coord.dim();
  const int K = s.coord.cutoff();
  ChartOptions copt{opt.grid, opt.det_floor};
  Coeffs th = theta(s.coord, copt);
  HamiltonianSpec Hm = modify(H, s.m, s.M);
  Embedding emb{th.u, th.v, th.w};
  HamDerivs hd = eval_all(Hm, emb, DerivDepth::Second, opt.grid);

  Residual r;
  r.F1 = hd.value - Field::constant(d, K, s.e);

  // F2 = (grad_y . Lambda + grad_z . W)^T = Lambda^T grad_y + W^T grad_z
  r.F2 = mat_vec(th.Lambda.transposed(), hd.grad_y) +
         mat_vec(th.W.transposed(), hd.grad_z);

  // F3 = V^T grad_y - omega
  r.F3 = mat_vec(th.V.transposed(), hd.grad_y);
  for (int i = 0; i < d; ++i)
    r.F3[i] -= Field::constant(d, K, H.freq().omega()[i]);

  // F4 = grad_y_i R_i + Lambda^T Hyy Lambda + W^T Hzy Lambda + (.)^T
  //      + W^T Hzz W - Omega
  MField F4(2, 2, d, K);
  for (int i = 0; i < d; ++i) F4 += scale(hd.grad_y[i], th.R[size_t(i)]);
  MField Lt = th.Lambda.transposed();
  MField Wt = th.W.transposed();
  F4 += mat_mat(mat_mat(Lt, hd.hess_yy), th.Lambda);
  MField cross = mat_mat(mat_mat(Wt, hd.hess_zy), th.Lambda);
  F4 += cross + cross.transposed();
  F4 += mat_mat(mat_mat(Wt, hd.hess_zz), th.W);
  F4 -= omega_matrix(f.k, d, K);
  r.F4 = F4;

  r.f5 = th.w[0].mean() - f.alpha;
  r.o1 = s.coord.phi0.mean();
  r.o3 = s.coord.u.mean();
  r.o4 = s.coord.W12.mean();
  return r;
}

LinCoeffs lin_coeffs(const Params& f, const State& s, const HamiltonianSpec& H,
                     const ResidualOptions& opt) {
  (void)f;
  const int d = s.coord.dim();
  const int K = s.coord.cutoff();
  ChartOptions copt{opt.grid, opt.det_floor};
  LinCoeffs lc;
  lc.th = theta(s.coord, copt);
  HamiltonianSpec Hm = modify(H, s.m, s.M);
  Embedding emb{lc.th.u, lc.th.v, lc.th.w};
  HamDerivs hd = eval_all(Hm, emb, DerivDepth::Third, opt.grid);

  MField Vt = lc.th.V.transposed();
  MField Wt = lc.th.W.transposed();
  MField Lt = lc.th.Lambda.transposed();

  lc.S = mat_mat(mat_mat(Vt, hd.hess_yy), lc.th.V);
  lc.T = mat_mat(mat_mat(Wt, hd.hess_zy), lc.th.V) +
         mat_mat(mat_mat(Lt, hd.hess_yy), lc.th.V);

  // U_{1j} = -(Tcol_j e2^T + e2 Tcol_j^T), U_{2j} = +(Tcol_j e1^T + e1 Tcol_j^T)
  lc.U1.clear();
  lc.U2.clear();
  for (int j = 0; j < d; ++j) {
    MField U1(2, 2, d, K), U2(2, 2, d, K);
    Field t1 = lc.T(0, j), t2 = lc.T(1, j);
    // Tcol_j = (t1, t2)
    U1(0, 1) -= t1;
    U1(1, 0) -= t1;
    U1(1, 1) -= 2.0 * t2;
    U2(0, 0) += 2.0 * t1;
    U2(0, 1) += t2;
    U2(1, 0) += t2;
    lc.U1.push_back(U1);
    lc.U2.push_back(U2);
  }

  // P^{(y)}_a = Lt d3yyy_a L + Lt d3yyz_a W + Wt d3yzy_a L + Wt d3yzz_a W
  auto sandwich = [&](const MField& yy, const MField& zy, const MField& zz) {
    MField out = mat_mat(mat_mat(Lt, yy), lc.th.Lambda);
    MField c = mat_mat(mat_mat(Wt, zy), lc.th.Lambda);
    out += c + c.transposed();
    out += mat_mat(mat_mat(Wt, zz), lc.th.W);
    return out;
  };
  std::vector<MField> Py, Pz;
  for (int a = 0; a < d; ++a)
    Py.push_back(sandwich(hd.d3_y_yy[size_t(a)], hd.d3_y_zy[size_t(a)],
                          hd.d3_y_zz[size_t(a)]));
  for (int p = 0; p < 2; ++p)
    Pz.push_back(sandwich(hd.d3_z_yy[size_t(p)], hd.d3_z_zy[size_t(p)],
                          hd.d3_z_zz[size_t(p)]));

  // The grad_y factor in front of R_i varies with the state too:
  // delta(d_{y_a} H) R_a contributes (Hyy V)_{ai} R_a to E_i and
  // ((Hyy Lambda)_{ai} + (Hyz W)_{ai}) R_a to K_i.
  MField HyyV = mat_mat(hd.hess_yy, lc.th.V);
  MField HyyL = mat_mat(hd.hess_yy, lc.th.Lambda);
  MField HyzW = mat_mat(hd.hess_zy.transposed(), lc.th.W);

  // E_i = sum_a V_{a i} P^{(y)}_a + sum_a (Hyy V)_{a i} R_a
  lc.E.clear();
  for (int i = 0; i < d; ++i) {
    MField Ei(2, 2, d, K);
    for (int a = 0; a < d; ++a) {
      Ei += scale(lc.th.V(a, i), Py[size_t(a)]);
      Ei += scale(HyyV(a, i), lc.th.R[size_t(a)]);
    }
    lc.E.push_back(Ei);
  }

  // K_i = Rt_i V^{-T} T^T + T V^{-1} Rt_i^T + sum_a Lambda_{a i} P^{(y)}_a
  //       + sum_p W_{p i} P^{(z)}_p,   Rt_i = [R_1 e_i, ..., R_{n-1} e_i].
  MField Vinvt(d, d, d, K);  // V^{-T} = I + u'
  Vinvt += jacobian(s.coord.u);
  for (int i = 0; i < d; ++i) Vinvt(i, i) += Field::constant(d, K, 1.0);
  lc.Vinvt = Vinvt;
  lc.Kf.clear();
  for (int i = 0; i < 2; ++i) {
    MField Rti(2, d, d, K);
    for (int jj = 0; jj < d; ++jj)
      for (int p = 0; p < 2; ++p) Rti(p, jj) = lc.th.R[size_t(jj)](p, i);
    MField term = mat_mat(mat_mat(Rti, Vinvt), lc.T.transposed());
    MField Ki = term + term.transposed();
    for (int a = 0; a < d; ++a) {
      Ki += scale(lc.th.Lambda(a, i), Py[size_t(a)]);
      Ki += scale(HyyL(a, i) + HyzW(a, i), lc.th.R[size_t(a)]);
    }
    for (int p = 0; p < 2; ++p) Ki += scale(lc.th.W(p, i), Pz[size_t(p)]);
    lc.Kf.push_back(Ki);
  }

  lc.w1star = split_mean(lc.th.w[0]).star;
  lc.grad_w1 = grad_scalar(lc.th.w[0]);
  return lc;
}

MField gamma_forcing(const LinCoeffs& lc, const VField& lambda, const VField& mu) {
  const int d = lc.S.rows();
  const int K = lc.S(0, 0).cutoff();
  const int dim = lc.S(0, 0).dim();
  MField out(2, 2, dim, K);
  for (int j = 0; j < d; ++j) {
    out += scale(deriv(lambda[0], j), lc.U1[size_t(j)]);
    out += scale(deriv(lambda[1], j), lc.U2[size_t(j)]);
  }
  for (int i = 0; i < d; ++i) out += scale(mu[i], lc.E[size_t(i)]);
  for (int i = 0; i < 2; ++i) out += scale(lambda[i], lc.Kf[size_t(i)]);
  return out;
}

Residual dphi(const Params& f, const State& s, const Tangent& t, double de,
              double dm, double dM, const HamiltonianSpec& H,
              const ResidualOptions& opt) {
  const int d = s.coord.dim();
  const int K = s.coord.cutoff();
  const Freq& freq = H.freq();
  LinCoeffs lc = lin_coeffs(f, s, H, opt);
  Residual ph = phi(f, s, H, opt);

  VField mu = grad_scalar(t.psi0);
  for (int i = 0; i < d; ++i) mu[i] += Field::constant(d, K, t.dbeta[i]);

  Residual r;
  // D Phi1 = d`psi0 + omega.dbeta - de + dm w1 + dM w1^2/2 + Pi1
  // (Phi1 = Hm o emb - e, so the e-derivative enters with a minus sign.)
  r.F1 = dpartial(t.psi0, freq);
  r.F1 += Field::constant(d, K, freq.omega().dot(t.dbeta) - de);
  r.F1 += dm * lc.th.w[0];
  r.F1 += 0.5 * dM * field_mul(lc.th.w[0], lc.th.w[0]);
  r.F1 += transport(t.chi, ph.F1) + dot(ph.F2, t.lambda) + dot(ph.F3, mu);

  // D Phi2 = J d`lambda + Omega lambda + T mu + dm W^T e1 + dM w1 W^T e1 + Pi2
  MField J = sympl_j(d, K);
  MField Om = omega_matrix(f.k, d, K);
  VField Jdl = mat_vec(J, dpartial(t.lambda, freq));
  r.F2 = Jdl + mat_vec(Om, t.lambda) + mat_vec(lc.T, mu);
  VField Wte1(2, d, K);
  Wte1[0] = lc.th.W(0, 0);
  Wte1[1] = lc.th.W(0, 1);
  r.F2 += dm * Wte1;
  VField w1Wte1 = scale(lc.th.w[0], Wte1);
  r.F2 += dM * w1Wte1;
  // Pi2 = chi_i d_i Phi2 + Gamma^T Phi2 + Phi4 lambda + (J lambda)'_xi Phi3
  VField Jl = mat_vec(J, t.lambda);
  r.F2 += transport(t.chi, ph.F2) + mat_vec(t.Gamma.transposed(), ph.F2) +
          mat_vec(ph.F4, t.lambda) + mat_vec(jacobian(Jl), ph.F3);

  // D Phi3 = -d`chi + S mu + T^T lambda + Pi3
  r.F3 = -1.0 * dpartial(t.chi, freq) + mat_vec(lc.S, mu) +
         mat_vec(lc.T.transposed(), t.lambda);
  r.F3 += transport(t.chi, ph.F3) - mat_vec(jacobian(t.chi), ph.F3);

  // D Phi4 = d`(J Gamma) + Omega Gamma + (Omega Gamma)^T + forcing
  //          + dM (W^T e1)(W^T e1)^T + Pi4
  MField JG = mat_mat(J, t.Gamma);
  MField OG = mat_mat(Om, t.Gamma);
  MField F4 = dpartial(JG, freq) + OG + OG.transposed();
  F4 += gamma_forcing(lc, t.lambda, mu);
  MField WMW(2, 2, d, K);
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) WMW(p, q) = field_mul(Wte1[p], Wte1[q]);
  F4 += dM * WMW;
  MField F4G = mat_mat(ph.F4, t.Gamma);
  F4 += transport(t.chi, ph.F4) + F4G + F4G.transposed();
  for (int i = 0; i < d; ++i) F4 += scale(ph.F3[i], deriv(JG, i));
  r.F4 = F4;

  // D Phi5 = mean((W lambda)_1 + chi . grad w1)
  VField Wl = mat_vec(lc.th.W, t.lambda);
  r.f5 = (Wl[0] + dot(t.chi, lc.grad_w1)).mean();

  DeltaCoord dcoord = xi(s.coord, lc.th, t);
  r.o1 = dcoord.phi0.mean();
  r.o3 = dcoord.u.mean();
  r.o4 = dcoord.W12.mean();
  return r;
}

double flow_identity_defect(const Params& f, const State& s,
                            const HamiltonianSpec& H, const ResidualOptions& opt) {
  (void)f;
  ChartOptions copt{opt.grid, opt.det_floor};
  Coeffs th = theta(s.coord, copt);
  HamiltonianSpec Hm = modify(H, s.m, s.M);
  Embedding emb{th.u, th.v, th.w};
  HamDerivs hd = eval_all(Hm, emb, DerivDepth::First, opt.grid);
  const Freq& freq = H.freq();
  const int d = s.coord.dim();
  const int K = s.coord.cutoff();

  double worst = 0;
  VField lhs1 = dpartial(th.u, freq);
  for (int i = 0; i < d; ++i)
    lhs1[i] += Field::constant(d, K, freq.omega()[i]);
  worst = std::max(worst, (lhs1 - hd.grad_y).norm_weighted(0, 0));

  VField lhs2 = dpartial(th.v, freq);
  worst = std::max(worst, (lhs2 + hd.grad_x).norm_weighted(0, 0));

  MField J = sympl_j(d, K);
  VField lhs3 = dpartial(th.w, freq);
  worst = std::max(worst, (lhs3 - mat_vec(J, hd.grad_z)).norm_weighted(0, 0));
  return worst;
}

}  // namespace torus
