#ifndef TORUS_TESTS_DENSE_ORACLE_HPP
#define TORUS_TESTS_DENSE_ORACLE_HPP

// Brute-force dense solves of the linear problems over stacked Fourier
// coefficients. The matrices are assembled by applying the *defining
// equations* (written out directly in field arithmetic) to unit basis
// vectors, independently of the production solvers' mode formulas and
// fixed-point iterations.

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "torus/residual.hpp"

namespace torus::oracle {

using torus::Complex;

struct Packing {
  int dim;
  int K;
  int modes;  // (2K+1)^dim

  explicit Packing(int dim_, int K_) : dim(dim_), K(K_) {
    modes = 1;
    for (int i = 0; i < dim; ++i) modes *= 2 * K + 1;
  }
};

inline void scatter(const Field& f, Eigen::VectorXcd& v, int offset) {
  int idx = 0;
  f.for_each_mode([&](const Mode&, const Complex& c) { v[offset + idx++] = c; });
}

inline Field gather(const Eigen::VectorXcd& v, int offset, int dim, int K) {
  Field f(dim, K);
  int idx = 0;
  f.for_each_mode([&](const Mode&, Complex&) { (void)idx; });
  // fill in the same order as scatter
  idx = 0;
  f.for_each_mode([&](const Mode& m, Complex&) {
    f.at(m) = v[offset + idx++];
  });
  return f;
}

// ---------------------------------------------------------------------------
// d`psi = g with mean(psi) = 0 (unknowns: all modes; the zero mode carries
// the constraint row).
inline Field dense_solve_dpartial(const Field& g, const Freq& freq) {
  Packing P(g.dim(), g.cutoff());
  const int N = P.modes;
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(N, N);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(N);
  for (int col = 0; col < N; ++col) {
    Field basis(g.dim(), g.cutoff());
    int idx = 0;
    basis.for_each_mode([&](const Mode&, Complex& c) {
      c = (idx++ == col) ? 1.0 : 0.0;
    });
    Field img = dpartial(basis, freq);
    Eigen::VectorXcd colv = Eigen::VectorXcd::Zero(N);
    scatter(img, colv, 0);
    // constraint row: zero-mode equation is replaced by mean(psi) = 0
    int row0 = int(basis.index(basis.zero_mode()));
    colv[row0] = basis.mean_complex();
    A.col(col) = colv;
  }
  scatter(g, rhs, 0);
  rhs[int(g.index(g.zero_mode()))] = 0.0;
  Eigen::VectorXcd sol = A.fullPivLu().solve(rhs);
  return gather(sol, 0, g.dim(), g.cutoff());
}

// J d`lambda + Omega lambda = H, mean(lambda) = 0.
inline VField dense_solve_oscillator(const VField& H, double k, const Freq& freq) {
  const int dim = H[0].dim(), K = H[0].cutoff();
  Packing P(dim, K);
  const int N = 2 * P.modes;
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(N, N);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(N);
  MField J(2, 2, dim, K), Om(2, 2, dim, K);
  J(0, 1) = Field::constant(dim, K, 1);
  J(1, 0) = Field::constant(dim, K, -1);
  Om(0, 0) = Field::constant(dim, K, -k);
  Om(1, 1) = Field::constant(dim, K, 1);
  for (int col = 0; col < N; ++col) {
    VField basis(2, dim, K);
    int comp = col / P.modes, idx = col % P.modes, cur = 0;
    basis[comp].for_each_mode([&](const Mode&, Complex& c) {
      c = (cur++ == idx) ? 1.0 : 0.0;
    });
    VField img = mat_vec(J, dpartial(basis, freq)) + mat_vec(Om, basis);
    Eigen::VectorXcd colv = Eigen::VectorXcd::Zero(N);
    scatter(img[0], colv, 0);
    scatter(img[1], colv, P.modes);
    int z0 = int(basis[0].index(basis[0].zero_mode()));
    colv[z0] = basis[0].mean_complex();
    colv[P.modes + z0] = basis[1].mean_complex();
    A.col(col) = colv;
  }
  scatter(H[0], rhs, 0);
  scatter(H[1], rhs, P.modes);
  int z0 = int(H[0].index(H[0].zero_mode()));
  rhs[z0] = 0;
  rhs[P.modes + z0] = 0;
  Eigen::VectorXcd sol = A.fullPivLu().solve(rhs);
  VField lam(2, dim, K);
  lam[0] = gather(sol, 0, dim, K);
  lam[1] = gather(sol, P.modes, dim, K);
  return lam;
}

// d`(J Gamma) + Omega Gamma + (Omega Gamma)^T + diag(dM, 0) = G,
// trace Gamma = 0, mean(Gamma_12) = f4. Unknowns: Gamma12, Gamma21, Gamma22
// (Gamma11 = -Gamma22) and dM.
struct DenseGamma {
  MField Gamma;
  double dM;
};

inline MField gamma_residual_op(const MField& Gamma, double dM, double k,
                                const Freq& freq) {
  const int dim = Gamma(0, 0).dim(), K = Gamma(0, 0).cutoff();
  MField J(2, 2, dim, K), Om(2, 2, dim, K);
  J(0, 1) = Field::constant(dim, K, 1);
  J(1, 0) = Field::constant(dim, K, -1);
  Om(0, 0) = Field::constant(dim, K, -k);
  Om(1, 1) = Field::constant(dim, K, 1);
  MField OG = mat_mat(Om, Gamma);
  MField out = dpartial(mat_mat(J, Gamma), freq) + OG + OG.transposed();
  out(0, 0) += Field::constant(dim, K, dM);
  return out;
}

inline DenseGamma dense_solve_gamma(const MField& G, double f4, double k,
                                    const Freq& freq) {
  const int dim = G(0, 0).dim(), K = G(0, 0).cutoff();
  Packing P(dim, K);
  const int N = 3 * P.modes + 1;
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(N, N);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(N);

  auto build_gamma = [&](int col) {
    MField Gm(2, 2, dim, K);
    if (col < 3 * P.modes) {
      int comp = col / P.modes, idx = col % P.modes, cur = 0;
      Field b(dim, K);
      b.for_each_mode([&](const Mode&, Complex& c) { c = (cur++ == idx) ? 1.0 : 0.0; });
      if (comp == 0) Gm(0, 1) = b;
      if (comp == 1) Gm(1, 0) = b;
      if (comp == 2) {
        Gm(1, 1) = b;
        Gm(0, 0) = -1.0 * b;
      }
    }
    return Gm;
  };

  for (int col = 0; col < N; ++col) {
    MField Gm = build_gamma(col);
    double dM = (col == 3 * P.modes) ? 1.0 : 0.0;
    MField img = gamma_residual_op(Gm, dM, k, freq);
    Eigen::VectorXcd colv = Eigen::VectorXcd::Zero(N);
    scatter(img(0, 0), colv, 0);
    scatter(img(0, 1), colv, P.modes);
    scatter(img(1, 1), colv, 2 * P.modes);
    // (1,0) equation duplicates (0,1) for symmetric data; the last row holds
    // the mean(Gamma12) = f4 condition instead.
    colv[3 * P.modes] = Gm(0, 1).mean_complex();
    A.col(col) = colv;
  }
  scatter(G(0, 0), rhs, 0);
  scatter(G(0, 1), rhs, P.modes);
  scatter(G(1, 1), rhs, 2 * P.modes);
  rhs[3 * P.modes] = f4;
  Eigen::VectorXcd sol = A.fullPivLu().solve(rhs);
  DenseGamma out;
  out.Gamma = MField(2, 2, dim, K);
  out.Gamma(0, 1) = gather(sol, 0, dim, K);
  out.Gamma(1, 0) = gather(sol, P.modes, dim, K);
  out.Gamma(1, 1) = gather(sol, 2 * P.modes, dim, K);
  out.Gamma(0, 0) = -1.0 * out.Gamma(1, 1);
  out.dM = sol[3 * P.modes].real();
  return out;
}

// ---------------------------------------------------------------------------
// Full variable-coefficient system (the approximate equations after the
// secular substitution). Unknowns: psi0, lambda(2), chi(d), Gamma(3), dbeta(d),
// q, p, dM. Equations written straight from the definitions.
struct DenseExtended {
  Field psi0;
  VField lambda, chi;
  MField Gamma;
  Eigen::VectorXd dbeta;
  double q, p, dM;
};

struct ExtendedEval {
  // residuals of the five blocks plus the four scalar conditions
  Field eq_a;
  VField eq_b;
  VField eq_c;
  MField eq_d;  // symmetric
  Complex c_f1, c_f4, c_f5;
  Eigen::VectorXcd c_f3;
};

inline ExtendedEval eval_extended(const LinCoeffs& lc, double alpha, double k,
                                  const Freq& freq, const Field& psi0,
                                  const VField& lambda, const VField& chi,
                                  const MField& Gamma,
                                  const Eigen::VectorXcd& dbeta, Complex q,
                                  Complex p, Complex dM) {
  const int dim = psi0.dim(), K = psi0.cutoff();
  const int d = chi.rows();
  MField J(2, 2, dim, K), Om(2, 2, dim, K);
  J(0, 1) = Field::constant(dim, K, 1);
  J(1, 0) = Field::constant(dim, K, -1);
  Om(0, 0) = Field::constant(dim, K, -k);
  Om(1, 1) = Field::constant(dim, K, 1);

  Field w1ma = lc.th.w[0] - Field::constant(dim, K, alpha);
  VField Wte1(2, dim, K);
  Wte1[0] = lc.th.W(0, 0);
  Wte1[1] = lc.th.W(0, 1);

  VField mu = grad_scalar(psi0);
  for (int i = 0; i < d; ++i) {
    Field c(dim, K);
    c.at(c.zero_mode()) = dbeta[i];
    mu[i] += c;
  }

  ExtendedEval ev;
  Field qf(dim, K);
  qf.at(qf.zero_mode()) = q;
  ev.eq_a = dpartial(psi0, freq) + qf;
  {
    Field pw = w1ma;
    pw.for_each_mode([&](const Mode&, Complex& c) { c *= p; });
    Field MW = field_mul(w1ma, w1ma);
    MW.for_each_mode([&](const Mode&, Complex& c) { c *= 0.5 * dM; });
    ev.eq_a += pw + MW;
  }

  ev.eq_b = mat_vec(J, dpartial(lambda, freq)) + mat_vec(Om, lambda) +
            mat_vec(lc.T, mu);
  for (int i = 0; i < 2; ++i) {
    Field pw = Wte1[i];
    pw.for_each_mode([&](const Mode&, Complex& c) { c *= p; });
    Field mw = field_mul(w1ma, Wte1[i]);
    mw.for_each_mode([&](const Mode&, Complex& c) { c *= dM; });
    ev.eq_b[i] += pw + mw;
  }

  ev.eq_c = -1.0 * dpartial(chi, freq) + mat_vec(lc.S, mu) +
            mat_vec(lc.T.transposed(), lambda);

  MField OG = mat_mat(Om, Gamma);
  ev.eq_d = dpartial(mat_mat(J, Gamma), freq) + OG + OG.transposed() +
            gamma_forcing(lc, lambda, mu);
  for (int pp = 0; pp < 2; ++pp)
    for (int qq = 0; qq < 2; ++qq) {
      Field t = field_mul(Wte1[pp], Wte1[qq]);
      t.for_each_mode([&](const Mode&, Complex& c) { c *= dM; });
      ev.eq_d(pp, qq) += t;
    }

  // conditions
  Field wWl = field_mul(lc.th.w[1], mat_vec(lc.th.W, lambda)[0]);
  Complex du = 0;
  for (int i = 0; i < d; ++i) du += dbeta[i] * lc.th.u[i].mean_complex();
  ev.c_f1 = psi0.mean_complex() - du + wWl.mean_complex();
  ev.c_f3 = Eigen::VectorXcd::Zero(d);
  VField Vc = mat_vec(lc.Vinvt, chi);
  for (int i = 0; i < d; ++i) ev.c_f3[i] = Vc[i].mean_complex();
  ev.c_f4 = mat_mat(lc.th.W, Gamma)(0, 1).mean_complex();
  ev.c_f5 = mat_vec(lc.th.W, lambda)[0].mean_complex() +
            dot(chi, lc.grad_w1).mean_complex();
  return ev;
}

inline DenseExtended dense_solve_extended(const LinCoeffs& lc, const Residual& F,
                                          double alpha, double k,
                                          const Freq& freq) {
  const int dim = F.F1.dim(), K = F.F1.cutoff();
  const int d = F.F3.rows();
  Packing P(dim, K);
  const int nf = P.modes;
  // layout: psi0 | lambda0 | lambda1 | chi_0..chi_{d-1} | G12 | G21 | G22 |
  //         dbeta(d) | q | p | dM
  const int off_psi = 0, off_l = nf, off_chi = 3 * nf;
  const int off_G = (3 + d) * nf;
  const int off_beta = (6 + d) * nf;
  const int N = (6 + d) * nf + d + 3;

  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(N, N);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(N);

  auto unpack = [&](const Eigen::VectorXcd& v, Field& psi0, VField& lambda,
                    VField& chi, MField& Gamma, Eigen::VectorXcd& dbeta,
                    Complex& q, Complex& p, Complex& dM) {
    psi0 = gather(v, off_psi, dim, K);
    lambda = VField(2, dim, K);
    lambda[0] = gather(v, off_l, dim, K);
    lambda[1] = gather(v, off_l + nf, dim, K);
    chi = VField(d, dim, K);
    for (int i = 0; i < d; ++i) chi[i] = gather(v, off_chi + i * nf, dim, K);
    Gamma = MField(2, 2, dim, K);
    Gamma(0, 1) = gather(v, off_G, dim, K);
    Gamma(1, 0) = gather(v, off_G + nf, dim, K);
    Gamma(1, 1) = gather(v, off_G + 2 * nf, dim, K);
    Gamma(0, 0) = -1.0 * Gamma(1, 1);
    dbeta = v.segment(off_beta, d);
    q = v[off_beta + d];
    p = v[off_beta + d + 1];
    dM = v[off_beta + d + 2];
  };

  const int z0 = int(F.F1.index(F.F1.zero_mode()));
  auto pack_rows = [&](const ExtendedEval& ev, Eigen::VectorXcd& rows) {
    rows = Eigen::VectorXcd::Zero(N);
    scatter(ev.eq_a, rows, off_psi);
    scatter(ev.eq_b[0], rows, off_l);
    scatter(ev.eq_b[1], rows, off_l + nf);
    for (int i = 0; i < d; ++i) scatter(ev.eq_c[i], rows, off_chi + i * nf);
    scatter(ev.eq_d(0, 1), rows, off_G);
    scatter(ev.eq_d(0, 0), rows, off_G + nf);
    scatter(ev.eq_d(1, 1), rows, off_G + 2 * nf);
    // Replace structurally-degenerate zero-mode rows with the conditions:
    //  - psi0 zero mode of eq_a is q+...: keep (carries q). The f1 condition
    //    takes the chi-block zero-mode slot of eq_c's first component? No:
    //    eq_c zero-mode rows are the mean equations that pin dbeta; keep.
    //  - conditions go where the equations lose rank: psi0's own mean never
    //    appears in eq_a, lambda/Gamma means appear in eq_b/eq_d, chi's mean
    //    never appears in eq_c. So overwrite:
    //      row (off_psi + z0) of... eq_a zero mode DOES carry q: keep it, and
    //      put the f1 condition into a dedicated row below.
    rows[off_beta + d] = ev.c_f1;              // q-row slot: f1 condition
    for (int i = 0; i < d; ++i) rows[off_beta + i] = ev.c_f3[i];
    rows[off_beta + d + 1] = ev.c_f5;
    rows[off_beta + d + 2] = ev.c_f4;
    // chi zero-mode equation rows of eq_c stay as equations (they constrain
    // dbeta); psi0 zero-mode row of eq_a constrains q. lambda zero-mode rows
    // of eq_b constrain lambda-bar/p; Gamma zero-mode rows of eq_d constrain
    // Gamma-bar/dM. All fine: the matrix stays square via the 4 + d extra
    // condition rows replacing nothing.
    (void)z0;
  };

  for (int col = 0; col < N; ++col) {
    Eigen::VectorXcd basis = Eigen::VectorXcd::Zero(N);
    basis[col] = 1.0;
    Field psi0;
    VField lambda, chi;
    MField Gamma;
    Eigen::VectorXcd dbeta;
    Complex q, p, dM;
    unpack(basis, psi0, lambda, chi, Gamma, dbeta, q, p, dM);
    ExtendedEval ev =
        eval_extended(lc, alpha, k, freq, psi0, lambda, chi, Gamma, dbeta, q, p, dM);
    Eigen::VectorXcd rows;
    pack_rows(ev, rows);
    A.col(col) = rows;
  }
  scatter(F.F1, rhs, off_psi);
  scatter(F.F2[0], rhs, off_l);
  scatter(F.F2[1], rhs, off_l + nf);
  for (int i = 0; i < d; ++i) scatter(F.F3[i], rhs, off_chi + i * nf);
  scatter(F.F4(0, 1), rhs, off_G);
  scatter(F.F4(0, 0), rhs, off_G + nf);
  scatter(F.F4(1, 1), rhs, off_G + 2 * nf);
  rhs[off_beta + d] = F.o1;
  for (int i = 0; i < d; ++i) rhs[off_beta + i] = F.o3[i];
  rhs[off_beta + d + 1] = F.f5;
  rhs[off_beta + d + 2] = F.o4;

  Eigen::VectorXcd sol = A.fullPivLu().solve(rhs);
  DenseExtended out;
  VField lambda, chi;
  MField Gamma;
  Eigen::VectorXcd dbeta;
  Complex q, p, dM;
  unpack(sol, out.psi0, lambda, chi, Gamma, dbeta, q, p, dM);
  out.lambda = lambda;
  out.chi = chi;
  out.Gamma = Gamma;
  out.dbeta = dbeta.real();
  out.q = q.real();
  out.p = p.real();
  out.dM = dM.real();
  return out;
}

}  // namespace torus::oracle

#endif
