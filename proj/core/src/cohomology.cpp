#include "torus/cohomology.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace torus {

namespace {

bool is_zero_mode(const Mode& m) {
  for (int i = 0; i < m.dim; ++i)
    if (m[i] != 0) return false;
  return true;
}

Field star(const Field& f) {
  Field g = f;
  g.at(g.zero_mode()) = Complex(0, 0);
  return g;
}

VField star(const VField& f) {
  VField g = f;
  for (int i = 0; i < f.rows(); ++i) g[i] = star(f[i]);
  return g;
}

double size_of(const VField& f) { return f.norm_weighted(0, 0); }

}  // namespace

Field solve_dpartial(const Field& g, const Freq& freq, const CohomologyOptions& opt,
                     SolveStats* stats) {
  if (std::abs(g.mean_complex()) > opt.zero_mean_tol)
    throw ZeroMeanViolation("solve_dpartial: right-hand side has nonzero mean");
  const double floor = opt.divisor_floor_rel * freq.gamma();
  double worst = std::numeric_limits<double>::infinity();
  Field psi = g;
  psi.for_each_mode([&](const Mode& m, Complex& v) {
    if (is_zero_mode(m)) {
      v = Complex(0, 0);
      return;
    }
    double div = freq.dot(m);
    worst = std::min(worst, std::abs(div));
    if (std::abs(div) < floor)
      throw DivisorUnderflow("solve_dpartial: |omega.s| below divisor floor");
    v /= Complex(0, div);
  });
  if (stats) stats->worst_divisor = std::min(stats->worst_divisor, worst);
  return psi;
}

VField solve_oscillator(const VField& Hrhs, double k, const Freq& freq,
                        const CohomologyOptions& opt, SolveStats* stats) {
  if (k < 0) throw ConfigError("solve_oscillator: k must be >= 0");
  if (std::abs(Hrhs[0].mean_complex()) > opt.zero_mean_tol ||
      std::abs(Hrhs[1].mean_complex()) > opt.zero_mean_tol)
    throw ZeroMeanViolation("solve_oscillator: right-hand side has nonzero mean");
  const double floor = opt.divisor_floor_rel * freq.gamma();
  double worst = std::numeric_limits<double>::infinity();
  VField lam = Hrhs;
  Field& l1 = lam[0];
  Field& l2 = lam[1];
  const Field h1 = Hrhs[0];
  const Field h2 = Hrhs[1];
  l1.for_each_mode([&](const Mode& m, Complex& v) {
    if (is_zero_mode(m)) {
      v = Complex(0, 0);
      return;
    }
    double th = freq.dot(m);
    double div = k + th * th;
    worst = std::min(worst, div);
    if (div < floor * floor)
      throw DivisorUnderflow("solve_oscillator: k + (omega.s)^2 below floor");
    v = -(h1.coeff(m) - Complex(0, th) * h2.coeff(m)) / div;
  });
  l2.for_each_mode([&](const Mode& m, Complex& v) {
    if (is_zero_mode(m)) {
      v = Complex(0, 0);
      return;
    }
    double th = freq.dot(m);
    v = h2.coeff(m) + Complex(0, th) * l1.coeff(m);
  });
  if (stats) stats->worst_divisor = std::min(stats->worst_divisor, worst);
  return lam;
}

GammaSolution solve_gamma(const MField& G, double f4, double k, const Freq& freq,
                          const CohomologyOptions& opt, SolveStats* stats) {
  const int d = G(0, 0).dim();
  const int K = G(0, 0).cutoff();
  const double floor = opt.divisor_floor_rel * freq.gamma();
  double worst = std::numeric_limits<double>::infinity();

  GammaSolution out;
  out.Gamma = MField(2, 2, d, K);
  Eigen::Matrix2d Gbar = G.mean();
  // Mean part: Gamma_bar = [[-G22/2, f4], [k f4 + G21, G22/2]], dM = G11 - k G22.
  out.dM = Gbar(0, 0) - k * Gbar(1, 1);
  out.Gamma(0, 0).at(out.Gamma(0, 0).zero_mode()) = -0.5 * Gbar(1, 1);
  out.Gamma(0, 1).at(out.Gamma(0, 1).zero_mode()) = f4;
  out.Gamma(1, 0).at(out.Gamma(1, 0).zero_mode()) = k * f4 + Gbar(1, 0);
  out.Gamma(1, 1).at(out.Gamma(1, 1).zero_mode()) = 0.5 * Gbar(1, 1);

  // Oscillating part, modewise:
  //   G12_hat = 2/(th^2+4k) [ (1/(i th))(G11 - k G22) + (i th / 2) G22 - G12 ]
  //   G22_hat = (G22 + i th Gamma12)/2, G21_hat = G12 + k Gamma12 - i th Gamma22.
  Field g11 = star(G(0, 0)), g12 = star(G(0, 1)), g22 = star(G(1, 1));
  Field probe(d, K);
  probe.for_each_mode([&](const Mode& m, Complex&) {
    if (is_zero_mode(m)) return;
    double th = freq.dot(m);
    double div = th * th + 4 * k;
    worst = std::min(worst, div);
    if (div < floor * floor)
      throw DivisorUnderflow("solve_gamma: (omega.s)^2 + 4k below floor");
    Complex ith(0, th);
    Complex c12 = 2.0 / div *
                  ((g11.coeff(m) - k * g22.coeff(m)) / ith +
                   0.5 * ith * g22.coeff(m) - g12.coeff(m));
    Complex c22 = 0.5 * (g22.coeff(m) + ith * c12);
    Complex c21 = g12.coeff(m) + k * c12 - ith * c22;
    out.Gamma(0, 1).at(m) = c12;
    out.Gamma(1, 1).at(m) = c22;
    out.Gamma(1, 0).at(m) = c21;
    out.Gamma(0, 0).at(m) = -c22;
  });
  if (stats) stats->worst_divisor = std::min(stats->worst_divisor, worst);
  return out;
}

TruncatedSolution solve_truncated(const LinCoeffs& lc, const Field& F1,
                                  const VField& F2, const VField& F3, double f1,
                                  const Eigen::VectorXd& f3, double f5, double k,
                                  const Freq& freq, const CohomologyOptions& opt) {
  const int d = F3.rows();
  const int K = F1.cutoff();
  const int dim = F1.dim();

  TruncatedSolution sol;
  sol.q = F1.mean();
  Field psi_star = solve_dpartial(star(F1), freq, opt, &sol.stats);
  sol.psi0 = psi_star + Field::constant(dim, K, f1);
  VField gpsi = grad_scalar(sol.psi0);

  Eigen::MatrixXd Sbar = lc.S.mean();
  Eigen::MatrixXd Tbar = lc.T.mean();
  Eigen::VectorXd t1bar = Tbar.row(0).transpose();
  Eigen::VectorXd t2bar = Tbar.row(1).transpose();
  Eigen::MatrixXd Kbar = Sbar - t2bar * t2bar.transpose();
  Eigen::PartialPivLU<Eigen::MatrixXd> Klu(Kbar);
  if (std::abs(Kbar.determinant()) < 1e-14)
    throw NoContraction("solve_truncated: K0-type matrix is singular");

  Eigen::VectorXd a2terms = (mat_vec(lc.T, gpsi)).mean();
  Eigen::VectorXd b_fixed = (mat_vec(lc.S, gpsi)).mean();
  Eigen::Vector2d a = F2.mean() - Eigen::Vector2d(a2terms[0], a2terms[1]);

  VField lam_star(2, dim, K);
  sol.dbeta = Eigen::VectorXd::Zero(d);
  double last_delta = 0, prev_delta = 0;
  int it = 0;
  for (; it < opt.max_inner; ++it) {
    Eigen::VectorXd b =
        F3.mean() - b_fixed - mat_vec(lc.T.transposed(), lam_star).mean();
    Eigen::VectorXd rhs = b - f5 * t1bar - a[1] * t2bar;
    sol.dbeta = Klu.solve(rhs);
    double lbar2 = a[1] - t2bar.dot(sol.dbeta);
    sol.p = a[0] + k * f5 - t1bar.dot(sol.dbeta);

    VField mu = gpsi;
    for (int i = 0; i < d; ++i)
      mu[i] += Field::constant(dim, K, sol.dbeta[i]);
    VField G = F2 - mat_vec(lc.T, mu);
    G[0] -= Field::constant(dim, K, sol.p - k * f5);
    G[1] -= Field::constant(dim, K, lbar2);
    VField lam_new = solve_oscillator(star(G), k, freq, opt, &sol.stats);

    last_delta = size_of(lam_new - lam_star);
    lam_star = lam_new;
    double scale = std::max(1.0, size_of(lam_star));
    if (it > 0 && prev_delta > 0)
      sol.stats.inner_contraction =
          std::max(sol.stats.inner_contraction, last_delta / prev_delta);
    prev_delta = last_delta;
    if (last_delta <= opt.fp_tol * scale) break;
  }
  if (it >= opt.max_inner)
    throw NoContraction("solve_truncated: inner fixed point did not converge");
  sol.stats.inner_iters = it + 1;

  double lbar2 = a[1] - t2bar.dot(sol.dbeta);
  sol.lambda = lam_star;
  sol.lambda[0] += Field::constant(dim, K, f5);
  sol.lambda[1] += Field::constant(dim, K, lbar2);

  VField mu = gpsi;
  for (int i = 0; i < d; ++i) mu[i] += Field::constant(dim, K, sol.dbeta[i]);
  VField chi_rhs =
      mat_vec(lc.S, mu) + mat_vec(lc.T.transposed(), sol.lambda) - F3;
  sol.chi = VField(d, dim, K);
  for (int i = 0; i < d; ++i) {
    sol.chi[i] = solve_dpartial(star(chi_rhs[i]), freq, opt, &sol.stats);
    sol.chi[i] += Field::constant(dim, K, f3[i]);
  }
  return sol;
}

namespace {

// One pass of the extended-truncated solve (lita6): the nisa23 block plus the
// Gamma equation with the forcing families.
struct ExtendedIterate {
  TruncatedSolution tr;
  MField Gamma;
  double dM = 0;
};

ExtendedIterate solve_extended_truncated(const LinCoeffs& lc, const Field& F1,
                                         const VField& F2, const VField& F3,
                                         const MField& F4, double f1,
                                         const Eigen::VectorXd& f3, double f4,
                                         double f5, double k, const Freq& freq,
                                         const CohomologyOptions& opt) {
  ExtendedIterate out;
  out.tr = solve_truncated(lc, F1, F2, F3, f1, f3, f5, k, freq, opt);
  const int d = F3.rows();
  const int dim = F1.dim();
  const int K = F1.cutoff();
  VField mu = grad_scalar(out.tr.psi0);
  for (int i = 0; i < d; ++i)
    mu[i] += Field::constant(dim, K, out.tr.dbeta[i]);
  MField G4 = F4 - gamma_forcing(lc, out.tr.lambda, mu);
  GammaSolution g = solve_gamma(G4, f4, k, freq, opt, &out.tr.stats);
  out.Gamma = g.Gamma;
  out.dM = g.dM;
  return out;
}

}  // namespace

LinSolution solve_extended(const LinCoeffs& lc, const Residual& F, double alpha,
                           double k, const Freq& freq,
                           const CohomologyOptions& opt) {
  const int d = F.F3.rows();
  const int dim = F.F1.dim();
  const int K = F.F1.cutoff();

  const Field& w1 = lc.th.w[0];
  Field w1ma = w1 - Field::constant(dim, K, alpha);
  Field w1ma2 = field_mul(w1ma, w1ma);
  VField Wte1(2, dim, K);
  Wte1[0] = lc.th.W(0, 0);
  Wte1[1] = lc.th.W(0, 1);
  VField w1Wte1 = scale(w1ma, Wte1);
  Eigen::VectorXd ubar = lc.th.u.mean();

  LinSolution sol;
  sol.tangent = Tangent::zero(dim, K);
  double p = 0, dM = 0;
  Eigen::VectorXd dbeta = Eigen::VectorXd::Zero(d);
  VField lambda(2, dim, K), chi(d, dim, K);
  MField Gamma(2, 2, dim, K);
  Field psi0(dim, K);

  double prev_change = 0;
  int it = 0;
  for (; it < opt.max_outer; ++it) {
    // Xi3 corrections from the previous iterate.
    Field F1c = F.F1 - p * w1ma - 0.5 * dM * w1ma2;
    VField F2c = F.F2 - dM * w1Wte1;
    F2c[0] -= p * (lc.th.W(0, 0) - Field::constant(dim, K, 1.0));
    F2c[1] -= p * lc.th.W(0, 1);
    MField F4c = F.F4;
    F4c(0, 0) += Field::constant(dim, K, dM);
    for (int pp = 0; pp < 2; ++pp)
      for (int qq = 0; qq < 2; ++qq)
        F4c(pp, qq) -= dM * field_mul(Wte1[pp], Wte1[qq]);

    double f1c = F.o1 + dbeta.dot(ubar) -
                 field_mul(lc.th.w[1], mat_vec(lc.th.W, lambda)[0]).mean();
    Eigen::VectorXd f3c =
        F.o3 + chi.mean() - mat_vec(lc.Vinvt, chi).mean();
    double f4c = F.o4 + Gamma(0, 1).mean() -
                 mat_mat(lc.th.W, Gamma)(0, 1).mean();
    double f5c = F.f5 + lambda[0].mean() -
                 mat_vec(lc.th.W, lambda)[0].mean() -
                 dot(chi, lc.grad_w1).mean();

    ExtendedIterate nx = solve_extended_truncated(lc, F1c, F2c, F.F3, F4c, f1c,
                                                  f3c, f4c, f5c, k, freq, opt);
    sol.stats.merge(nx.tr.stats);

    double change = size_of(nx.tr.lambda - lambda) + size_of(nx.tr.chi - chi) +
                    norm_weighted(nx.tr.psi0 - psi0, 0, 0) +
                    (nx.Gamma - Gamma).norm_weighted(0, 0) +
                    std::abs(nx.tr.p - p) + std::abs(nx.dM - dM) +
                    (nx.tr.dbeta - dbeta).cwiseAbs().maxCoeff();
    double scale =
        std::max(1.0, size_of(nx.tr.lambda) + norm_weighted(nx.tr.psi0, 0, 0));
    psi0 = nx.tr.psi0;
    lambda = nx.tr.lambda;
    chi = nx.tr.chi;
    Gamma = nx.Gamma;
    dbeta = nx.tr.dbeta;
    p = nx.tr.p;
    dM = nx.dM;
    sol.q = nx.tr.q;
    if (it > 0 && prev_change > 0)
      sol.stats.outer_contraction =
          std::max(sol.stats.outer_contraction, change / prev_change);
    prev_change = change;
    if (change <= opt.fp_tol * scale) break;
  }
  if (it >= opt.max_outer)
    throw NoContraction("solve_extended: outer fixed point did not converge");
  sol.stats.outer_iters = it + 1;

  sol.tangent.dbeta = dbeta;
  sol.tangent.psi0 = psi0;
  sol.tangent.chi = chi;
  sol.tangent.lambda = lambda;
  sol.tangent.Gamma = Gamma;
  sol.p = p;
  sol.dM = dM;
  // Secular back-substitution (q, p, dM) -> (de, dm, dM), with
  // q = -de + dbeta.omega + alpha dm + alpha^2 dM / 2 since Phi1 carries -e.
  sol.dm = p - alpha * dM;
  sol.de = -sol.q + freq.omega().dot(dbeta) + alpha * p - 0.5 * alpha * alpha * dM;
  return sol;
}

StateDelta approx_inverse(const Params& f, const State& s, const LinCoeffs& lc,
                          const Residual& F, const Freq& freq,
                          const CohomologyOptions& opt, SolveStats* stats) {
  LinSolution sol = solve_extended(lc, F, f.alpha, f.k, freq, opt);
  if (stats) stats->merge(sol.stats);
  StateDelta d;
  d.dcoord = xi(s.coord, lc.th, sol.tangent);
  d.de = sol.de;
  d.dm = sol.dm;
  d.dM = sol.dM;
  return d;
}

StateDelta approx_inverse(const Params& f, const State& s, const Residual& F,
                          const HamiltonianSpec& H, const CohomologyOptions& opt,
                          const ResidualOptions& ropt, SolveStats* stats) {
  LinCoeffs lc = lin_coeffs(f, s, H, ropt);
  return approx_inverse(f, s, lc, F, H.freq(), opt, stats);
}

}  // namespace torus
