#include "torus/variational.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace torus {

namespace {

Field star(const Field& f) {
  Field g = f;
  g.at(g.zero_mode()) = Complex(0, 0);
  return g;
}

double two_pi_pow(int d) { return std::pow(2.0 * M_PI, d); }

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

// Solve the general linear boundary value problem with data (g1, g2, gamma)
// through the extended variable-coefficient solver.
struct GeneralSolution {
  VField mu, lambda, chi;
  double p = 0;
  double gamma_residue = 0;
};

GeneralSolution solve_general(const LinCoeffs& lc, const Field& g1,
                              const VField& g2, double gamma, const Params& f,
                              const Freq& freq, const CohomologyOptions& copt) {
  const int dim = g1.dim();
  const int K = g1.cutoff();
  const int d = lc.S.rows();
  // The general boundary value problem has no Gamma block: it is the
  // extended system with the forcing families switched off, and then
  // Gamma = dM = 0 drops out of the homogeneous Gamma equation.
  LinCoeffs lc0 = lc;
  for (auto& U : lc0.U1) U = MField(2, 2, dim, K);
  for (auto& U : lc0.U2) U = MField(2, 2, dim, K);
  for (auto& E : lc0.E) E = MField(2, 2, dim, K);
  for (auto& Kf : lc0.Kf) Kf = MField(2, 2, dim, K);
  Residual F;
  F.F1 = -1.0 * star(g1);
  F.F2 = g2;
  F.F3 = VField(d, dim, K);
  F.F4 = MField(2, 2, dim, K);
  F.f5 = gamma;
  F.o1 = 0;
  F.o3 = Eigen::VectorXd::Zero(d);
  F.o4 = 0;
  LinSolution s = solve_extended(lc0, F, f.alpha, f.k, freq, copt);
  GeneralSolution out;
  out.lambda = s.tangent.lambda;
  out.chi = s.tangent.chi;
  out.mu = grad_scalar(s.tangent.psi0);
  for (int i = 0; i < d; ++i)
    out.mu[i] += Field::constant(dim, K, s.tangent.dbeta[i]);
  out.p = s.p;
  out.gamma_residue =
      s.tangent.Gamma.norm_weighted(0, 0) + std::abs(s.dM) + std::abs(s.q);
  return out;
}

}  // namespace

JacobiSet jacobi(const Params& f, const ModifiedSolution& sol,
                 const HamiltonianSpec& H, const CohomologyOptions& copt,
                 const ResidualOptions& ropt) {
  if (!sol.converged) throw Error("jacobi: solution not converged");
  LinCoeffs lc = lin_coeffs(f, sol.state, H, ropt);
  const int dim = H.dim();
  const int K = sol.state.coord.cutoff();

  JacobiSet js;
  // System 1: (g1, g2, gamma) = (0, 0, 1).
  {
    Field g1(dim, K);
    VField g2(2, dim, K);
    GeneralSolution s = solve_general(lc, g1, g2, 1.0, f, H.freq(), copt);
    js.mu1 = s.mu;
    js.lambda1 = s.lambda;
    js.chi1 = s.chi;
    js.p1 = s.p;
    js.gamma_residue = s.gamma_residue;
  }
  // System 2: (g1, g2, gamma) = ((w1*)^2/2, -w1* W^T e1, 0).
  {
    Field g1 = 0.5 * field_mul(lc.w1star, lc.w1star);
    VField Wte1(2, dim, K);
    Wte1[0] = lc.th.W(0, 0);
    Wte1[1] = lc.th.W(0, 1);
    VField g2 = scale(lc.w1star, Wte1);
    g2 = -1.0 * g2;
    GeneralSolution s = solve_general(lc, g1, g2, 0.0, f, H.freq(), copt);
    js.mu2 = s.mu;
    js.lambda2 = s.lambda;
    js.chi2 = s.chi;
    js.p2 = s.p;
    js.gamma_residue = std::max(js.gamma_residue, s.gamma_residue);
  }
  return js;
}

QForm qform(const JacobiSet& js, const LinCoeffs& lc, double k, const Freq& freq) {
  const int dim = js.mu1[0].dim();
  const int K = js.mu1[0].cutoff();
  MField J = sympl_j(dim, K);
  MField Om = omega_matrix(k, dim, K);
  auto entry = [&](const VField& mi, const VField& li, const VField& mj,
                   const VField& lj) {
    Field integ = dot(mat_vec(lc.S, mi), mj);
    VField op = mat_vec(J, dpartial(li, freq)) + mat_vec(Om, li);
    integ -= dot(op, lj);
    return two_pi_pow(dim) * integ.mean();
  };
  QForm L;
  L.L11 = entry(js.mu1, js.lambda1, js.mu1, js.lambda1);
  L.L12 = entry(js.mu1, js.lambda1, js.mu2, js.lambda2);
  L.L22 = entry(js.mu2, js.lambda2, js.mu2, js.lambda2);
  return L;
}

double action(const Params& f, const ModifiedSolution& sol,
              const HamiltonianSpec& H, const ResidualOptions& ropt) {
  (void)f;
  const int dim = H.dim();
  ChartOptions copt{ropt.grid, ropt.det_floor};
  Coeffs th = theta(sol.state.coord, copt);
  Embedding emb{th.u, th.v, th.w};
  HamDerivs hd = eval_all(H, emb, DerivDepth::Value, ropt.grid);

  Field integ = dot(dpartial(th.u, H.freq()), th.v);
  const int K = sol.state.coord.cutoff();
  for (int i = 0; i < dim; ++i)
    integ += H.freq().omega()[i] * th.v[i];
  integ += field_mul(th.w[1], dpartial(th.w[0], H.freq()));
  integ -= hd.value;
  (void)K;
  return two_pi_pow(dim) * integ.mean();
}

ActionSurface action_surface(const SweepTable& table, const HamiltonianSpec& H,
                             const CohomologyOptions& copt,
                             const ResidualOptions& ropt) {
  ActionSurface surf;
  surf.alphas = table.alphas;
  surf.ks = table.ks;
  const size_t na = table.alphas.size(), nk = table.ks.size();
  surf.samples.resize(na * nk);

  std::vector<Field> w1stars(na * nk);
  const int dim = H.dim();

  for (size_t ik = 0; ik < nk; ++ik)
    for (size_t ia = 0; ia < na; ++ia) {
      const ModifiedSolution& cell = table.at(int(ia), int(ik));
      ActionSample& smp = surf.samples[ik * na + ia];
      smp.alpha = table.alphas[ia];
      smp.k = table.ks[ik];
      smp.converged = cell.converged;
      if (!cell.converged) continue;
      Params f{smp.alpha, smp.k};
      smp.m = cell.state.m;
      smp.M = cell.state.M;
      smp.psi = action(f, cell, H, ropt);
      LinCoeffs lc = lin_coeffs(f, cell.state, H, ropt);
      JacobiSet js = jacobi(f, cell, H, copt, ropt);
      QForm L = qform(js, lc, smp.k, H.freq());
      smp.L11 = L.L11;
      smp.L12 = L.L12;
      smp.L22 = L.L22;
      w1stars[ik * na + ia] = lc.w1star;
    }

  // Finite differences across the grid (alpha wraps over [0, 2pi)).
  const double two_pi = 2.0 * M_PI;
  for (size_t ik = 0; ik < nk; ++ik)
    for (size_t ia = 0; ia < na; ++ia) {
      ActionSample& smp = surf.samples[ik * na + ia];
      if (!smp.converged) continue;
      if (na >= 3) {
        size_t ip = (ia + 1) % na, im = (ia + na - 1) % na;
        const ActionSample& sp = surf.at(ip, ik);
        const ActionSample& sm = surf.at(im, ik);
        double ha = two_pi / double(na);
        if (sp.converged && sm.converged) {
          smp.fd_dalpha = (sp.psi - sm.psi) / (2 * ha);
          Field dw1 = (1.0 / (2 * ha)) *
                      (w1stars[ik * na + ip] - w1stars[ik * na + im]);
          smp.sigma1 = two_pi_pow(dim) *
                       field_mul(w1stars[ik * na + ia], dw1).mean();
          Field d2w1 = (1.0 / (ha * ha)) *
                       (w1stars[ik * na + ip] - 2.0 * w1stars[ik * na + ia] +
                        w1stars[ik * na + im]);
          smp.sigma2 = two_pi_pow(dim) *
                       (field_mul(dw1, dw1).mean() +
                        field_mul(w1stars[ik * na + ia], d2w1).mean());
        }
      }
      if (nk >= 2) {
        size_t kp = std::min(ik + 1, nk - 1), km = ik == 0 ? 0 : ik - 1;
        const ActionSample& sp = surf.at(ia, kp);
        const ActionSample& sm = surf.at(ia, km);
        double hk = surf.ks[kp] - surf.ks[km];
        if (sp.converged && sm.converged && hk > 0) {
          smp.fd_dk = (sp.psi - sm.psi) / hk;
          smp.dM_dk_fd = (sp.M - sm.M) / hk;
        }
      }
      smp.dpsi_dalpha_id =
          two_pi_pow(dim) * (smp.m + smp.alpha * smp.M) + smp.sigma1 * smp.M;
      smp.dpsi_dk_id = smp.M * smp.dM_dk_fd * smp.L22;
    }
  return surf;
}

namespace {

struct Objective {
  const HamiltonianSpec& H;
  const SweepTable& table;
  SolveOptions sopts;
  mutable int evals = 0;

  // Bifurcation-equation residual m^2 + M^2 at (alpha, k), solved from the
  // nearest grid cell as warm start. Returns +inf on failure.
  double operator()(double alpha, double k, double* m_out = nullptr,
                    double* M_out = nullptr, double* psi_out = nullptr) const {
    ++evals;
    if (k < 0 || k > 1) return std::numeric_limits<double>::infinity();
    size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (size_t ik = 0; ik < table.ks.size(); ++ik)
      for (size_t ia = 0; ia < table.alphas.size(); ++ia) {
        if (!table.at(int(ia), int(ik)).converged) continue;
        double da = table.alphas[ia] - alpha, dk = table.ks[ik] - k;
        double dist = da * da + dk * dk;
        if (dist < bd) {
          bd = dist;
          best = ik * table.alphas.size() + ia;
        }
      }
    try {
      Params f{alpha, k};
      ModifiedSolution sol =
          solve_modified(f, H, sopts, &table.cells[best].state);
      if (m_out) *m_out = sol.state.m;
      if (M_out) *M_out = sol.state.M;
      if (psi_out) *psi_out = action(f, sol, H);
      double m = sol.state.m, M = sol.state.M;
      return m * m + M * M;
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  }
};

}  // namespace

BifurcationReport minimize_action(const SweepTable& table,
                                  const ActionSurface& surface,
                                  const HamiltonianSpec& H,
                                  const SolveOptions& sopts,
                                  const RefineOptions& ropts) {
  BifurcationReport rep;
  const size_t na = surface.alphas.size(), nk = surface.ks.size();

  // Grid stage: argmin of the Percival action.
  double pmin = std::numeric_limits<double>::infinity();
  double pmax = -std::numeric_limits<double>::infinity();
  size_t bi = 0, bk = 0;
  for (size_t ik = 0; ik < nk; ++ik)
    for (size_t ia = 0; ia < na; ++ia) {
      const ActionSample& s = surface.at(ia, ik);
      if (!s.converged) continue;
      pmax = std::max(pmax, s.psi);
      if (s.psi < pmin) {
        pmin = s.psi;
        bi = ia;
        bk = ik;
      }
    }
  rep.grid_psi_min = pmin;
  rep.flat_landscape = (pmax - pmin) <= ropts.flat_tol * std::max(1.0, std::abs(pmin));

  double a0 = surface.alphas[bi], k0 = surface.ks[bk];

  if (rep.flat_landscape) {
    // Degenerate epsilon = 0 landscape: the bifurcation equations are solved
    // exactly on the k = 0 row already.
    rep.alpha0 = a0;
    rep.k0 = 0;
    const ModifiedSolution& cell = table.at(int(bi), 0);
    rep.m = cell.state.m;
    rep.M = cell.state.M;
    rep.psi = surface.at(bi, 0).psi;
    rep.boundary_k0 = true;
    rep.degenerate_w1star = true;
    return rep;
  }

  // Refinement stage: derivative-free simplex descent on the bifurcation
  // residual m^2 + M^2. The action's k-curvature is O(eps^2), so the action
  // itself cannot pin |M| below ~1e-9 in doubles; by the derivative
  // identities both objectives share the minimizer.
  Objective obj{H, table, sopts, 0};
  double da = na > 1 ? (surface.alphas[1] - surface.alphas[0]) : 0.1;
  double dk = nk > 1 ? (surface.ks[1] - surface.ks[0]) : 0.05;

  struct Vert {
    double a, k, f;
  };
  std::array<Vert, 3> simplex;
  simplex[0] = {a0, k0, obj(a0, k0)};
  simplex[1] = {a0 + 0.5 * da, k0, obj(a0 + 0.5 * da, k0)};
  simplex[2] = {a0, std::min(1.0, k0 + 0.5 * dk), 0};
  simplex[2].f = obj(simplex[2].a, simplex[2].k);

  auto sort_simplex = [&] {
    std::sort(simplex.begin(), simplex.end(),
              [](const Vert& x, const Vert& y) { return x.f < y.f; });
  };
  sort_simplex();
  while (obj.evals < ropts.max_evals) {
    double spread = std::max(
        {std::abs(simplex[0].a - simplex[2].a), std::abs(simplex[0].k - simplex[2].k),
         std::abs(simplex[0].a - simplex[1].a), std::abs(simplex[0].k - simplex[1].k)});
    if (simplex[0].f <= ropts.simplex_tol * ropts.simplex_tol &&
        spread < 1e-10)
      break;
    if (spread < 1e-13) break;
    double ca = 0.5 * (simplex[0].a + simplex[1].a);
    double ck = 0.5 * (simplex[0].k + simplex[1].k);
    Vert refl{ca + (ca - simplex[2].a), std::clamp(ck + (ck - simplex[2].k), 0.0, 1.0), 0};
    refl.f = obj(refl.a, refl.k);
    if (refl.f < simplex[0].f) {
      Vert exp_{ca + 2 * (ca - simplex[2].a),
                std::clamp(ck + 2 * (ck - simplex[2].k), 0.0, 1.0), 0};
      exp_.f = obj(exp_.a, exp_.k);
      simplex[2] = exp_.f < refl.f ? exp_ : refl;
    } else if (refl.f < simplex[1].f) {
      simplex[2] = refl;
    } else {
      Vert con{0.5 * (ca + simplex[2].a), 0.5 * (ck + simplex[2].k), 0};
      con.f = obj(con.a, con.k);
      if (con.f < simplex[2].f) {
        simplex[2] = con;
      } else {
        for (int i = 1; i < 3; ++i) {
          simplex[size_t(i)].a = 0.5 * (simplex[size_t(i)].a + simplex[0].a);
          simplex[size_t(i)].k = 0.5 * (simplex[size_t(i)].k + simplex[0].k);
          simplex[size_t(i)].f = obj(simplex[size_t(i)].a, simplex[size_t(i)].k);
        }
      }
    }
    sort_simplex();
  }

  rep.alpha0 = simplex[0].a;
  rep.k0 = simplex[0].k;

  // Newton polish on (m, M)(alpha, k) = 0 with a finite-difference Jacobian;
  // the simplex lands near the root, Newton closes the last decades.
  {
    double a = rep.alpha0, kk = rep.k0;
    const double hfd = 1e-6;
    for (int it = 0; it < 8; ++it) {
      double m0 = 0, M0 = 0;
      if (!std::isfinite(obj(a, kk, &m0, &M0))) break;
      if (std::max(std::abs(m0), std::abs(M0)) < 1e-13) break;
      double mp = 0, Mp = 0, ma = 0, Ma = 0;
      double kup = std::min(1.0, kk + hfd);
      double kdn = std::max(0.0, kk - hfd);
      if (!std::isfinite(obj(a + hfd, kk, &ma, &Ma))) break;
      if (!std::isfinite(obj(a, kup, &mp, &Mp))) break;
      double mdn = 0, Mdn = 0;
      if (!std::isfinite(obj(a, kdn, &mdn, &Mdn))) break;
      Eigen::Matrix2d Jac;
      Jac << (ma - m0) / hfd, (mp - mdn) / (kup - kdn),
             (Ma - M0) / hfd, (Mp - Mdn) / (kup - kdn);
      if (std::abs(Jac.determinant()) < 1e-14) break;
      Eigen::Vector2d step = Jac.partialPivLu().solve(Eigen::Vector2d(m0, M0));
      double an = a - step[0];
      double kn = std::clamp(kk - step[1], 0.0, 1.0);
      double mn = 0, Mn = 0;
      if (!std::isfinite(obj(an, kn, &mn, &Mn))) break;
      if (mn * mn + Mn * Mn >= m0 * m0 + M0 * M0) break;
      a = an;
      kk = kn;
    }
    rep.alpha0 = a;
    rep.k0 = kk;
  }

  double m = 0, M = 0, psi = 0;
  obj(rep.alpha0, rep.k0, &m, &M, &psi);
  rep.m = m;
  rep.M = M;
  rep.psi = psi;
  rep.refine_evals = obj.evals;
  rep.boundary_k0 = rep.k0 <= ropts.k_boundary_tol;

  // Degeneracy scan along the alpha0 fiber (mara5 step 2 detection).
  size_t ia_near = bi;
  double best = std::numeric_limits<double>::infinity();
  for (size_t ia = 0; ia < na; ++ia) {
    double d = std::abs(surface.alphas[ia] - rep.alpha0);
    if (d < best) {
      best = d;
      ia_near = ia;
    }
  }
  double w1max = 0;
  for (size_t ik = 0; ik < nk; ++ik) {
    const ModifiedSolution& cell = table.at(int(ia_near), int(ik));
    if (!cell.converged) continue;
    Field w1s = cell.state.coord.w[0];
    w1s.at(w1s.zero_mode()) = Complex(0, 0);
    w1max = std::max(w1max, norm_weighted(w1s, 0, 0));
  }
  rep.degenerate_w1star = w1max <= ropts.degenerate_tol;
  return rep;
}

}  // namespace torus
