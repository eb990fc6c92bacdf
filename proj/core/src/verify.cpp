#include "torus/verify.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <random>

namespace torus {

namespace {

// Newton refinement of argmin_xi |P - Emb(xi)|^2 from a starting angle.
// The embedding is analytic, so a couple of steps from the conjugacy
// prediction suffice.
struct TorusGeometry {
  const Coeffs& th;
  int dim;

  Eigen::VectorXd embed(const Eigen::VectorXd& xi) const {
    Eigen::VectorXd x = th.u.evaluate_at(xi);
    for (int i = 0; i < dim; ++i) x[i] += xi[i];
    Eigen::VectorXd y = th.v.evaluate_at(xi);
    Eigen::VectorXd w = th.w.evaluate_at(xi);
    Eigen::VectorXd P(2 * dim + 2);
    P << x, y, w;
    return P;
  }

  Eigen::MatrixXd embed_jacobian(const Eigen::VectorXd& xi) const {
    Eigen::MatrixXd Jm(2 * dim + 2, dim);
    for (int j = 0; j < dim; ++j) {
      for (int i = 0; i < dim; ++i) {
        Jm(i, j) = deriv(th.u[i], j).evaluate_at(xi) + (i == j ? 1.0 : 0.0);
        Jm(dim + i, j) = deriv(th.v[i], j).evaluate_at(xi);
      }
      for (int p = 0; p < 2; ++p)
        Jm(2 * dim + p, j) = deriv(th.w[p], j).evaluate_at(xi);
    }
    return Jm;
  }

  // Returns (distance, refined xi).
  std::pair<double, Eigen::VectorXd> distance(const Eigen::VectorXd& P,
                                              Eigen::VectorXd xi) const {
    for (int it = 0; it < 30; ++it) {
      Eigen::VectorXd r = embed(xi) - P;
      Eigen::MatrixXd Jm = embed_jacobian(xi);
      Eigen::VectorXd g = Jm.transpose() * r;  // gradient of |r|^2 / 2
      Eigen::MatrixXd Hm = Jm.transpose() * Jm;
      Eigen::VectorXd step = Hm.ldlt().solve(g);
      xi -= step;
      if (step.cwiseAbs().maxCoeff() < 1e-14) break;
    }
    return {(embed(xi) - P).norm(), xi};
  }
};

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a > M_PI) a -= 2.0 * M_PI;
  if (a < -M_PI) a += 2.0 * M_PI;
  return a;
}

}  // namespace

VerifyReport verify(const ModifiedSolution& sol, const HamiltonianSpec& H,
                    const VerifyOptions& opt, const ResidualOptions& ropt) {
  VerifyReport rep;
  rep.horizon = opt.horizon;
  rep.samples = opt.samples;

  const int d = H.dim();
  ChartOptions copt{ropt.grid, ropt.det_floor};
  Coeffs th = theta(sol.state.coord, copt);
  TorusGeometry geo{th, d};

  rep.against_modified = std::abs(sol.state.m) > opt.mod_threshold ||
                         std::abs(sol.state.M) > opt.mod_threshold;
  HamiltonianSpec Hflow =
      rep.against_modified ? modify(H, sol.state.m, sol.state.M) : H;

  OdeRhs rhs = [&](double, const Eigen::VectorXd& s, Eigen::VectorXd& ds) {
    Eigen::VectorXd x = s.segment(0, d), y = s.segment(d, d);
    Eigen::Vector2d z(s[2 * d], s[2 * d + 1]);
    Eigen::VectorXd gx, gy;
    Eigen::Vector2d gz;
    Hflow.gradients(x, y, z, gx, gy, gz);
    ds.resize(2 * d + 2);
    ds.segment(0, d) = gy;
    ds.segment(d, d) = -gx;
    ds[2 * d] = gz[1];       // J grad_z H, J = [[0,1],[-1,0]]
    ds[2 * d + 1] = -gz[0];
  };

  std::mt19937 rng(opt.seed);
  std::uniform_real_distribution<double> uni(0.0, 2.0 * M_PI);
  const Eigen::VectorXd& omega = H.freq().omega();

  for (int s = 0; s < opt.samples; ++s) {
    Eigen::VectorXd xi0(d);
    for (int i = 0; i < d; ++i) xi0[i] = uni(rng);
    Eigen::VectorXd y = geo.embed(xi0);
    double e0 = Hflow.value(y.segment(0, d), y.segment(d, d),
                            Eigen::Vector2d(y[2 * d], y[2 * d + 1]));

    double next_out = 0;
    const double dt_out = opt.horizon / opt.outputs;
    auto observe = [&](double t, const Eigen::VectorXd& state) {
      if (t + 1e-14 < next_out && t != 0) return;
      next_out += dt_out;
      Eigen::VectorXd pred(d);
      for (int i = 0; i < d; ++i) pred[i] = xi0[i] + omega[i] * t;
      auto [dist, xi_star] = geo.distance(state, pred);
      rep.max_invariance_defect = std::max(rep.max_invariance_defect, dist);
      double drift = 0;
      for (int i = 0; i < d; ++i)
        drift = std::max(drift, std::abs(wrap_angle(xi_star[i] - pred[i])));
      rep.conjugacy_defect = std::max(rep.conjugacy_defect, drift);
      double e = Hflow.value(state.segment(0, d), state.segment(d, d),
                             Eigen::Vector2d(state[2 * d], state[2 * d + 1]));
      rep.energy_drift = std::max(rep.energy_drift, std::abs(e - e0));
    };
    integrate_adaptive(rhs, y, 0.0, opt.horizon, opt.ode, observe);
  }
  return rep;
}

}  // namespace torus
