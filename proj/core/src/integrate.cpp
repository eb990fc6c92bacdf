#include "torus/integrate.hpp"

#include <cmath>

#include "torus/errors.hpp"

namespace torus {

namespace {

// Fehlberg 7(8) coefficients (NASA TR R-287, table X).
constexpr int kStages = 13;

const double A[kStages] = {0,         2.0 / 27,  1.0 / 9,  1.0 / 6,  5.0 / 12,
                           1.0 / 2,   5.0 / 6,   1.0 / 6,  2.0 / 3,  1.0 / 3,
                           1.0,       0.0,       1.0};

const double B[kStages][kStages - 1] = {
    {},
    {2.0 / 27},
    {1.0 / 36, 1.0 / 12},
    {1.0 / 24, 0, 1.0 / 8},
    {5.0 / 12, 0, -25.0 / 16, 25.0 / 16},
    {1.0 / 20, 0, 0, 1.0 / 4, 1.0 / 5},
    {-25.0 / 108, 0, 0, 125.0 / 108, -65.0 / 27, 125.0 / 54},
    {31.0 / 300, 0, 0, 0, 61.0 / 225, -2.0 / 9, 13.0 / 900},
    {2.0, 0, 0, -53.0 / 6, 704.0 / 45, -107.0 / 9, 67.0 / 90, 3.0},
    {-91.0 / 108, 0, 0, 23.0 / 108, -976.0 / 135, 311.0 / 54, -19.0 / 60,
     17.0 / 6, -1.0 / 12},
    {2383.0 / 4100, 0, 0, -341.0 / 164, 4496.0 / 1025, -301.0 / 82,
     2133.0 / 4100, 45.0 / 82, 45.0 / 164, 18.0 / 41},
    {3.0 / 205, 0, 0, 0, 0, -6.0 / 41, -3.0 / 205, -3.0 / 41, 3.0 / 41,
     6.0 / 41, 0},
    {-1777.0 / 4100, 0, 0, -341.0 / 164, 4496.0 / 1025, -289.0 / 82,
     2193.0 / 4100, 51.0 / 82, 33.0 / 164, 12.0 / 41, 0, 1.0}};

// 8th order weights (stages 5..11 plus the two FSAL-style tail stages).
const double C8[kStages] = {0,         0, 0, 0, 0, 34.0 / 105, 9.0 / 35,
                            9.0 / 35,  9.0 / 280, 9.0 / 280, 0, 41.0 / 840,
                            41.0 / 840};
// 7th order weights for the error estimate.
const double C7[kStages] = {41.0 / 840, 0, 0, 0, 0, 34.0 / 105, 9.0 / 35,
                            9.0 / 35,   9.0 / 280, 9.0 / 280, 41.0 / 840, 0, 0};

}  // namespace

void integrate_adaptive(
    const OdeRhs& rhs, Eigen::VectorXd& y, double t0, double t1,
    const OdeOptions& opt,
    const std::function<void(double, const Eigen::VectorXd&)>& observer) {
  const int n = int(y.size());
  double t = t0;
  double h = std::min(opt.h_init, t1 - t0);
  std::vector<Eigen::VectorXd> k(kStages, Eigen::VectorXd(n));
  Eigen::VectorXd ytmp(n), y8(n), err(n);

  if (observer) observer(t, y);
  long steps = 0;
  while (t < t1) {
    if (++steps > opt.max_steps)
      throw IntegratorFailure("integrate_adaptive: step budget exhausted");
    h = std::min(h, t1 - t);
    for (int s = 0; s < kStages; ++s) {
      ytmp = y;
      for (int j = 0; j < s; ++j)
        if (B[s][j] != 0) ytmp += h * B[s][j] * k[j];
      rhs(t + A[s] * h, ytmp, k[s]);
    }
    y8 = y;
    err.setZero();
    for (int s = 0; s < kStages; ++s) {
      if (C8[s] != 0) y8 += h * C8[s] * k[s];
      double dc = C8[s] - C7[s];
      if (dc != 0) err += h * dc * k[s];
    }
    double scale = opt.abs_tol + opt.rel_tol * std::max(y.cwiseAbs().maxCoeff(),
                                                        y8.cwiseAbs().maxCoeff());
    double e = err.cwiseAbs().maxCoeff() / scale;
    if (e <= 1.0) {
      t += h;
      y = y8;
      if (observer) observer(t, y);
    }
    double fac = e > 0 ? 0.9 * std::pow(e, -1.0 / 8.0) : 5.0;
    fac = std::clamp(fac, 0.2, 5.0);
    h *= fac;
    if (h < opt.h_min)
      throw IntegratorFailure("integrate_adaptive: step size underflow");
    h = std::min(h, opt.h_max);
  }
}

}  // namespace torus
