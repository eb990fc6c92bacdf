#ifndef TORUS_INTEGRATE_HPP
#define TORUS_INTEGRATE_HPP

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace torus {

// Adaptive embedded Runge-Kutta-Fehlberg 7(8): 13 stages, rational tableau.
struct OdeOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double h_init = 1e-3;
  double h_min = 1e-12;
  double h_max = 1.0;
  long max_steps = 50'000'000;
};

using OdeRhs = std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;

// Integrates y' = f(t, y) from t0 to t1, invoking `observer` at every accepted
// step (including the endpoints).
void integrate_adaptive(
    const OdeRhs& rhs, Eigen::VectorXd& y, double t0, double t1,
    const OdeOptions& opt,
    const std::function<void(double, const Eigen::VectorXd&)>& observer = {});

}  // namespace torus

#endif
