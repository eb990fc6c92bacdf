#ifndef TORUS_TEST_SUPPORT_HPP
#define TORUS_TEST_SUPPORT_HPP

#include <random>
#include <string>

#include "torus/canonical.hpp"
#include "torus/hamiltonian.hpp"

namespace torus::testing {

inline std::string data_path(const std::string& name) {
  return std::string(TORUS_TEST_DATA_DIR) + "/" + name;
}

// Random real trig polynomial: content up to `content` modes, geometric decay,
// overall amplitude `amp`, carried at cutoff K.
inline Field random_field(std::mt19937& rng, int dim, int K, int content,
                          double amp, double decay = 0.5) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Field f(dim, K);
  f.for_each_mode([&](const Mode& m, Complex& v) {
    if (!f.in_range(m)) return;
    bool inside = true;
    for (int i = 0; i < dim; ++i)
      if (std::abs(m[i]) > content) inside = false;
    if (!inside) return;
    v = Complex(uni(rng), uni(rng)) * amp * std::pow(decay, m.abs());
  });
  f.enforce_reality();
  // enforce_reality leaves a random imaginary part at the origin mode.
  f.at(f.zero_mode()) = Complex(f.at(f.zero_mode()).real(), 0.0);
  return f;
}

inline Field random_zero_mean(std::mt19937& rng, int dim, int K, int content,
                              double amp) {
  Field f = random_field(rng, dim, K, content, amp);
  f.at(f.zero_mode()) = Complex(0, 0);
  return f;
}

inline VField random_vfield(std::mt19937& rng, int rows, int dim, int K,
                            int content, double amp) {
  VField v(rows, dim, K);
  for (int i = 0; i < rows; ++i) v[i] = random_field(rng, dim, K, content, amp);
  return v;
}

// Random chart coordinates near the trivial chart phi0(alpha).
inline Coord random_coord(std::mt19937& rng, int dim, int K, double alpha,
                          double amp, int content = -1) {
  if (content < 0) content = K / 2;
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Coord c = Coord::trivial(dim, K, alpha);
  for (int i = 0; i < dim; ++i) {
    c.beta[i] = amp * uni(rng);
    c.u[i] = random_zero_mean(rng, dim, K, content, amp);
  }
  c.phi0 = random_zero_mean(rng, dim, K, content, amp);
  c.w[0] += random_field(rng, dim, K, content, amp);
  c.w[1] = random_field(rng, dim, K, content, amp);
  c.W11 += random_field(rng, dim, K, content, amp);
  c.W12 = random_zero_mean(rng, dim, K, content, amp);
  c.W21 = random_field(rng, dim, K, content, amp);
  return c;
}

// Deviation-only variant: random_coord minus the trivial baseline, for
// bumping an existing state.
inline Coord random_coord_deviation(std::mt19937& rng, int dim, int K,
                                    double amp, int content = -1) {
  return random_coord(rng, dim, K, 0.0, amp, content) -
         Coord::trivial(dim, K, 0.0);
}

inline Tangent random_tangent(std::mt19937& rng, int dim, int K, double amp,
                              int content = -1) {
  if (content < 0) content = K / 2;
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Tangent t = Tangent::zero(dim, K);
  for (int i = 0; i < dim; ++i) t.dbeta[i] = amp * uni(rng);
  t.psi0 = random_field(rng, dim, K, content, amp);
  t.chi = random_vfield(rng, dim, dim, K, content, amp);
  t.lambda = random_vfield(rng, 2, dim, K, content, amp);
  Field g11 = random_field(rng, dim, K, content, amp);
  t.Gamma(0, 0) = g11;
  t.Gamma(0, 1) = random_field(rng, dim, K, content, amp);
  t.Gamma(1, 0) = random_field(rng, dim, K, content, amp);
  t.Gamma(1, 1) = -1.0 * g11;
  return t;
}

inline Freq golden_freq() {
  Eigen::VectorXd om(1);
  om << 0.6180339887498949;
  return Freq(om, 0.5, 1.0);
}

// A diophantine pair for n = 3 tests: (1, golden mean) scaled.
inline Freq freq_2d() {
  Eigen::VectorXd om(2);
  om << 1.0, 0.6180339887498949;
  return Freq(om, 0.2, 1.5);
}

inline HamiltonianSpec model_problem(double eps = 1e-3) {
  const double omega = 0.6180339887498949;
  std::vector<HamTerm> h0;
  h0.push_back({omega, {1}, 0, {}, 0, false});
  h0.push_back({-0.5, {2}, 0, {}, 0, false});
  h0.push_back({0.5, {0}, 2, {}, 0, false});
  std::vector<HamTerm> h1;
  h1.push_back({1.0, {0}, 0, {1}, 1, false});
  Eigen::VectorXd om(1);
  om << omega;
  return HamiltonianSpec(2, h0, h1, eps, Freq(om, 0.5, 1.0));
}

// Variant with a y z2 cross term (t0 != 0) and a second resonance in H1 so the
// integrable shortcut of the pure single-phase model disappears.
inline HamiltonianSpec cross_problem(double eps = 1e-3, double t0 = 0.25) {
  const double omega = 0.6180339887498949;
  std::vector<HamTerm> h0;
  h0.push_back({omega, {1}, 0, {}, 0, false});
  h0.push_back({-0.5, {2}, 0, {}, 0, false});
  h0.push_back({0.5, {0}, 2, {}, 0, false});
  h0.push_back({t0, {1}, 1, {}, 0, false});
  std::vector<HamTerm> h1;
  h1.push_back({1.0, {0}, 0, {1}, 1, false});
  h1.push_back({0.7, {0}, 0, {1}, 0, false});
  h1.push_back({0.4, {0}, 0, {0}, 1, true});
  h1.push_back({0.3, {1}, 0, {1}, 2, false});
  h1.push_back({0.2, {0}, 1, {2}, 1, true});
  Eigen::VectorXd om(1);
  om << omega;
  return HamiltonianSpec(2, h0, h1, eps, Freq(om, 0.5, 1.0));
}

}  // namespace torus::testing

#endif
