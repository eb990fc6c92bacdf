#include <doctest.h>

#include <random>

#include "test_support.hpp"
#include "torus/canonical.hpp"

using namespace torus;
using namespace torus::testing;

TEST_CASE("theta at the trivial chart") {
  for (int dim : {1, 2}) {
    Coord c = Coord::trivial(dim, 8, 0.7);
    Coeffs th = theta(c);
    CHECK((th.V.mean() - Eigen::MatrixXd::Identity(dim, dim)).norm() < 1e-14);
    CHECK(th.V.norm_weighted(0, 0) == doctest::Approx(1.0));
    CHECK(th.v.norm_weighted(0, 0) < 1e-14);
    CHECK(th.w[0].mean() == doctest::Approx(0.7));
    CHECK((th.W.mean() - Eigen::Matrix2d::Identity()).norm() < 1e-14);
    CHECK(th.Lambda.norm_weighted(0, 0) < 1e-14);
    for (int i = 0; i < dim; ++i)
      CHECK(th.R[size_t(i)].norm_weighted(0, 0) < 1e-14);
  }
}

TEST_CASE("theta spectral inverse example") {
  // u = 0.1 sin(xi): V = 1/(1 + 0.1 cos xi), check V (1+u') = 1.
  Coord c = Coord::trivial(1, 16, 0.0);
  Mode s1{{1}, 1};
  c.u[0] = Field::harmonic_sin(1, 16, s1, 0.1);
  Coeffs th = theta(c);
  Field one = field_mul(th.V(0, 0),
                        Field::constant(1, 16, 1.0) + deriv(c.u[0], 0));
  CHECK(norm_weighted(one - Field::constant(1, 16, 1.0), 0, 0) < 1e-12);
}

TEST_CASE("det W = 1 after construction") {
  std::mt19937 rng(61);
  for (int t = 0; t < 10; ++t) {
    Coord c = random_coord(rng, 1, 12, 0.5, 1e-3, 4);
    Coeffs th = theta(c);
    Field det = field_mul(th.W(0, 0), th.W(1, 1)) -
                field_mul(th.W(0, 1), th.W(1, 0));
    CHECK(norm_weighted(det - Field::constant(1, 12, 1.0), 0, 0) < 1e-11);
  }
}

TEST_CASE("check_symplectic on constructed charts") {
  std::mt19937 rng(67);
  for (int dim : {1, 2}) {
    for (int t = 0; t < 5; ++t) {
      Coord c = random_coord(rng, dim, 8, 0.3, 1e-3, 4);
      Coeffs th = theta(c);
      SymplecticDefects def = check_symplectic(c, th);
      CHECK(def.max() < 1e-10);
    }
  }
  // identity chart: exactly zero
  Coord c = Coord::trivial(1, 8, 0.0);
  CHECK(check_symplectic(c, theta(c)).max() < 1e-14);
}

TEST_CASE("perturbed W22 shows up as symplectic defect") {
  Coord c = Coord::trivial(1, 8, 0.2);
  Coeffs th = theta(c);
  th.W(1, 1) += Field::constant(1, 8, 0.01);
  SymplecticDefects def = check_symplectic(c, th);
  CHECK(def.w_symplectic == doctest::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("xi at the trivial chart is the identity block map") {
  std::mt19937 rng(71);
  int dim = 1, K = 8;
  Coord c = Coord::trivial(dim, K, 0.4);
  Coeffs th = theta(c);

  Tangent t = Tangent::zero(dim, K);
  t.psi0 = random_field(rng, dim, K, 4, 0.3);
  DeltaCoord d = xi(c, th, t);
  CHECK(norm_weighted(d.phi0 - t.psi0, 0, 0) < 1e-14);
  CHECK(d.u.norm_weighted(0, 0) < 1e-14);
  CHECK(d.w.norm_weighted(0, 0) < 1e-14);

  Tangent t2 = Tangent::zero(dim, K);
  t2.lambda = random_vfield(rng, 2, dim, K, 4, 0.3);
  DeltaCoord d2 = xi(c, th, t2);
  CHECK((d2.w - t2.lambda).norm_weighted(0, 0) < 1e-14);
}

TEST_CASE("xi / xi_inv round trips") {
  std::mt19937 rng(73);
  for (int dim : {1, 2}) {
    const int K = 8;
    for (int t = 0; t < (dim == 1 ? 10 : 4); ++t) {
      Coord c = random_coord(rng, dim, K, 0.8, 1e-4, K / 2);
      Coeffs th = theta(c);
      Tangent tan = random_tangent(rng, dim, K, 1.0, K / 2);

      DeltaCoord d = xi(c, th, tan);
      Tangent back = xi_inv(c, th, d);
      CHECK((back.dbeta - tan.dbeta).cwiseAbs().maxCoeff() < 1e-11);
      CHECK(norm_weighted(back.psi0 - tan.psi0, 0, 0) < 1e-11);
      CHECK((back.chi - tan.chi).norm_weighted(0, 0) < 1e-11);
      CHECK((back.lambda - tan.lambda).norm_weighted(0, 0) < 1e-11);
      CHECK((back.Gamma - tan.Gamma).norm_weighted(0, 0) < 1e-11);

      DeltaCoord d2 = xi(c, th, back);
      CHECK(norm_weighted(d2.phi0 - d.phi0, 0, 0) < 1e-11);
      CHECK((d2.u - d.u).norm_weighted(0, 0) < 1e-11);
      CHECK((d2.w - d.w).norm_weighted(0, 0) < 1e-11);
      CHECK(norm_weighted(d2.W12 - d.W12, 0, 0) < 1e-11);
    }
  }
}

TEST_CASE("xi_inv applies the mean projection") {
  std::mt19937 rng(79);
  Coord c = random_coord(rng, 1, 8, 0.3, 1e-4, 4);
  Coeffs th = theta(c);
  Tangent tan = random_tangent(rng, 1, 8, 1.0, 4);
  DeltaCoord d = xi(c, th, tan);
  Tangent back = xi_inv(c, th, d);
  // grad psi0 = mu - dbeta has no zero mode by construction; check the
  // reconstructed psi0 is consistent with it.
  VField mu = grad_scalar(back.psi0);
  (void)mu;
  CHECK(std::abs(back.Gamma(0, 0).mean() + back.Gamma(1, 1).mean()) < 1e-12);
}

TEST_CASE("finite-difference tangency of theta") {
  std::mt19937 rng(83);
  const double h = 1e-5;
  for (int dim : {1, 2}) {
    const int K = 8;
    for (int t = 0; t < (dim == 1 ? 6 : 3); ++t) {
      Coord c = random_coord(rng, dim, K, 0.5, 5e-3, K / 2);
      Coeffs th = theta(c);
      Tangent tan = random_tangent(rng, dim, K, 1.0, K / 2);
      DeltaCoord d = xi(c, th, tan);

      CoeffsDelta an = dtheta(c, th, d);
      Coord cp = c + (h * d);
      Coord cm = c - (h * d);
      Coeffs thp = theta(cp);
      Coeffs thm = theta(cm);

      auto rel = [](double delta, double scale) {
        return delta / std::max(1.0, scale);
      };
      double e1 = rel((0.5 / h * (thp.v - thm.v) - an.dv).norm_weighted(0, 0),
                      an.dv.norm_weighted(0, 0));
      double e2 = rel((0.5 / h * (thp.V - thm.V) - an.dV).norm_weighted(0, 0),
                      an.dV.norm_weighted(0, 0));
      double e3 =
          rel((0.5 / h * (thp.Lambda - thm.Lambda) - an.dLambda).norm_weighted(0, 0),
              an.dLambda.norm_weighted(0, 0));
      double e4 = rel((0.5 / h * (thp.W - thm.W) - an.dW).norm_weighted(0, 0),
                      an.dW.norm_weighted(0, 0));
      CHECK(e1 < 1e-4);
      CHECK(e2 < 1e-4);
      CHECK(e3 < 1e-4);
      CHECK(e4 < 1e-4);
      for (int i = 0; i < dim; ++i) {
        double e5 = rel((0.5 / h * (thp.R[size_t(i)] - thm.R[size_t(i)]) -
                         an.dR[size_t(i)])
                            .norm_weighted(0, 0),
                        an.dR[size_t(i)].norm_weighted(0, 0));
        CHECK(e5 < 1e-4);
      }
    }
  }
}

TEST_CASE("theta throws on singular charts") {
  Coord c = Coord::trivial(1, 8, 0.0);
  Mode s1{{1}, 1};
  c.W11 = Field::harmonic_cos(1, 8, s1);  // vanishes on the grid
  CHECK_THROWS_AS(theta(c), ChartSingular);

  Coord c2 = Coord::trivial(1, 8, 0.0);
  c2.u[0] = Field::harmonic_sin(1, 8, s1, 1.5);  // 1 + u' vanishes
  CHECK_THROWS_AS(theta(c2), ChartSingular);
}
