#include <doctest.h>

#include <random>

#include "test_support.hpp"
#include "torus/residual.hpp"
#include "torus/solver.hpp"

using namespace torus;
using namespace torus::testing;

namespace {

State random_state(std::mt19937& rng, const Params& f, int K, double amp) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  State s = seed(f, model_problem(0.0), K);
  Coord bump = random_coord_deviation(rng, 1, K, amp, K / 4);
  s.coord = s.coord + bump;
  s.coord.w[0] -= Field::constant(1, K, bump.w[0].mean());
  s.e += amp * uni(rng);
  s.m += amp * uni(rng);
  s.M += amp * uni(rng);
  return s;
}

}  // namespace

TEST_CASE("phi vanishes on the epsilon = 0 seed") {
  std::mt19937 rng(101);
  std::uniform_real_distribution<double> ua(0, 2 * M_PI), uk(0, 1);
  HamiltonianSpec H = model_problem(0.0);
  HamiltonianSpec Hc = cross_problem(0.0);
  for (int t = 0; t < 6; ++t) {
    Params f{ua(rng), uk(rng)};
    State s = seed(f, H, 8);
    CHECK(phi(f, s, H).norm() < 1e-13);
    State sc = seed(f, Hc, 8);
    CHECK(phi(f, sc, Hc).norm() < 1e-13);
  }
}

TEST_CASE("phi at trivial state, first order in epsilon") {
  HamiltonianSpec H = model_problem(0.01);
  Params f{0.9, 0.0};
  State s = seed(f, H, 8);
  Residual r = phi(f, s, H);
  // Phi1 = eps cos(xi + alpha)
  Mode s1{{1}, 1};
  Field expect = Field::harmonic_cos(1, 8, s1, 0.01 * std::cos(0.9)) +
                 Field::harmonic_sin(1, 8, s1, -0.01 * std::sin(0.9));
  CHECK(norm_weighted(r.F1 - expect, 0, 0) < 1e-13);
  CHECK(r.norm() <= 0.011);
  CHECK(r.norm() >= 0.009);
}

TEST_CASE("phi is affine in e, m with the stated slopes") {
  std::mt19937 rng(103);
  HamiltonianSpec H = cross_problem(1e-3);
  Params f{0.4, 0.2};
  State s = random_state(rng, f, 8, 1e-3);

  Residual base = phi(f, s, H);
  State s2 = s;
  s2.e += 0.37;
  Residual re = phi(f, s2, H);
  CHECK(norm_weighted(re.F1 - base.F1 + Field::constant(1, 8, 0.37), 0, 0) <
        1e-13);
  CHECK((re.F2 - base.F2).norm_weighted(0, 0) < 1e-13);
  CHECK((re.F4 - base.F4).norm_weighted(0, 0) < 1e-13);

  State s3 = s;
  double dm = 0.21;
  s3.m += dm;
  Residual rm = phi(f, s3, H);
  Coeffs th = theta(s.coord);
  CHECK(norm_weighted(rm.F1 - base.F1 - dm * th.w[0], 0, 0) < 1e-12);
  VField Wte1(2, 1, 8);
  Wte1[0] = th.W(0, 0);
  Wte1[1] = th.W(0, 1);
  CHECK((rm.F2 - base.F2 - dm * Wte1).norm_weighted(0, 0) < 1e-12);
}

TEST_CASE("F4 is symmetric") {
  std::mt19937 rng(107);
  HamiltonianSpec H = cross_problem(1e-2);
  for (int t = 0; t < 5; ++t) {
    Params f{1.1, 0.6};
    State s = random_state(rng, f, 8, 1e-3);
    Residual r = phi(f, s, H);
    CHECK((r.F4 - r.F4.transposed()).norm_weighted(0, 0) < 1e-13);
  }
}

TEST_CASE("lin_coeffs at the trivial state") {
  HamiltonianSpec H = model_problem(0.0);
  Params f{0.3, 0.1};
  State s = seed(f, H, 8);
  LinCoeffs lc = lin_coeffs(f, s, H);
  CHECK(norm_weighted(lc.S(0, 0) + Field::constant(1, 8, 1.0), 0, 0) < 1e-12);
  CHECK(lc.T.norm_weighted(0, 0) < 1e-12);
  for (const auto& E : lc.E) CHECK(E.norm_weighted(0, 0) < 1e-12);
  for (const auto& Kf : lc.Kf) CHECK(Kf.norm_weighted(0, 0) < 1e-12);

  HamiltonianSpec Hc = cross_problem(0.0, 0.25);
  State sc = seed(f, Hc, 8);
  LinCoeffs lcc = lin_coeffs(f, sc, Hc);
  CHECK(norm_weighted(lcc.T(1, 0) - Field::constant(1, 8, 0.25), 0, 0) < 1e-12);
  CHECK(norm_weighted(lcc.T(0, 0), 0, 0) < 1e-12);
  CHECK((lcc.S - lcc.S.transposed()).norm_weighted(0, 0) < 1e-13);
}

TEST_CASE("dphi matches finite differences of phi") {
  std::mt19937 rng(109);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  HamiltonianSpec H = cross_problem(1e-2);
  const int K = 8;
  const double h = 1e-5;
  for (int t = 0; t < 12; ++t) {
    Params f{0.8, 0.35};
    State s = random_state(rng, f, K, 2e-3);
    Coeffs th = theta(s.coord);
    Tangent tan = random_tangent(rng, 1, K, 1.0, K / 4);
    double de = uni(rng), dm = uni(rng), dM = uni(rng);

    Residual an = dphi(f, s, tan, de, dm, dM, H);

    DeltaCoord dc = xi(s.coord, th, tan);
    State sp = apply(s, StateDelta{h * dc, h * de, h * dm, h * dM});
    State sm = apply(s, StateDelta{-h * dc, -h * de, -h * dm, -h * dM});
    Residual rp = phi(f, sp, H);
    Residual rm = phi(f, sm, H);

    auto rel = [](double d, double sc) { return d / std::max(1.0, sc); };
    double e1 = rel(norm_weighted(0.5 / h * (rp.F1 - rm.F1) - an.F1, 0, 0),
                    norm_weighted(an.F1, 0, 0));
    double e2 = rel((0.5 / h * (rp.F2 - rm.F2) - an.F2).norm_weighted(0, 0),
                    an.F2.norm_weighted(0, 0));
    double e3 = rel((0.5 / h * (rp.F3 - rm.F3) - an.F3).norm_weighted(0, 0),
                    an.F3.norm_weighted(0, 0));
    double e4 = rel((0.5 / h * (rp.F4 - rm.F4) - an.F4).norm_weighted(0, 0),
                    an.F4.norm_weighted(0, 0));
    double e5 = rel(std::abs((rp.f5 - rm.f5) / (2 * h) - an.f5), std::abs(an.f5));
    CHECK(e1 < 1e-4);
    CHECK(e2 < 1e-4);
    CHECK(e3 < 1e-4);
    CHECK(e4 < 1e-4);
    CHECK(e5 < 1e-4);
    CHECK(std::abs((rp.o1 - rm.o1) / (2 * h) - an.o1) < 1e-6);
    CHECK(std::abs((rp.o4 - rm.o4) / (2 * h) - an.o4) < 1e-6);
  }

  // de slope: DPhi1 = -de exactly when the tangent vanishes.
  Params f{0.8, 0.35};
  State s = random_state(rng, f, K, 1e-3);
  Tangent z = Tangent::zero(1, K);
  Residual d = dphi(f, s, z, 1.0, 0.0, 0.0, H);
  CHECK(norm_weighted(d.F1 + Field::constant(1, K, 1.0), 0, 0) < 1e-12);
  CHECK(d.F2.norm_weighted(0, 0) < 1e-12);
  CHECK(d.F3.norm_weighted(0, 0) < 1e-12);
  CHECK(d.F4.norm_weighted(0, 0) < 1e-12);
}

TEST_CASE("Pi remainders vanish at exact solutions") {
  HamiltonianSpec H = model_problem(0.0);
  Params f{0.5, 0.4};
  State s = seed(f, H, 8);
  std::mt19937 rng(113);
  Tangent tan = random_tangent(rng, 1, 8, 1.0, 2);

  Residual d = dphi(f, s, tan, 0.0, 0.0, 0.0, H);
  LinCoeffs lc = lin_coeffs(f, s, H);
  const Freq& fr = H.freq();
  VField mu = grad_scalar(tan.psi0);
  mu[0] += Field::constant(1, 8, tan.dbeta[0]);

  Field want1 = dpartial(tan.psi0, fr) +
                Field::constant(1, 8, fr.omega().dot(tan.dbeta));
  CHECK(norm_weighted(d.F1 - want1, 0, 0) < 1e-12);

  MField J(2, 2, 1, 8), Om(2, 2, 1, 8);
  J(0, 1) = Field::constant(1, 8, 1);
  J(1, 0) = Field::constant(1, 8, -1);
  Om(0, 0) = Field::constant(1, 8, -f.k);
  Om(1, 1) = Field::constant(1, 8, 1);
  VField want2 = mat_vec(J, dpartial(tan.lambda, fr)) +
                 mat_vec(Om, tan.lambda) + mat_vec(lc.T, mu);
  CHECK((d.F2 - want2).norm_weighted(0, 0) < 1e-12);

  VField want3 = -1.0 * dpartial(tan.chi, fr) + mat_vec(lc.S, mu) +
                 mat_vec(lc.T.transposed(), tan.lambda);
  CHECK((d.F3 - want3).norm_weighted(0, 0) < 1e-12);
}

TEST_CASE("flow identities hold at converged solutions") {
  HamiltonianSpec H = model_problem(1e-3);
  Params f{0.7, 0.3};
  SolveOptions opts;
  opts.cutoff = 16;
  opts.tol_residual = 1e-12;
  ModifiedSolution sol = solve_modified(f, H, opts);
  CHECK(flow_identity_defect(f, sol.state, H) < 1e-10);
}
