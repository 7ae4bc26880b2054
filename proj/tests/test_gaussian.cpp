#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "acmech/gaussian.hpp"
#include "acmech/model.hpp"

using namespace acmech;
using gauss::QuadraticModel;
using gauss::LindbladChannel;

namespace {

// damped oscillator: analytic steady state is (n+1/2) I per quadrature pair
QuadraticModel single_mode(double omega) {
  Eigen::MatrixXd W = omega * Eigen::MatrixXd::Identity(2, 2);
  return QuadraticModel(W);
}

std::vector<LindbladChannel> thermal_channel(double gamma, double nbar) {
  return {LindbladChannel{0, gamma * (nbar + 1.0), gamma * nbar}};
}

// reference RWA system at the default operating point (stiff: rates span 9 decades)
gauss::DriftDiffusion fig4_drift_diffusion() {
  auto magnet = yig_sphere(100e-9);
  BathParams baths;
  baths.omega_x = 2 * M_PI * 200e3;
  baths.Q_x = 1e5;
  baths.gamma_m = 2 * M_PI * 1e6;
  baths.Q_p = 1e6;
  baths.T_x = baths.T_m = baths.T_p = 300.0;
  auto drive = tune_fields(magnet, 0.01, baths.omega_x, 2000.0);
  auto rm = build_rwa_model(magnet, drive, baths);
  return gauss::build_drift_diffusion(rm.model, rm.channels);
}

Eigen::MatrixXd random_positive_definite(int n, std::mt19937& rng, double scale) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = nd(rng);
  return scale * (B * B.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n));
}

}  // namespace

TEST_CASE("drift and diffusion of a single thermal mode") {
  auto model = single_mode(3.0);
  auto dd = gauss::build_drift_diffusion(model, thermal_channel(0.2, 1.5));
  Eigen::MatrixXd A_ref(2, 2);
  A_ref << -0.1, 3.0, -3.0, -0.1;
  CHECK((dd.A - A_ref).norm() == doctest::Approx(0.0).epsilon(1e-14));
  // (down + up)/2 = gamma (n + 1/2) on each quadrature
  CHECK(dd.D(0, 0) == doctest::Approx(0.2 * 2.0));
  CHECK(dd.D(1, 1) == doctest::Approx(0.2 * 2.0));
  CHECK(dd.D(0, 1) == 0.0);
}

TEST_CASE("steady state of a single mode is the thermal state") {
  auto model = single_mode(2 * M_PI);
  auto state = gauss::lyapunov_steady_state(model, thermal_channel(0.05, 4.2));
  auto occ = gauss::mode_occupations(state);
  CHECK(occ[0] == doctest::Approx(4.2).epsilon(1e-12));
  CHECK(state.sigma(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("lyapunov residual stays within 1e-10 of the diffusion norm") {
  SUBCASE("reference cooling model, rates spanning nine decades") {
    auto dd = fig4_drift_diffusion();
    Eigen::MatrixXd S = gauss::lyapunov_steady_state(dd.A, dd.D);
    double resid = (dd.A * S + S * dd.A.transpose() + dd.D).norm();
    CHECK(resid <= 1e-10 * dd.D.norm());
    CHECK(S(0, 0) > 0.0);
  }
  SUBCASE("random stable models") {
    std::mt19937 rng(1234);
    for (int trial = 0; trial < 20; ++trial) {
      int n_modes = 1 + trial % 3;
      auto W = random_positive_definite(2 * n_modes, rng, 1.0);
      QuadraticModel model(W);
      std::vector<LindbladChannel> ch;
      std::uniform_real_distribution<double> ud(0.0, 1.0);
      for (int k = 0; k < n_modes; ++k) {
        double gamma = 0.01 + ud(rng);
        double nbar = 5.0 * ud(rng);
        ch.push_back({k, gamma * (nbar + 1), gamma * nbar});
      }
      auto dd = gauss::build_drift_diffusion(model, ch);
      Eigen::MatrixXd S = gauss::lyapunov_steady_state(dd.A, dd.D);
      CHECK((dd.A * S + S * dd.A.transpose() + dd.D).norm() <= 1e-10 * dd.D.norm());
      // steady state of a physical model must itself be physical
      CHECK(gauss::physicality_deficit(S) >= -1e-9 * S.norm());
    }
  }
}

TEST_CASE("unstable drift is rejected") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd D = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(gauss::lyapunov_steady_state(A, D), gauss::NotHurwitz);

  // inverted harmonic potential: W not positive definite
  Eigen::MatrixXd W(2, 2);
  W << -1.0, 0.0, 0.0, 1.0;
  QuadraticModel model(W);
  CHECK_THROWS_AS(gauss::lyapunov_steady_state(model, thermal_channel(0.1, 0.0)),
                  gauss::NotHurwitz);
}

TEST_CASE("hurwitz margin of a damped oscillator is half the linewidth") {
  auto dd = gauss::build_drift_diffusion(single_mode(5.0), thermal_channel(0.3, 0.0));
  CHECK(gauss::hurwitz_margin(dd.A) == doctest::Approx(0.15).epsilon(1e-9));
}

TEST_CASE("thermal state helper and physicality") {
  auto st = gauss::thermal_state({0.0, 2.0});
  CHECK(st.sigma(0, 0) == doctest::Approx(0.5));
  CHECK(st.sigma(2, 2) == doctest::Approx(2.5));
  CHECK(gauss::physicality_deficit(st.sigma) >= -1e-12);

  // covariance below vacuum violates the uncertainty bound
  Eigen::MatrixXd bad = 0.1 * Eigen::MatrixXd::Identity(2, 2);
  CHECK(gauss::physicality_deficit(bad) < -0.1);
  CHECK_THROWS(gauss::CovarianceState(Eigen::VectorXd::Zero(2), bad));
}

TEST_CASE("free evolution preserves occupation and uncertainty product") {
  auto model = single_mode(7.0);
  std::vector<LindbladChannel> no_damping;
  Eigen::MatrixXd sig0(2, 2);
  sig0 << 1.7, 0.4, 0.4, 0.9;  // squeezed-ish but physical
  CHECK(gauss::physicality_deficit(sig0) > 0.0);
  gauss::CovarianceState init(Eigen::VectorXd::Zero(2), sig0);
  auto states = gauss::evolve_covariance(model, no_damping, init, {0.0, 0.3, 1.1, 4.7});
  for (const auto& st : states) {
    CHECK(st.sigma.determinant() == doctest::Approx(sig0.determinant()).epsilon(1e-8));
    CHECK((st.sigma(0, 0) + st.sigma(1, 1)) ==
          doctest::Approx(sig0(0, 0) + sig0(1, 1)).epsilon(1e-8));
  }
}

TEST_CASE("long-time evolution agrees with the direct steady-state solve") {
  std::mt19937 rng(99);
  auto W = random_positive_definite(4, rng, 2.0);
  QuadraticModel model(W);
  std::vector<LindbladChannel> ch = {{0, 0.8, 0.3}, {1, 0.6, 0.1}};
  auto dd = gauss::build_drift_diffusion(model, ch);
  Eigen::MatrixXd S = gauss::lyapunov_steady_state(dd.A, dd.D);
  double margin = gauss::hurwitz_margin(dd.A);
  auto init = gauss::thermal_state({6.0, 0.0});
  auto states = gauss::evolve_covariance(model, ch, init, {0.0, 20.0 / margin});
  CHECK((states.back().sigma - S).norm() <= 1e-6 * S.norm());
}

TEST_CASE("driven model with zero drive amplitude matches the static path") {
  auto model_static = single_mode(3.0);
  Eigen::MatrixXd W1 = Eigen::MatrixXd::Zero(2, 2);
  QuadraticModel model_driven(model_static.W_at(0.0), W1, 10.0);
  auto ch = thermal_channel(0.4, 1.0);
  auto init = gauss::thermal_state({5.0});
  auto a = gauss::evolve_covariance(model_static, ch, init, {0.0, 2.5});
  auto b = gauss::evolve_covariance(model_driven, ch, init, {0.0, 2.5});
  CHECK((a.back().sigma - b.back().sigma).norm() <= 1e-7 * a.back().sigma.norm());
}

TEST_CASE("driven evolution converges to the same cycle from different step tolerances") {
  // parametric modulation of a damped mode; compare tight vs loose tolerance
  Eigen::MatrixXd W0 = 4.0 * Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd W1 = Eigen::MatrixXd::Zero(2, 2);
  W1(0, 0) = 0.8;
  QuadraticModel model(W0, W1, 40.0);
  auto ch = thermal_channel(0.5, 2.0);
  auto init = gauss::thermal_state({2.0});
  gauss::EvolveOptions tight;
  tight.rel_tol = 1e-10;
  gauss::EvolveOptions loose;
  loose.rel_tol = 1e-6;
  auto a = gauss::evolve_covariance(model, ch, init, {0.0, 12.0}, tight);
  auto b = gauss::evolve_covariance(model, ch, init, {0.0, 12.0}, loose);
  CHECK((a.back().sigma - b.back().sigma).norm() <= 1e-4 * a.back().sigma.norm());
}

TEST_CASE("stiffness guard reports instead of spinning") {
  Eigen::MatrixXd W0 = 1.0 * Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd W1 = Eigen::MatrixXd::Zero(2, 2);
  W1(0, 0) = 0.5;
  QuadraticModel model(W0, W1, 1e9);  // drive period forces tiny steps
  auto ch = thermal_channel(0.1, 0.0);
  auto init = gauss::thermal_state({1.0});
  gauss::EvolveOptions opts;
  opts.max_steps = 100;
  CHECK_THROWS_AS(
      gauss::evolve_covariance(model, ch, init, {0.0, 1000.0}, opts), gauss::StiffnessError);
}

TEST_CASE("single-mode spectrum carries thermal sideband asymmetry") {
  const double omega0 = 1000.0, gamma = 1.0, nbar = 2.0;
  auto model = single_mode(omega0);
  auto ch = thermal_channel(gamma, nbar);
  auto dd = gauss::build_drift_diffusion(model, ch);
  Eigen::MatrixXd S = gauss::lyapunov_steady_state(dd.A, dd.D);
  Eigen::VectorXd v(2);
  v << 1.0, 0.0;
  gauss::SpectrumEvaluator eval(dd.A, S, v);

  SUBCASE("peak weights follow nbar and nbar+1") {
    // area ratio equals height ratio for equal-width Lorentzians
    CHECK(eval(omega0) / eval(-omega0) == doctest::Approx(nbar / (nbar + 1)).epsilon(2e-3));
  }
  SUBCASE("full width at half maximum equals the damping rate") {
    double peak = eval(omega0);
    double lo = omega0, hi = omega0;
    while (eval(lo) > peak / 2) lo -= gamma / 50;
    while (eval(hi) > peak / 2) hi += gamma / 50;
    // refine by bisection on both sides
    auto refine = [&](double inside, double outside) {
      for (int i = 0; i < 60; ++i) {
        double mid = (inside + outside) / 2;
        (eval(mid) > peak / 2 ? inside : outside) = mid;
      }
      return (inside + outside) / 2;
    };
    double width = refine(hi - gamma / 50, hi) - refine(lo + gamma / 50, lo);
    CHECK(width == doctest::Approx(gamma).epsilon(5e-3));
  }
  SUBCASE("integral satisfies the sum rule") {
    auto res = eval.integral(1e-9);
    CHECK(res == doctest::Approx(eval.sum_rule_target()).epsilon(5e-3));
    CHECK(eval.sum_rule_target() == doctest::Approx(nbar + 0.5).epsilon(1e-12));
  }
  SUBCASE("symmetrized evaluator averages the two signs") {
    gauss::SpectrumEvaluator sym(dd.A, S, v, gauss::SpectrumKind::symmetrized);
    CHECK(sym(omega0) == doctest::Approx((eval(omega0) + eval(-omega0)) / 2).epsilon(1e-12));
  }
}

TEST_CASE("resolvent spectrum matches direct Fourier transform of the correlation") {
  // two coupled modes, moderate damping; C(tau) = v^T e^{A tau} (sigma + i Omega/2) v
  Eigen::MatrixXd W(4, 4);
  W << 5.0, 0.0, 0.7, 0.0,
       0.0, 5.0, 0.0, 0.7,
       0.7, 0.0, 8.0, 0.0,
       0.0, 0.7, 0.0, 8.0;
  QuadraticModel model(W);
  std::vector<LindbladChannel> ch = {{0, 0.4 * 1.3, 0.4 * 0.3}, {1, 0.7 * 1.0, 0.0}};
  auto dd = gauss::build_drift_diffusion(model, ch);
  Eigen::MatrixXd S = gauss::lyapunov_steady_state(dd.A, dd.D);
  Eigen::VectorXd v(4);
  v << 1.0, 0.0, 0.0, 0.0;
  gauss::SpectrumEvaluator eval(dd.A, S, v);

  const double margin = gauss::hurwitz_margin(dd.A);
  const double T = 40.0 / margin;
  const int N = 1 << 16;
  const double dt = T / N;
  Eigen::MatrixXcd M = S.cast<std::complex<double>>();
  auto Om = gauss::symplectic_form(2);
  M += std::complex<double>(0, 0.5) * Om.cast<std::complex<double>>();
  Eigen::MatrixXd P = (dd.A * dt).exp();
  Eigen::VectorXcd w = M * v.cast<std::complex<double>>();
  for (double omega : {4.6, 5.0, 5.4, 8.0, -5.0}) {
    std::complex<double> acc = 0.5 * v.cast<std::complex<double>>().dot(w.conjugate()).real();
    Eigen::VectorXcd cur = w;
    for (int k = 1; k < N; ++k) {
      cur = P.cast<std::complex<double>>() * cur;
      acc += std::exp(std::complex<double>(0, -omega * k * dt)) *
             (v.cast<std::complex<double>>().transpose() * cur)(0);
    }
    double direct = (acc * dt).real() / M_PI;
    CHECK(eval(omega) == doctest::Approx(direct).epsilon(1e-2));
  }
}

TEST_CASE("spectrum sum rule holds for the reference cooling model") {
  auto dd = fig4_drift_diffusion();
  Eigen::MatrixXd S = gauss::lyapunov_steady_state(dd.A, dd.D);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(6);
  v(0) = 1.0;
  gauss::SpectrumEvaluator eval(dd.A, S, v);
  auto integral = eval.integral(1e-8);
  CHECK(integral == doctest::Approx(eval.sum_rule_target()).epsilon(5e-3));
}
