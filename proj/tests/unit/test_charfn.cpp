#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lou/charfn.hpp"
#include "lou/errors.hpp"
#include "lou/montecarlo.hpp"
#include "oracles.hpp"

using namespace lou;
using lou::testing::riccati_abc;

namespace {

const ModelParams kLin{5.6, 1.9, 0.264, -0.41, 1.0, 0.0};

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(Aux, ZeroPhi) {
  const auto x = aux_coefficients(0.0, kLin);
  EXPECT_EQ(x.phi_cap, cplx(0.0));
  EXPECT_EQ(x.b, cplx(2 * kLin.alpha));
  EXPECT_EQ(x.d, cplx(2 * kLin.alpha));
  EXPECT_EQ(x.g, cplx(0.0));
  EXPECT_EQ(x.h, cplx(0.0));
  EXPECT_EQ(x.n, cplx(0.0));
}

TEST(Aux, MinusIWithZeroRhoIsReal) {
  ModelParams p = kLin;
  p.rho = 0.0;
  const auto x = aux_coefficients(cplx(0.0, -1.0), p);
  EXPECT_EQ(x.b.imag(), 0.0);
  EXPECT_NEAR(x.d.imag(), 0.0, 1e-15);
  EXPECT_GT(x.d.real(), 0.0);
}

TEST(Aux, DiscriminantIdentity) {
  // d^2 = b^2 + 4 alpha^2 Phi^2, evaluated independently from the definitions.
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    const auto p = lou::testing::random_params(rng);
    for (cplx phi : {cplx(1.0, 0.0), cplx(-3.0, -0.4), cplx(12.0, 0.2)}) {
      const auto x = aux_coefficients(phi, p);
      const cplx capital = p.k * p.m * phi / p.alpha;
      const cplx b = 2.0 * p.alpha * (1.0 - cplx(0, 1) * p.rho * capital);
      const cplx d2 = b * b + 4.0 * p.alpha * p.alpha * capital * capital;
      EXPECT_LT(rel(x.d * x.d, d2), 1e-12);
      EXPECT_GE(x.d.real(), 0.0);
      // g (b + d) = b - d; checked in product form since b - d cancels.
      EXPECT_LT(std::abs(x.g * (x.b + x.d) - (x.b - x.d)), 1e-12 * std::abs(x.b));
    }
  }
}

TEST(Abc, VanishAtZeroTauAndZeroPhi) {
  const auto at_tau0 = abc(cplx(0.7, -0.2), 0.0, kLin);
  EXPECT_EQ(at_tau0.a, cplx(0.0));
  EXPECT_EQ(at_tau0.b, cplx(0.0));
  EXPECT_EQ(at_tau0.c, cplx(0.0));
  const auto at_phi0 = abc(0.0, 1.3, kLin);
  EXPECT_EQ(at_phi0.a, cplx(0.0));
  EXPECT_EQ(at_phi0.b, cplx(0.0));
  EXPECT_EQ(at_phi0.c, cplx(0.0));
}

TEST(Abc, MatchesRiccatiIntegration) {
  const auto closed = abc(0.5, 1.0, kLin);
  const auto ode = riccati_abc(0.5, 1.0, kLin, 20000);
  EXPECT_LT(std::abs(closed.a - ode[0]), 1e-11);
  EXPECT_LT(std::abs(closed.b - ode[1]), 1e-11);
  EXPECT_LT(std::abs(closed.c - ode[2]), 1e-11);
}

TEST(Abc, MatchesRiccatiOnRandomParams) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const auto p = lou::testing::random_params(rng);
    for (cplx phi : {cplx(2.0, 0.0), cplx(-1.0, -0.5), cplx(0.3, 0.6)}) {
      if (!in_regularity_strip(phi, p)) continue;
      for (double tau : {0.05, 0.7}) {
        const auto closed = abc(phi, tau, p);
        const auto ode = riccati_abc(phi, tau, p, 8000);
        const double scale = 1.0 + std::abs(ode[0]) + std::abs(ode[1]) + std::abs(ode[2]);
        EXPECT_LT(std::abs(closed.a - ode[0]) / scale, 1e-9) << i;
        EXPECT_LT(std::abs(closed.b - ode[1]) / scale, 1e-9) << i;
        EXPECT_LT(std::abs(closed.c - ode[2]) / scale, 1e-9) << i;
      }
    }
  }
}

TEST(Martingale, IntegralVanishesAtZeroTau) { EXPECT_EQ(martingale_integral(0.0, kLin), 0.0); }

TEST(Martingale, VanishesWithoutVolOfVol) {
  ModelParams p = kLin;
  p.k = 0.0;
  for (double tau : {0.1, 1.0, 4.0}) EXPECT_NEAR(martingale_integral(tau, p), 0.0, 1e-14);
}

TEST(Martingale, IntegralMatchesQuadratureOfDerivative) {
  // M(t) = d/dt of the integral; rebuild the integral by Simpson's rule
  // from a differenced bracket.
  const int n = 2000;
  const double tau = 1.0, h = 1e-5;
  auto deriv = [&](double t) {
    if (t < 2 * h) {
      return (-3 * martingale_integral(t, kLin) + 4 * martingale_integral(t + h, kLin) -
              martingale_integral(t + 2 * h, kLin)) / (2 * h);
    }
    return (martingale_integral(t + h, kLin) - martingale_integral(t - h, kLin)) / (2 * h);
  };
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * deriv(tau * i / n);
  }
  sum *= tau / n / 3.0;
  EXPECT_NEAR(sum, martingale_integral(tau, kLin), 1e-8);
}

TEST(Cf, NormalizedAtZero) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto p = lou::testing::random_params(rng);
    EXPECT_EQ(cf(0.0, 0.8, 0.0, p).value, cplx(1.0, 0.0));
  }
}

TEST(Cf, MartingaleAtMinusI) {
  for (double tau : {0.01, 0.1, 1.0, 5.0}) {
    EXPECT_LT(std::abs(cf(cplx(0.0, -1.0), tau, 0.0, kLin).value - 1.0), 1e-10);
  }
}

TEST(Cf, GaussianLimit) {
  ModelParams p = kLin;
  p.k = 0.0;
  p.z0 = 1.0;
  const double x0 = 0.03;
  for (double tau : {0.1, 1.0}) {
    for (double phi : {-4.0, 0.5, 3.0, 10.0}) {
      const cplx i(0.0, 1.0);
      const cplx expect = std::exp(i * phi * x0 - 0.5 * p.m * p.m * tau * (phi * phi + i * phi));
      EXPECT_LT(std::abs(cf(phi, tau, x0, p).value - expect), 1e-14);
    }
  }
}

TEST(Cf, BoundedAndHermitianOnRealAxis) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    const auto p = lou::testing::random_params(rng);
    const LinearCf f(p, 0.6, 0.0);
    for (double phi = -40.0; phi <= 40.0; phi += 0.73) {
      const cplx v = f(phi);
      EXPECT_LE(std::abs(v), 1.0 + 1e-12);
      EXPECT_LT(std::abs(f(-phi) - std::conj(v)), 1e-13);
    }
  }
}

TEST(Cf, StripViolationThrows) {
  const auto poles = pole_ordinates(kLin);
  try {
    cf(cplx(0.0, -(poles.c_plus + 0.1)), 1.0, 0.0, kLin);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kStripViolation);
  }
}

TEST(Cf, PoleOrdinates) {
  const auto poles = pole_ordinates(kLin);
  EXPECT_NEAR(poles.c_plus, 5.6 / (1.9 * 0.264 * 0.59), 1e-12);
  EXPECT_NEAR(poles.c_minus, 5.6 / (1.9 * 0.264 * -1.41), 1e-12);
  EXPECT_TRUE(in_regularity_strip(cplx(0.0, -1.0), kLin));
}

TEST(Branch, NoWindingsOnRealRays) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 20; ++i) {
    const auto p = lou::testing::random_params(rng);
    for (double tau : {0.1, 1.0, 5.0}) {
      const auto scan = scan_log_branch(200.0, 0.01, tau, p);
      EXPECT_EQ(scan.jumps, 0);
      EXPECT_LT(scan.max_step, M_PI);
      EXPECT_EQ(cf(37.0, tau, 0.0, p).log_arg_windings, 0);
    }
  }
}

TEST(Cf, AgreesWithEmpiricalCf) {
  std::mt19937_64 rng(17);
  SimConfig sim;
  sim.n_paths = 40000;
  sim.steps_per_year = 500;
  for (int i = 0; i < 10; ++i) {
    const auto p = lou::testing::random_params(rng);
    const double tau = 0.5;
    const auto e = simulate(ModelKind::kLinear, p, tau, sim);
    for (double phi = -20.0; phi <= 20.0; phi += 2.5) {
      cplx mean = 0.0;
      double s2 = 0.0;
      for (double x : e.terminal_x) mean += std::exp(cplx(0.0, phi * x));
      mean /= static_cast<double>(e.terminal_x.size());
      for (double x : e.terminal_x) s2 += std::norm(std::exp(cplx(0.0, phi * x)) - mean);
      const double se = std::sqrt(s2 / (e.terminal_x.size() - 1.0) / e.terminal_x.size());
      // Euler bias at this step size is far below 1e-3.
      EXPECT_LT(std::abs(mean - cf(phi, tau, 0.0, p).value), 3.0 * se + 2e-3) << "set " << i << " phi " << phi;
    }
  }
}
