#include "lou/cumulants.hpp"

#include <array>
#include <cmath>
#include <initializer_list>

#include "lou/charfn.hpp"
#include "lou/errors.hpp"

namespace lou {
namespace {

// One term coef * x^power * exp(-rate * x) of an exponential polynomial.
struct Term {
  int coef;
  int rate;
  int power;
};

// Every bracket in the cumulant formulas vanishes at x = 0 and some only at
// O(x^5), so direct evaluation loses all digits for small alpha*tau. Below
// kSeriesCutoff the Taylor coefficients are built from exact integers.
constexpr double kSeriesCutoff = 0.5;
constexpr int kSeriesOrder = 30;

long double factorial(int n) {
  long double f = 1.0L;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

__extension__ using int128 = __int128;

double exp_poly(std::initializer_list<Term> terms, double x) {
  if (x > kSeriesCutoff) {
    double sum = 0.0;
    for (const Term& t : terms) sum += t.coef * std::pow(x, t.power) * std::exp(-t.rate * x);
    return sum;
  }
  long double sum = 0.0L;
  long double x_pow = 1.0L;
  for (int n = 0; n <= kSeriesOrder; ++n) {
    // n! * [x^n] = sum coef * (-rate)^(n-p) * n! / (n-p)!
    int128 numerator = 0;
    for (const Term& t : terms) {
      if (n < t.power) continue;
      int128 v = t.coef;
      for (int i = 0; i < n - t.power; ++i) v *= -t.rate;
      for (int i = n - t.power + 1; i <= n; ++i) v *= i;
      numerator += v;
    }
    if (numerator != 0) sum += static_cast<long double>(numerator) / factorial(n) * x_pow;
    x_pow *= x;
  }
  return static_cast<double>(sum);
}

}  // namespace

CumulantSet analytic_cumulants(double tau, const ModelParams& p, double x0) {
  if (tau < 0.0) throw Error(ErrorCode::kInvalidParameter, "tau must be non-negative");
  const double a = p.alpha;
  const double k = p.k;
  const double m = p.m;
  const double rho = p.rho;
  const double z = p.z0 - 1.0;
  const double x = a * tau;
  const double q = (k * m / a) * (k * m / a);
  const double v = k * k / a;
  const double m2 = m * m;
  const double m3 = m2 * m;
  const double m4 = m2 * m2;
  const double m5 = m4 * m;
  const double a2 = a * a;
  const double a3 = a2 * a;
  const double a4 = a3 * a;

  auto E = [x](std::initializer_list<Term> t) { return exp_poly(t, x); };

  CumulantSet c;
  c.tau = tau;

  c.k1 = -martingale_bracket(tau, p) + m2 / a * z * E({{1, 1, 0}, {-1, 0, 0}}) - 0.5 * m2 * tau + x0;

  const double b21 = E({{1, 2, 0}, {-4, 1, 0}, {-2, 0, 1}, {3, 0, 0}});
  const double b22 = E({{1, 2, 0}, {2, 0, 1}, {-1, 0, 0}});
  const double b23 = E({{1, 2, 0}, {-1, 0, 0}});
  const double b24 = E({{1, 1, 0}, {-1, 0, 0}});
  const double b25 = E({{1, 1, 0}, {1, 1, 1}, {-1, 0, 0}});
  const double b26 = E({{1, 1, 0}, {1, 0, 1}, {-1, 0, 0}});
  c.k2 = 0.25 * m2 / a * (-2.0 * q * b21 + v * b22 - 2.0 * z * z * b23 - 8.0 * z * b24 + 4.0 * x) +
         2.0 * k * m3 / a2 * rho * (z * b25 - b26);

  const double b31 = E({{1, 3, 0}, {-2, 2, 0}, {3, 1, 0}, {2, 1, 1}, {-2, 0, 0}});
  const double b33 = E({{-3, 2, 0}, {-2, 2, 1}, {12, 1, 0}, {4, 1, 1}, {4, 0, 1}, {-9, 0, 0}});
  const double b34 = E({{1, 2, 0}, {1, 2, 1}, {1, 0, 1}, {-1, 0, 0}});
  const double b35 = E({{1, 2, 0}, {2, 2, 1}, {-1, 0, 0}});
  const double b36 = E({{1, 2, 0}, {-4, 1, 0}, {-2, 1, 1}, {3, 0, 0}});
  const double b38 = E({{2, 1, 0}, {2, 1, 1}, {1, 1, 2}, {-2, 0, 0}});
  const double b39 = E({{2, 1, 0}, {1, 1, 1}, {1, 0, 1}, {-2, 0, 0}});
  c.k3 = 1.5 * k * k * m4 / a3 * (z * b31 + 2.0 * b21) +
         1.5 * k * m3 / a2 * rho * (q * b33 + v * b34 - z * z * b35 + 2.0 * z * b36 + 4.0 * b26) +
         3.0 * k * k * m4 / a3 * rho * rho * (z * b38 - 2.0 * b39);

  const double b41 =
      E({{-1, 4, 0}, {4, 3, 0}, {-12, 2, 0}, {-4, 2, 1}, {28, 1, 0}, {8, 1, 1}, {8, 0, 1}, {-19, 0, 0}});
  const double b42 = E({{1, 4, 0}, {4, 2, 0}, {8, 2, 1}, {4, 0, 1}, {-5, 0, 0}});
  const double b43 = E({{1, 4, 0}, {4, 2, 1}, {-1, 0, 0}});
  const double b44 = E({{-1, 3, 0}, {2, 2, 0}, {-3, 1, 0}, {-2, 1, 1}, {2, 0, 0}});
  const double b45 = E({{-1, 2, 0}, {4, 1, 0}, {2, 0, 1}, {-3, 0, 0}});
  const double b46 =
      E({{3, 3, 0}, {3, 3, 1}, {-6, 2, 0}, {-4, 2, 1}, {9, 1, 0}, {7, 1, 1}, {2, 1, 2}, {-6, 0, 0}});
  const double b47 = E({{-1, 3, 0}, {10, 2, 0}, {4, 2, 1}, {-35, 1, 0}, {-10, 1, 1}, {-12, 0, 1}, {26, 0, 0}});
  const double b48 =
      E({{-3, 2, 0}, {-3, 2, 1}, {-1, 2, 2}, {12, 1, 0}, {6, 1, 1}, {1, 1, 2}, {3, 0, 1}, {-9, 0, 0}});
  const double b49 = E({{3, 2, 0}, {4, 2, 1}, {2, 2, 2}, {2, 0, 1}, {-3, 0, 0}});
  const double b410 = E({{1, 2, 0}, {2, 2, 1}, {2, 2, 2}, {-1, 0, 0}});
  const double b411 = E({{2, 2, 0}, {2, 2, 1}, {-6, 1, 0}, {-4, 1, 1}, {-1, 1, 2}, {4, 0, 0}});
  const double b412 = E({{1, 2, 0}, {-12, 1, 0}, {-4, 1, 1}, {-6, 0, 1}, {11, 0, 0}});
  const double b413 = E({{6, 1, 0}, {6, 1, 1}, {3, 1, 2}, {1, 1, 3}, {-6, 0, 0}});
  const double b414 = E({{6, 1, 0}, {4, 1, 1}, {1, 1, 2}, {2, 0, 1}, {-6, 0, 0}});
  const double k2m4a3 = k * k * m4 / a3;
  const double k3m5a4 = k * k * k * m5 / a4;
  c.k4 = 3.0 * k2m4a3 *
             (0.5 * q * b41 + v / 8.0 * b42 - 0.5 * z * z * b43 + 2.0 * z * b44 + 2.0 * b45) +
         6.0 * k3m5a4 * rho * (z * b46 + b47) +
         3.0 * k2m4a3 * rho * rho *
             (4.0 * q * b48 + v * b49 - 2.0 * z * z * b410 + 4.0 * z * b411 - 2.0 * b412) +
         4.0 * k3m5a4 * rho * rho * rho * (z * b413 - 3.0 * b414);
  return c;
}

SmileStats smile_stats_from_cumulants(const CumulantSet& c) {
  if (!(c.k2 > 0.0)) throw Error(ErrorCode::kNonPositiveVariance, "k2 must be positive");
  SmileStats s;
  s.tau = c.tau;
  s.sigma = std::sqrt(c.k2);
  s.zeta = c.k3 / (c.k2 * s.sigma);
  s.kappa = c.k4 / (c.k2 * c.k2);
  return s;
}

SkewKurtosis small_tau_asymptotics(double tau, const ModelParams& p) {
  return {3.0 * p.k * p.rho * std::sqrt(tau) / p.z0,
          4.0 * p.k * p.k * (1.0 + 2.0 * p.rho * p.rho) * tau / (p.z0 * p.z0)};
}

}  // namespace lou
