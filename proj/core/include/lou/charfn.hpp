#pragma once

#include <complex>

#include "lou/model.hpp"

namespace lou {

using cplx = std::complex<double>;

// Auxiliary functions of the closed-form solution, evaluated at one phi.
// b_minus_d and c_inf = (b - d) / (4 k^2) are carried explicitly because
// both are computed without cancellation.
struct AuxCoefficients {
  cplx phi_cap;  // k m phi / alpha
  cplx b;
  cplx d;        // principal root, Re(d) >= 0
  cplx g;
  cplx h;
  cplx n;
  cplx b_minus_d;
  cplx c_inf;
};

struct AbcCoefficients {
  cplx a;
  cplx b;
  cplx c;
};

// Imaginary parts of the CF singularities, c_minus < 0 < c_plus.
// Infinite when the corresponding factor (rho -+ 1) or k m vanishes.
struct PoleOrdinates {
  double c_minus;
  double c_plus;
};

struct CfValue {
  cplx value;
  int log_arg_windings = 0;
};

inline constexpr double kDenominatorTolerance = 1e-14;

PoleOrdinates pole_ordinates(const ModelParams& p);

// True when -Im(phi) lies strictly inside (c_minus, c_plus).
bool in_regularity_strip(cplx phi, const ModelParams& p);

AuxCoefficients aux_coefficients(cplx phi, const ModelParams& p);

// A, B, C of the exponential-affine solution. The two logarithms in A are
// principal values taken separately.
AbcCoefficients abc(cplx phi, double tau, const ModelParams& p);

// A(-i) + B(-i) Z0 + C(-i) Z0^2: the drift correction exponent, equal to
// (m^2/2) times the integral of M over [0, tau].
double martingale_bracket(double tau, const ModelParams& p);

// Integral of M over [0, tau].
double martingale_integral(double tau, const ModelParams& p);

// Number of branch-cut crossings of log(1 - g e^{-d t}) for t in [0, tau].
int count_log_windings(cplx phi, double tau, const ModelParams& p);

// Characteristic function of the centred log-return at horizon tau. Holds
// the martingale bracket so repeated evaluation at fixed tau is cheap.
class LinearCf {
 public:
  LinearCf(const ModelParams& p, double tau, double x0 = 0.0);

  // ln f, evaluated directly as the exponent (no branch ambiguity).
  cplx log_value(cplx phi) const;
  cplx operator()(cplx phi) const { return std::exp(log_value(phi)); }
  CfValue evaluate(cplx phi) const;

  double tau() const { return tau_; }
  const ModelParams& params() const { return p_; }

 private:
  ModelParams p_;
  double tau_;
  double x0_;
  double bracket_;
};

CfValue cf(cplx phi, double tau, double x0, const ModelParams& p);
cplx log_cf(cplx phi, double tau, double x0, const ModelParams& p);

struct BranchScan {
  int jumps = 0;           // neighbours whose arg(1 - g e^{-d tau}) differs by >= pi
  double max_step = 0.0;   // largest neighbour difference seen
};

// Walks phi over [0, phi_max] on the real axis with the given step.
BranchScan scan_log_branch(double phi_max, double step, double tau, const ModelParams& p);

}  // namespace lou
