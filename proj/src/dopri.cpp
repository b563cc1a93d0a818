#include "qcurv/dopri.hpp"

#include "qcurv/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace qcurv {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

}  // namespace

Eigen::VectorXd Dopri45::Step::at(double theta) const {
  double th1 = 1 - theta;
  return rcont[0] + theta * (rcont[1] + th1 * (rcont[2] + theta * (rcont[3] + th1 * rcont[4])));
}

Dopri45::Dopri45(Rhs rhs, ErrorRatio ratio, double h_min)
    : rhs_(std::move(rhs)), ratio_(std::move(ratio)), h_min_(h_min) {}

Dopri45::Step Dopri45::step(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& k1, double h,
                            double h_max) const {
  Step out;
  h = std::min(h, h_max);
  for (;;) {
    if (!(h >= h_min_))
      throw Error(ErrorKind::StepUnderflow, fmt::format("step size {:.3g} fell below {:.3g} at t = {:.17g}", h, h_min_, t));
    Eigen::VectorXd k2 = rhs_(t + c2 * h, y + h * a21 * k1);
    Eigen::VectorXd k3 = rhs_(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    Eigen::VectorXd k4 = rhs_(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    Eigen::VectorXd k5 = rhs_(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    Eigen::VectorXd k6 = rhs_(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Eigen::VectorXd y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    Eigen::VectorXd k7 = rhs_(t + h, y1);
    Eigen::VectorXd err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double r = ratio_(err, y, y1);
    if (!std::isfinite(r)) r = 1e10;
    double fac = r > 0 ? 0.9 * std::pow(r, -0.2) : 5.0;
    if (r <= 1.0) {
      out.t0 = t;
      out.h = h;
      out.y0 = y;
      out.y1 = y1;
      out.k1_next = k7;
      out.rcont[0] = y;
      out.rcont[1] = y1 - y;
      out.rcont[2] = h * k1 - out.rcont[1];
      out.rcont[3] = out.rcont[1] - h * k7 - out.rcont[2];
      out.rcont[4] = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      double grow = std::clamp(fac, 0.2, out.rejected ? 1.0 : 5.0);
      out.h_next = h * grow;
      return out;
    }
    ++out.rejected;
    h *= std::clamp(fac, 0.1, 0.9);
  }
}

}  // namespace qcurv
