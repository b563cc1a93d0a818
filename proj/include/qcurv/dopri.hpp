#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>

namespace qcurv {

/// Dormand-Prince 5(4) pair with FSAL and 5th-order dense output.
class Dopri45 {
 public:
  using Rhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;
  /// Maps the embedded error estimate and the candidate state to err/allowed (accept iff <= 1).
  using ErrorRatio = std::function<double(const Eigen::VectorXd& err, const Eigen::VectorXd& y0,
                                          const Eigen::VectorXd& y1)>;

  struct Step {
    double t0 = 0;
    double h = 0;
    Eigen::VectorXd y0, y1;
    Eigen::VectorXd k1_next;  // derivative at (t0 + h, y1)
    std::array<Eigen::VectorXd, 5> rcont;
    double h_next = 0;
    int rejected = 0;

    /// Dense output at t0 + theta h, theta in [0, 1].
    Eigen::VectorXd at(double theta) const;
  };

  Dopri45(Rhs rhs, ErrorRatio ratio, double h_min = 1e-12);

  /// Takes one accepted step from (t, y) trying `h` first; `k1` is f(t, y).
  /// Throws StepUnderflow when h falls below h_min.
  Step step(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& k1, double h,
            double h_max = 1e300) const;

  const Rhs& rhs() const { return rhs_; }

 private:
  Rhs rhs_;
  ErrorRatio ratio_;
  double h_min_;
};

}  // namespace qcurv
