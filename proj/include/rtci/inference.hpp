#pragma once

#include <Eigen/Dense>

#include "rtci/error.hpp"
#include "rtci/wls.hpp"

namespace rtci {

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double regularized_gamma_q(double a, double x);

/// 1 - F(x; df) for the chi-square distribution, i.e. Q(df/2, x/2).
double chi_square_sf(double x, int df);

struct HausmanResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  /// Var(ind) - Var(local) had an eigenvalue below -rank_tol.
  bool psd_violation = false;
  /// Both fits coincide exactly; reported as H = 0, p = 1, df = p.
  bool identical_fits = false;
  Eigen::VectorXd beta_diff;
};

/// Raised when the covariance difference has no positive eigenvalue.
class TestUndefinedError : public Error {
 public:
  TestUndefinedError(const std::string& what, bool psd_violation, Eigen::VectorXd beta_diff)
      : Error(what), psd_violation_(psd_violation), beta_diff_(std::move(beta_diff)) {}
  const char* kind() const noexcept override { return "test_undefined"; }
  bool psd_violation() const noexcept { return psd_violation_; }
  const Eigen::VectorXd& beta_diff() const noexcept { return beta_diff_; }

 private:
  bool psd_violation_;
  Eigen::VectorXd beta_diff_;
};

/// Durbin-Wu-Hausman comparison of a pooled (local) fit against the
/// consistent individual fit:
///   H = d' V^+ d,  d = beta_local - beta_ind,  V = Var(ind) - Var(local),
/// with V^+ the pseudo-inverse on the eigenvalues above
/// rank_tol = 1e-10 * max|eigenvalue| and df the number of those eigenvalues.
HausmanResult hausman_test(const FitResult& fit_local, const FitResult& fit_ind);

}  // namespace rtci
