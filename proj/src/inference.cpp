#include "rtci/inference.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace rtci {

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIterations = 10000;

// Power series for P(a, x); converges quickly for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int k = 1; k < kMaxIterations; ++k) {
    term *= x / (a + k);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x), modified Lentz; for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a)) throw UsageError("incomplete gamma needs a > 0");
  if (!(x >= 0.0)) throw UsageError("incomplete gamma needs x >= 0");
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_fraction(a, x);
}

double chi_square_sf(double x, int df) {
  if (df < 1) throw UsageError("chi-square degrees of freedom must be >= 1");
  if (!(x >= 0.0)) throw UsageError("chi-square statistic must be >= 0");
  return regularized_gamma_q(0.5 * df, 0.5 * x);
}

HausmanResult hausman_test(const FitResult& fit_local, const FitResult& fit_ind) {
  const Eigen::Index p = fit_ind.beta.size();
  if (fit_local.beta.size() != p || fit_local.covariance.rows() != p ||
      fit_ind.covariance.rows() != p || fit_local.covariance.cols() != p ||
      fit_ind.covariance.cols() != p) {
    throw DimensionError("Hausman test needs fits with the same coefficient dimension");
  }
  if (fit_local.terms != fit_ind.terms) {
    throw DimensionError("Hausman test needs fits with the same coefficient ordering");
  }

  HausmanResult out;
  out.beta_diff = fit_local.beta - fit_ind.beta;
  const Eigen::MatrixXd v = fit_ind.covariance - fit_local.covariance;

  if (out.beta_diff.isZero(0.0) && v.isZero(0.0)) {
    out.identical_fits = true;
    out.df = static_cast<int>(p);
    out.statistic = 0.0;
    out.p_value = 1.0;
    return out;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (v + v.transpose()));
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double scale = lambda.cwiseAbs().maxCoeff();
  const double rank_tol = 1e-10 * scale;

  double h = 0.0;
  int df = 0;
  for (Eigen::Index k = 0; k < p; ++k) {
    if (lambda[k] > rank_tol) {
      const double proj = eig.eigenvectors().col(k).dot(out.beta_diff);
      h += proj * proj / lambda[k];
      ++df;
    } else if (lambda[k] < -rank_tol) {
      out.psd_violation = true;
    }
  }
  if (df == 0) {
    throw TestUndefinedError(
        "covariance difference has rank 0; the test is undefined (more data needed)",
        out.psd_violation, out.beta_diff);
  }
  if (h < 0.0) {
    h = 0.0;
    out.psd_violation = true;
  }
  out.statistic = h;
  out.df = df;
  out.p_value = chi_square_sf(h, df);
  return out;
}

}  // namespace rtci
