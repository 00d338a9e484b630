#include "rtci/wls.hpp"

#include <cmath>
#include <string>

#include "rtci/error.hpp"

namespace rtci {

namespace {

// cond(S) beyond this is treated as exact rank deficiency.
constexpr double kSingularRatio = 1e-12;

}  // namespace

Eigen::VectorXd FitResult::standard_errors() const {
  return covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
}

FitResult solve_wls(std::span<const double> z, std::size_t p, std::span<const double> y,
                    std::span<const double> row_weights, const WlsOptions& options) {
  const std::size_t rows = y.size();
  if (p == 0) throw UsageError("regression needs at least one regressor");
  if (z.size() != rows * p || row_weights.size() != rows) {
    throw DimensionError("design, response and weights disagree in row count");
  }

  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p),
                                                 static_cast<Eigen::Index>(p));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  double n_eff = 0.0;
  std::size_t used = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double w = row_weights[r];
    if (!(w >= 0.0)) throw EstimationError("negative or NaN sample weight");
    if (w < options.cutoff_eps) continue;
    const double* zr = z.data() + r * p;
    for (std::size_t a = 0; a < p; ++a) {
      const double wza = w * zr[a];
      rhs[static_cast<Eigen::Index>(a)] += wza * y[r];
      for (std::size_t b = 0; b <= a; ++b) {
        normal(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += wza * zr[b];
      }
    }
    n_eff += w;
    ++used;
  }
  if (used < p || !(n_eff > static_cast<double>(p))) {
    throw UnderdeterminedError("only " + std::to_string(used) + " weighted rows (weight total " +
                               std::to_string(n_eff) + ") for " + std::to_string(p) +
                               " coefficients");
  }
  normal.triangularView<Eigen::StrictlyUpper>() = normal.transpose();
  if (!normal.allFinite() || !rhs.allFinite()) {
    throw EstimationError("normal equations are not finite (overflowing series?)");
  }

  // Jacobi scaling makes the rank and condition checks unit-free.
  Eigen::VectorXd diag = normal.diagonal();
  for (Eigen::Index k = 0; k < diag.size(); ++k) {
    if (!(diag[k] > 0.0)) {
      throw SingularError("regressor " + std::to_string(k) + " is identically zero");
    }
  }
  const Eigen::VectorXd inv_sqrt = diag.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd scaled = inv_sqrt.asDiagonal() * normal * inv_sqrt.asDiagonal();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  if (!(lmin > kSingularRatio * lmax)) {
    throw SingularError("normal matrix is rank deficient (collinear regressors)");
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  const Eigen::MatrixXd scaled_inv = qr.inverse();
  Eigen::MatrixXd normal_inv = inv_sqrt.asDiagonal() * scaled_inv * inv_sqrt.asDiagonal();
  normal_inv = 0.5 * (normal_inv + normal_inv.transpose()).eval();

  FitResult fit;
  fit.beta = inv_sqrt.asDiagonal() * qr.solve(inv_sqrt.asDiagonal() * rhs);
  fit.n_eff = n_eff;
  fit.n_rows = used;
  fit.condition_number = lmax / lmin;
  fit.condition_warning = fit.condition_number > options.condition_limit;
  if (fit.condition_warning) {
    fit.warnings.push_back("ill-conditioned normal matrix (condition number " +
                           std::to_string(fit.condition_number) + ")");
  }

  Eigen::MatrixXd meat;
  if (options.robust_covariance) meat = Eigen::MatrixXd::Zero(normal.rows(), normal.cols());
  double rss = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double w = row_weights[r];
    if (w < options.cutoff_eps) continue;
    const double* zr = z.data() + r * p;
    double fitted = 0.0;
    for (std::size_t a = 0; a < p; ++a) fitted += zr[a] * fit.beta[static_cast<Eigen::Index>(a)];
    const double e = y[r] - fitted;
    rss += w * e * e;
    if (options.robust_covariance) {
      const double s = w * w * e * e;
      for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = 0; b < p; ++b) {
          meat(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += s * zr[a] * zr[b];
        }
      }
    }
  }
  const double dof = n_eff - static_cast<double>(p);
  fit.weighted_rss = rss;
  fit.sigma2 = rss / dof;
  if (options.robust_covariance) {
    fit.covariance = (n_eff / dof) * normal_inv * meat * normal_inv;
    fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose()).eval();
    fit.robust_covariance = true;
  } else {
    fit.covariance = fit.sigma2 * normal_inv;
  }
  if (!fit.beta.allFinite() || !fit.covariance.allFinite()) {
    throw EstimationError("non-finite estimate");
  }
  return fit;
}

FitResult fit_wls(const LaggedDesign& design, std::span<const double> node_weights,
                  const WlsOptions& options) {
  std::vector<double> row_weights(design.rows());
  for (std::size_t r = 0; r < design.rows(); ++r) {
    const NodeId i = design.node[r];
    if (i >= node_weights.size()) throw DimensionError("node weight vector too short");
    row_weights[r] = node_weights[i];
  }
  FitResult fit = solve_wls(design.z, design.num_regressors, design.y, row_weights, options);
  fit.terms = design.terms;
  return fit;
}

}  // namespace rtci
