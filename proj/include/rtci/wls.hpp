#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rtci/panel.hpp"

namespace rtci {

struct WlsOptions {
  /// Rows whose weight is below this are skipped.
  double cutoff_eps = 1e-8;
  /// HC1 sandwich covariance instead of sigma2 * (Z'WZ)^{-1}.
  bool robust_covariance = false;
  /// Condition number (of the diagonally scaled normal matrix) above which
  /// condition_warning is set.
  double condition_limit = 1e10;
};

struct FitResult {
  std::vector<std::string> terms;
  Eigen::VectorXd beta;
  Eigen::MatrixXd covariance;
  /// Weighted RSS / (n_eff - p).
  double sigma2 = 0.0;
  double weighted_rss = 0.0;
  /// Sum of the sample weights of the rows used.
  double n_eff = 0.0;
  std::size_t n_rows = 0;
  double condition_number = 0.0;
  bool condition_warning = false;
  bool robust_covariance = false;
  std::vector<std::string> warnings;

  Eigen::VectorXd standard_errors() const;
};

/// Solves Z'WZ beta = Z'Wy for row-major `z` (rows x p) with per-row
/// weights. Throws UnderdeterminedError when fewer than p rows carry weight
/// or the weight total does not exceed p, SingularError when the normal
/// matrix is rank deficient, EstimationError on non-finite input.
FitResult solve_wls(std::span<const double> z, std::size_t p, std::span<const double> y,
                    std::span<const double> row_weights, const WlsOptions& options = {});

/// Each design row (i, t) is weighted by node_weights[i].
FitResult fit_wls(const LaggedDesign& design, std::span<const double> node_weights,
                  const WlsOptions& options = {});

}  // namespace rtci
