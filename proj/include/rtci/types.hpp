#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rtci {

using NodeId = std::uint32_t;

/// n x t_max matrix of node time series, stored row-major (row = node).
/// Column t is the observation at 0-based time step t.
class Panel {
 public:
  Panel() = default;
  Panel(std::size_t nodes, std::size_t steps, double fill = 0.0);
  /// Takes ownership of row-major values; throws DimensionError on a size
  /// mismatch and ParseError on non-finite entries.
  Panel(std::size_t nodes, std::size_t steps, std::vector<double> values);

  static Panel from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t num_nodes() const noexcept { return nodes_; }
  std::size_t num_steps() const noexcept { return steps_; }

  double operator()(std::size_t node, std::size_t t) const noexcept {
    return values_[node * steps_ + t];
  }
  double& operator()(std::size_t node, std::size_t t) noexcept {
    return values_[node * steps_ + t];
  }

  std::span<const double> row(std::size_t node) const noexcept {
    return {values_.data() + node * steps_, steps_};
  }
  std::span<double> row(std::size_t node) noexcept {
    return {values_.data() + node * steps_, steps_};
  }

  /// Copy of columns [begin, end).
  Panel columns(std::size_t begin, std::size_t end) const;

  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const Panel&, const Panel&) = default;

 private:
  std::size_t nodes_ = 0;
  std::size_t steps_ = 0;
  std::vector<double> values_;
};

}  // namespace rtci
