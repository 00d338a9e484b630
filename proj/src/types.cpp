#include "rtci/types.hpp"

#include <cmath>
#include <string>

#include "rtci/error.hpp"

namespace rtci {

Panel::Panel(std::size_t nodes, std::size_t steps, double fill)
    : nodes_(nodes), steps_(steps), values_(nodes * steps, fill) {}

Panel::Panel(std::size_t nodes, std::size_t steps, std::vector<double> values)
    : nodes_(nodes), steps_(steps), values_(std::move(values)) {
  if (values_.size() != nodes_ * steps_) {
    throw DimensionError("panel expects " + std::to_string(nodes_ * steps_) +
                         " values, got " + std::to_string(values_.size()));
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw ParseError("non-finite panel value at node " + std::to_string(k / steps_) +
                       ", step " + std::to_string(k % steps_));
    }
  }
}

Panel Panel::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t steps = rows.empty() ? 0 : rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * steps);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != steps) {
      throw DimensionError("ragged panel row " + std::to_string(i));
    }
    values.insert(values.end(), rows[i].begin(), rows[i].end());
  }
  return Panel(rows.size(), steps, std::move(values));
}

Panel Panel::columns(std::size_t begin, std::size_t end) const {
  if (begin > end || end > steps_) {
    throw DimensionError("column range [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") outside panel of " + std::to_string(steps_) + " steps");
  }
  Panel out(nodes_, end - begin);
  for (std::size_t i = 0; i < nodes_; ++i) {
    auto src = row(i).subspan(begin, end - begin);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace rtci
