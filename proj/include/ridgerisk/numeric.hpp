#pragma once

#include <span>

namespace ridgerisk {

/// Neumaier-compensated accumulator. Error stays O(eps) independent of the
/// number of terms, which matters for tail sums over ~1e4 near-equal values.
class CompensatedSum {
 public:
  CompensatedSum& add(double x) noexcept;
  CompensatedSum& operator+=(double x) noexcept { return add(x); }
  [[nodiscard]] double value() const noexcept { return sum_ + correction_; }

 private:
  double sum_ = 0.0;
  double correction_ = 0.0;
};

[[nodiscard]] double compensated_sum(std::span<const double> values) noexcept;

/// Sum of f(x) over a range, compensated.
template <typename Range, typename F>
[[nodiscard]] double compensated_sum_of(const Range& range, F&& f) {
  CompensatedSum acc;
  for (const auto& x : range) acc.add(f(x));
  return acc.value();
}

}  // namespace ridgerisk
