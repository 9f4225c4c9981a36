#pragma once

#include <optional>
#include <vector>

namespace fracneu {

/// Weighted isotonic regression (non-decreasing) by pool-adjacent-violators,
/// optionally with a pointwise lower bound applied after pooling. Fitted
/// values preserve the weighted mean when no lower bound is active.
std::vector<double> isotonic_nondecreasing(const std::vector<double>& y,
                                           const std::vector<double>& w,
                                           std::optional<double> lower_bound = {});

}  // namespace fracneu
