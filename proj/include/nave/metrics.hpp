#pragma once

#include <span>

namespace nave {

/// Adjusted Rand index between two labelings of the same items. Label values
/// are arbitrary non-negative integers. Returns 1 when both labelings put
/// every item in a single cluster.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

}  // namespace nave
