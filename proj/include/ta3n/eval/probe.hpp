#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ta3n::eval {

/// Probe on explicit 0/1 labels. The split depends only on `seed` and the row count,
/// so relabeling (e.g. swapping the two domains) keeps the same partition.
double probe_accuracy_labeled(std::span<const std::vector<double>> features, std::span<const int> labels,
                              std::uint64_t seed);

}  // namespace ta3n::eval
