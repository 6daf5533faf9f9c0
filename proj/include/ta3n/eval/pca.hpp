#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ta3n/data/video.hpp"

namespace ta3n::eval {

struct PcaResult {
  std::vector<std::array<double, 2>> coords;
  std::array<double, 2> variance{};  // eigenvalues of the two kept directions
  bool zero_variance = false;
};

/// Centers the points and projects them onto the top two principal directions.
/// Each direction's largest-magnitude component is made positive.
PcaResult pca_project(const std::vector<std::vector<double>>& points);

struct ProjectionRow {
  std::string id;
  data::Domain domain;
  std::optional<int> label;
  std::array<double, 2> xy;
};

/// CSV with header `id,domain,label,x,y`; domain as source/target, label -1 when absent.
std::string pca_csv(const std::vector<ProjectionRow>& rows);
void write_pca_csv(const std::string& path, const std::vector<ProjectionRow>& rows);

}  // namespace ta3n::eval
