#pragma once

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ta3n/autodiff/tensor.hpp"

namespace test {

inline void check_close(std::span<const double> a, std::span<const double> b, double tol) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    INFO("index " << i << ": " << a[i] << " vs " << b[i]);
    CHECK(std::abs(a[i] - b[i]) <= tol);
  }
}

inline void check_close(const ta3n::ad::Tensor& a, const std::vector<double>& b, double tol) {
  check_close(a.values(), std::span<const double>(b), tol);
}

inline void check_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  check_close(std::span<const double>(a), std::span<const double>(b), tol);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ta3n_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace test
