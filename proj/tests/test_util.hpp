#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "goursat2d/grid.hpp"
#include "goursat2d/problem.hpp"

namespace testutil {

inline std::string problem_path(const std::string& name) {
  return std::string(GOURSAT2D_PROBLEMS_DIR) + "/" + name + ".json";
}

inline goursat2d::GridField field(const goursat2d::Grid& grid, double (*fn)(double, double)) {
  return goursat2d::GridField::sample(grid, 1, [&](double x, double y, std::span<double> out) { out[0] = fn(x, y); });
}

inline double max_diff(const goursat2d::GridField& a, const goursat2d::GridField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k) m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
  return m;
}

// A scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("goursat2d_" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
