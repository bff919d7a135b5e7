#pragma once

// Shared helpers for the test binaries: seeded generators and small
// builders for records.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "cropyield/domain.hpp"
#include "cropyield/features.hpp"

namespace testsupport {

using Gen = std::mt19937_64;

inline double uniform(Gen& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}
inline int uniform_int(Gen& g, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); }

inline cropyield::Date date(int y, unsigned m, unsigned d) {
  return cropyield::Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

inline cropyield::WeatherDaily day(cropyield::Date d, double tmin, double tmax, double precip = 0,
                                   double solar = 5, double humidity = 80, std::string zone = "Z1") {
  return {std::move(zone), d, tmin, tmax, precip, solar, humidity};
}

/// Random daily record with tmin <= tmax.
inline cropyield::WeatherDaily random_day(Gen& g, cropyield::Date d) {
  const double a = uniform(g, -15, 30), b = uniform(g, -15, 30);
  return day(d, std::min(a, b), std::max(a, b), uniform(g, 0, 1) < 0.5 ? 0.0 : uniform(g, 0, 40),
             uniform(g, 0, 30), uniform(g, 20, 100));
}

/// Row-major matrix of rows x cols with values drawn from a few levels so
/// ties are common.
struct RandomData {
  std::size_t rows = 0, cols = 0;
  std::vector<double> x;
  std::vector<double> y;
  cropyield::MatrixView view() const { return {x, rows, cols}; }
};

inline RandomData random_data(Gen& g, std::size_t rows, std::size_t cols, int levels = 6) {
  RandomData d;
  d.rows = rows;
  d.cols = cols;
  for (std::size_t i = 0; i < rows * cols; ++i) d.x.push_back(uniform_int(g, 0, levels - 1) * 0.5 - 1.0);
  for (std::size_t i = 0; i < rows; ++i) d.y.push_back(uniform(g, -3, 3) + (d.x[i * cols] > 0 ? 2.0 : 0.0));
  return d;
}

inline cropyield::DesignMatrix to_matrix(const RandomData& d) {
  cropyield::DesignMatrix m;
  for (std::size_t j = 0; j < d.cols; ++j) m.column_names.push_back("f" + std::to_string(j));
  m.rows = d.rows;
  m.values = d.x;
  m.target = d.y;
  for (std::size_t i = 0; i < d.rows; ++i) m.meta.push_back({"Z" + std::to_string(i), 2013});
  return m;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("cropyield_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testsupport
