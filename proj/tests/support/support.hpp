#pragma once

#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>

#include "deforcge/error.hpp"

namespace testing {

inline std::filesystem::path data_dir() { return DEFORCGE_DATA_DIR; }

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("deforcge_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
};

// Code of the deforcge::Error thrown by fn; fails the test if none is thrown.
inline deforcge::ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const deforcge::Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return deforcge::ErrorCode::IoError;
}

}  // namespace testing
