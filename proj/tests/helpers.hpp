#pragma once

#include <filesystem>
#include <string>

#include "cosafed/data.hpp"
#include "cosafed/rng.hpp"

namespace cosafed::testing {

/// Small deterministic dataset: per-class gaussian blobs squashed into
/// [0, 1], linearly separable enough for a few SGD rounds to learn.
inline Dataset make_synthetic(std::size_t n, int rows, int cols, int n_classes,
                              std::uint64_t seed) {
  Dataset ds;
  ds.rows = rows;
  ds.cols = cols;
  ds.source = "synthetic";
  const int f = rows * cols;
  ds.features.resize(n * static_cast<std::size_t>(f));
  ds.labels.resize(n);
  auto rng = make_stream(seed, /*purpose=*/0xBEEF);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(uniform_below(rng, n_classes));
    ds.labels[i] = static_cast<std::uint8_t>(label);
    for (int j = 0; j < f; ++j) {
      const double center = (j % n_classes == label) ? 0.8 : 0.2;
      double v = center + 0.1 * normal_unit(rng);
      if (v < 0.0) v = 0.0;
      if (v > 1.0) v = 1.0;
      ds.features[i * f + j] = static_cast<float>(v);
    }
  }
  return ds;
}

inline std::string temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "cosafed_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

inline const char* mnist_dir() {
  const char* env = std::getenv("COSAFED_DATA_DIR");
  return env ? env : "data/mnist";
}

}  // namespace cosafed::testing
