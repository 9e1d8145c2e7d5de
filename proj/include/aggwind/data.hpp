#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aggwind/gmm.hpp"
#include "aggwind/graph.hpp"

namespace aggwind {

inline constexpr int kTrainDays = 30;
inline constexpr int kTestDays = 100;

/// Generating mixture over (AWO error, FWO error) aggregates.
struct GroundTruth {
  GmmParams gmm;
  int samples_per_day = 96;
  std::uint64_t seed = 42;

  /// Three anisotropic components with well separated means.
  static GroundTruth builtin(std::uint64_t seed);
};

/// Training days [0, 30) and testing days [30, 130).
struct DatasetWindow {
  Samples train;
  Samples test;
  int samples_per_day = 96;
};

struct LocalDataset {
  NodeId owner;
  Samples samples;
};

enum class Partitioning {
  kRoundRobin,  ///< sample i goes to farm (i mod N) + 1
  kSorted,      ///< contiguous blocks of the training set sorted by AWO error
};

struct GeneratedData {
  DatasetWindow window;
  std::vector<LocalDataset> local;
};

/// Draws `count` i.i.d. points from `gmm`.
Samples draw_samples(const GmmParams& gmm, Eigen::Index count, std::uint64_t seed);

GeneratedData generate(const GroundTruth& truth, int farm_count,
                       Partitioning partitioning = Partitioning::kRoundRobin);

std::vector<LocalDataset> partition(const Samples& train, int farm_count, Partitioning partitioning);

/// Concatenation of the local datasets in owner order.
Samples pool(const std::vector<LocalDataset>& local);

std::string window_to_csv(const DatasetWindow& window);
DatasetWindow parse_window_csv(const std::string& text);
void save_csv(const DatasetWindow& window, const std::string& path);
DatasetWindow load_csv(const std::string& path);

}  // namespace aggwind
