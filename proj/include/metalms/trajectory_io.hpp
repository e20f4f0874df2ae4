#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metalms/simulate.hpp"

namespace metalms {

// Header `t,x_0..x_{p-1},y` plus `beta_*,w` (and `eps` once attached) when
// the trajectory carries hidden truth.
void write_trajectory_csv(const std::string& path, const Trajectory& traj, bool include_truth = true);
Trajectory read_trajectory_csv(const std::string& path);

struct DatasetManifest {
  std::string spec_id;
  std::string spec_file;  // relative to the manifest directory
  std::uint64_t seed = 0;
  int N1 = 0;
  long T = 0;
  std::vector<std::string> files;
  std::vector<std::uint64_t> seeds;
};

void write_manifest(const std::string& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::string& path);

// Writes one CSV per trajectory and `manifest.ini` into `dir`.
DatasetManifest write_dataset(const std::string& dir, const MultiTrajectoryDataset& ds,
                              const std::string& spec_file, bool include_truth = true);

}  // namespace metalms
