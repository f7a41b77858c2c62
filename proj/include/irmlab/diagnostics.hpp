#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "irmlab/nn.hpp"

namespace irmlab {

// Post-hoc probes of learned representations: how well the environment can be
// read back out of F(X), and how much the per-environment representation
// distributions overlap.
struct ProbeReport {
  double domain_probe_accuracy = 0.0;        // probe on F(X)
  double domain_probe_accuracy_given_label = 0.0;  // probe on (F(X), Y)
  double overlap_score = 0.0;                // 1 - total variation over bins
  std::map<int, double> per_class_overlap;   // keyed by label value
};

// Held-out-validated linear (logistic) probe predicting the environment from
// representations. Requires exactly two environments, each with at least two
// samples. Accuracy far above the larger environment share flags
// non-overlapping representations.
ProbeReport domain_probe(const Matrix& reps, std::span<const int> envs,
                         std::span<const std::uint8_t> labels,
                         std::uint64_t seed);

struct CiGapCell {
  std::map<int, int> counts;        // env -> occupancy
  std::map<int, double> mean_label; // env -> empirical E[Y | cell, env]
  int total = 0;
};

struct CiGapReport {
  // Occupancy-weighted mean over shared cells of the largest pairwise
  // difference in per-environment label means; absent when no cell is shared.
  std::optional<double> gap;
  double shared_cell_fraction = 0.0;  // fraction of samples in shared cells
  std::vector<CiGapCell> cells;
  std::size_t sample_count = 0;
};

// Bins representations by k-means centroids and compares the conditional
// label means across environments within each bin. Cells occupied by a single
// environment are reported but excluded from the gap.
CiGapReport conditional_independence_gap(const Matrix& reps,
                                         std::span<const std::uint8_t> labels,
                                         std::span<const int> envs, int k = 16,
                                         std::uint64_t seed = 1);

}  // namespace irmlab
