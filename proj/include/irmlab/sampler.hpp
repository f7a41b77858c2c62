#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "irmlab/spec.hpp"

namespace irmlab {

enum class Split : std::uint8_t { Train, Val, Test };

// How instances are turned into feature vectors: a one-hot color block
// followed by the shape channel. The exact encoding sets s = y_star; the
// noisy one adds gaussian noise of the given sigma.
struct EncodingConfig {
  enum class ShapeKind { Exact, Noisy } shape = ShapeKind::Exact;
  double noise_sigma = 0.0;
  static constexpr int kFeatureWidth = 4;  // 3 color + 1 shape
};

struct Instance {
  std::uint8_t y_star = 0;  // noiseless label
  std::uint8_t y = 0;       // observed label
  int env_id = 0;
  Color c = Color::G;
  double s = 0.0;  // invariant shape channel
  Split split = Split::Train;
  std::array<double, EncodingConfig::kFeatureWidth> features{};
};

struct Dataset {
  struct EnvData {
    int env_id = 0;
    bool is_test = false;
    std::vector<Instance> instances;
  };
  std::vector<EnvData> envs;
  std::string spec_digest;
  std::uint64_t seed = 0;
  EncodingConfig encoding;
  std::vector<std::string> warnings;

  EnvData& env(int env_id);
  const EnvData& env(int env_id) const;
  std::size_t total_instances() const;
};

// Draws n_per_env instances for every environment of the spec: observed label
// from P(Y|E), noiseless label by flipping back at flip_rate, color from
// P(C|Y,E), shape from the noiseless label. Deterministic in (spec, n, seed,
// enc); empty (Y,E) cells produce warnings, not errors. Train-environment
// instances start in the Train split; test-environment ones are Test.
Dataset sample_dataset(const DatasetSpec& spec, int n_per_env,
                       std::uint64_t seed,
                       const EncodingConfig& enc = EncodingConfig{});

// Reassigns Train/Val within each training environment, uniformly at random
// with the given ratio of Train; ratio must lie strictly inside (0,1).
Dataset split_train_val(Dataset ds, double ratio, std::uint64_t seed);

// Duplicates minority-class Train instances (with replacement) within each
// training environment until the two class counts are equal. Val and Test are
// untouched; a class missing from some training environment is an error.
Dataset balance_labels(Dataset ds, std::uint64_t seed);

struct EmpiricalTables {
  std::map<int, double> p_env;  // over training environments
  std::map<int, double> p_y1_given_env;
  // rows y=1,0; cols G,B,R; per env
  std::map<int, std::array<std::array<double, 3>, 2>> color_given_label_env;
  std::vector<std::string> empty_cells;
};

// Frequency estimates of P(E), P(Y|E) and P(C|Y,E) over all instances of the
// dataset (every split).
EmpiricalTables empirical_distributions(const Dataset& ds);

// A DatasetSpec whose tables are the empirical estimates, for feeding the
// sampled data back through the exact analysis.
DatasetSpec empirical_spec(const Dataset& ds, const DatasetSpec& reference);

// Columnar CSV (y_star,y,e,c,s,split,feature_0..feature_3) plus a JSON
// manifest with the spec digest, seed and encoding.
void write_dataset_csv(const Dataset& ds, const std::string& csv_path,
                       const std::string& manifest_path);
Dataset read_dataset_csv(const std::string& csv_path,
                         const std::string& manifest_path);

}  // namespace irmlab
