#include "irmlab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "irmlab/rng.hpp"
#include "json.hpp"

namespace irmlab {

Dataset::EnvData& Dataset::env(int env_id) {
  for (auto& e : envs)
    if (e.env_id == env_id) return e;
  throw std::runtime_error("dataset has no environment " + std::to_string(env_id));
}

const Dataset::EnvData& Dataset::env(int env_id) const {
  for (const auto& e : envs)
    if (e.env_id == env_id) return e;
  throw std::runtime_error("dataset has no environment " + std::to_string(env_id));
}

std::size_t Dataset::total_instances() const {
  std::size_t n = 0;
  for (const auto& e : envs) n += e.instances.size();
  return n;
}

namespace {

void encode(Instance& inst) {
  inst.features = {0.0, 0.0, 0.0, inst.s};
  inst.features[static_cast<int>(inst.c)] = 1.0;
}

}  // namespace

Dataset sample_dataset(const DatasetSpec& spec, int n_per_env,
                       std::uint64_t seed, const EncodingConfig& enc) {
  if (n_per_env < 0) throw std::invalid_argument("n_per_env must be >= 0");
  ValidationReport check = validate_spec(spec);
  if (!check.ok())
    throw std::invalid_argument("sample_dataset: invalid spec: " +
                                check.violations.front());

  Dataset ds;
  ds.spec_digest = spec.digest();
  ds.seed = seed;
  ds.encoding = enc;

  for (const auto& env : spec.environments) {
    Dataset::EnvData data;
    data.env_id = env.env_id;
    data.is_test = env.role == EnvRole::Test;
    data.instances.reserve(n_per_env);

    RngStream labels(seed, "labels", env.env_id);
    RngStream flips(seed, "flips", env.env_id);
    RngStream colors(seed, "colors", env.env_id);
    RngStream shape_noise(seed, "shape_noise", env.env_id);

    std::array<int, 2> label_counts{};

    for (int i = 0; i < n_per_env; ++i) {
      Instance inst;
      inst.env_id = env.env_id;
      // Observed label from P(Y|E); the noiseless label differs from it with
      // probability flip_rate (the flip is symmetric under a balanced Y*
      // prior, so this reproduces the flip-then-assign recipe exactly).
      inst.y = labels.bernoulli(env.p_y1) ? 1 : 0;
      inst.y_star = flips.bernoulli(spec.flip_rate) ? (1 - inst.y) : inst.y;
      inst.c = kColors[colors.discrete(env.color_table[inst.y == 1 ? 0 : 1])];
      inst.s = static_cast<double>(inst.y_star);
      if (enc.shape == EncodingConfig::ShapeKind::Noisy)
        inst.s += shape_noise.gaussian(enc.noise_sigma);
      inst.split = data.is_test ? Split::Test : Split::Train;
      encode(inst);
      label_counts[inst.y] += 1;
      data.instances.push_back(inst);
    }
    if (n_per_env > 0) {
      for (int y : {0, 1}) {
        if (label_counts[y] == 0)
          ds.warnings.push_back("environment " + std::to_string(env.env_id) +
                                " sampled no instances with Y=" +
                                std::to_string(y));
      }
    }
    ds.envs.push_back(std::move(data));
  }
  return ds;
}

Dataset split_train_val(Dataset ds, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw std::invalid_argument("split ratio must lie strictly inside (0,1)");
  for (auto& env : ds.envs) {
    if (env.is_test) continue;
    const std::size_t n = env.instances.size();
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    RngStream splits(seed, "splits", env.env_id);
    for (std::size_t i = n; i > 1; --i) {
      std::uint32_t j = splits.uniform_int(static_cast<std::uint32_t>(i));
      std::swap(order[i - 1], order[j]);
    }
    const std::size_t n_train =
        static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
    for (std::size_t i = 0; i < n; ++i)
      env.instances[order[i]].split = i < n_train ? Split::Train : Split::Val;
  }
  return ds;
}

Dataset balance_labels(Dataset ds, std::uint64_t seed) {
  for (auto& env : ds.envs) {
    if (env.is_test) continue;
    std::array<std::vector<std::uint32_t>, 2> by_label;
    for (std::uint32_t i = 0; i < env.instances.size(); ++i) {
      const Instance& inst = env.instances[i];
      if (inst.split == Split::Train) by_label[inst.y].push_back(i);
    }
    if (by_label[0].empty() || by_label[1].empty())
      throw std::runtime_error(
          "balance_labels: environment " + std::to_string(env.env_id) +
          " is missing a class in its training split");
    const int minority = by_label[0].size() < by_label[1].size() ? 0 : 1;
    const std::size_t deficit =
        by_label[1 - minority].size() - by_label[minority].size();
    if (deficit == 0) continue;  // already balanced; draws nothing
    RngStream balancing(seed, "balancing", env.env_id);
    for (std::size_t k = 0; k < deficit; ++k) {
      std::uint32_t pick = by_label[minority][balancing.uniform_int(
          static_cast<std::uint32_t>(by_label[minority].size()))];
      env.instances.push_back(env.instances[pick]);
    }
  }
  return ds;
}

EmpiricalTables empirical_distributions(const Dataset& ds) {
  if (ds.total_instances() == 0)
    throw std::invalid_argument("empirical_distributions: empty dataset");
  EmpiricalTables tables;

  std::size_t n_train_total = 0;
  for (const auto& env : ds.envs)
    if (!env.is_test) n_train_total += env.instances.size();

  for (const auto& env : ds.envs) {
    std::array<std::array<long, 3>, 2> color_counts{};
    std::array<long, 2> label_counts{};
    for (const Instance& inst : env.instances) {
      label_counts[inst.y] += 1;
      color_counts[inst.y == 1 ? 0 : 1][static_cast<int>(inst.c)] += 1;
    }
    const long n = static_cast<long>(env.instances.size());
    if (!env.is_test && n_train_total > 0)
      tables.p_env[env.env_id] =
          static_cast<double>(n) / static_cast<double>(n_train_total);
    if (n > 0)
      tables.p_y1_given_env[env.env_id] =
          static_cast<double>(label_counts[1]) / static_cast<double>(n);

    std::array<std::array<double, 3>, 2> freq{};
    for (int row = 0; row < 2; ++row) {
      const long row_total = label_counts[row == 0 ? 1 : 0];
      if (row_total == 0) {
        tables.empty_cells.push_back("(E=" + std::to_string(env.env_id) +
                                     ", Y=" + (row == 0 ? "1" : "0") + ")");
        continue;
      }
      for (int col = 0; col < 3; ++col)
        freq[row][col] = static_cast<double>(color_counts[row][col]) /
                         static_cast<double>(row_total);
    }
    tables.color_given_label_env[env.env_id] = freq;
  }
  return tables;
}

DatasetSpec empirical_spec(const Dataset& ds, const DatasetSpec& reference) {
  EmpiricalTables tables = empirical_distributions(ds);
  DatasetSpec spec = reference;
  spec.env_prior.clear();
  for (auto& env : spec.environments) {
    if (tables.p_y1_given_env.count(env.env_id))
      env.p_y1 = tables.p_y1_given_env.at(env.env_id);
    if (tables.color_given_label_env.count(env.env_id))
      env.color_table = tables.color_given_label_env.at(env.env_id);
    if (env.role == EnvRole::Train)
      spec.env_prior.push_back(tables.p_env.at(env.env_id));
  }
  return spec;
}

void write_dataset_csv(const Dataset& ds, const std::string& csv_path,
                       const std::string& manifest_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot open " + csv_path);
  csv << "y_star,y,e,c,s,split,feature_0,feature_1,feature_2,feature_3\n";
  char buf[256];
  for (const auto& env : ds.envs) {
    for (const Instance& inst : env.instances) {
      const char* split = inst.split == Split::Train  ? "train"
                          : inst.split == Split::Val ? "val"
                                                     : "test";
      std::snprintf(buf, sizeof(buf), "%d,%d,%d,%c,%.9g,%s,%.9g,%.9g,%.9g,%.9g\n",
                    int(inst.y_star), int(inst.y), inst.env_id,
                    color_name(inst.c), inst.s, split, inst.features[0],
                    inst.features[1], inst.features[2], inst.features[3]);
      csv << buf;
    }
  }

  nlohmann::json manifest;
  manifest["spec_digest"] = ds.spec_digest;
  manifest["seed"] = ds.seed;
  manifest["encoding"] = {
      {"shape", ds.encoding.shape == EncodingConfig::ShapeKind::Exact ? "exact"
                                                                      : "noisy"},
      {"noise_sigma", ds.encoding.noise_sigma}};
  nlohmann::json env_ids = nlohmann::json::array();
  for (const auto& env : ds.envs)
    env_ids.push_back({{"env_id", env.env_id}, {"is_test", env.is_test}});
  manifest["environments"] = env_ids;
  std::ofstream mf(manifest_path);
  if (!mf) throw std::runtime_error("cannot open " + manifest_path);
  mf << manifest.dump(2) << "\n";
}

Dataset read_dataset_csv(const std::string& csv_path,
                         const std::string& manifest_path) {
  std::ifstream mf(manifest_path);
  if (!mf) throw std::runtime_error("cannot open " + manifest_path);
  nlohmann::json manifest = nlohmann::json::parse(mf);

  Dataset ds;
  ds.spec_digest = manifest.at("spec_digest").get<std::string>();
  ds.seed = manifest.at("seed").get<std::uint64_t>();
  ds.encoding.shape =
      manifest.at("encoding").at("shape").get<std::string>() == "exact"
          ? EncodingConfig::ShapeKind::Exact
          : EncodingConfig::ShapeKind::Noisy;
  ds.encoding.noise_sigma =
      manifest.at("encoding").at("noise_sigma").get<double>();
  for (const auto& e : manifest.at("environments")) {
    Dataset::EnvData env;
    env.env_id = e.at("env_id").get<int>();
    env.is_test = e.at("is_test").get<bool>();
    ds.envs.push_back(env);
  }

  std::ifstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot open " + csv_path);
  std::string line;
  std::getline(csv, line);  // header
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    Instance inst;
    char color_ch = 'G';
    char split_buf[16] = {0};
    int y_star = 0, y = 0, env_id = 0;
    double f0, f1, f2, f3;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%c,%lg,%15[^,],%lg,%lg,%lg,%lg",
                    &y_star, &y, &env_id, &color_ch, &inst.s, split_buf, &f0,
                    &f1, &f2, &f3) != 10)
      throw std::runtime_error("malformed dataset row: " + line);
    inst.y_star = static_cast<std::uint8_t>(y_star);
    inst.y = static_cast<std::uint8_t>(y);
    inst.env_id = env_id;
    auto c = color_from_name(color_ch);
    if (!c) throw std::runtime_error("unknown color symbol in row: " + line);
    inst.c = *c;
    const std::string split(split_buf);
    inst.split = split == "train" ? Split::Train
                 : split == "val" ? Split::Val
                                  : Split::Test;
    inst.features = {f0, f1, f2, f3};
    ds.env(env_id).instances.push_back(inst);
  }
  return ds;
}

}  // namespace irmlab
