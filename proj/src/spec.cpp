#include "irmlab/spec.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "irmlab/rng.hpp"
#include "json.hpp"

namespace irmlab {

char color_name(Color c) {
  switch (c) {
    case Color::G: return 'G';
    case Color::B: return 'B';
    case Color::R: return 'R';
  }
  return '?';
}

std::optional<Color> color_from_name(char name) {
  switch (name) {
    case 'G': return Color::G;
    case 'B': return Color::B;
    case 'R': return Color::R;
    default: return std::nullopt;
  }
}

std::vector<const EnvironmentSpec*> DatasetSpec::train_envs() const {
  std::vector<const EnvironmentSpec*> out;
  for (const auto& e : environments)
    if (e.role == EnvRole::Train) out.push_back(&e);
  return out;
}

const EnvironmentSpec& DatasetSpec::test_env() const {
  for (const auto& e : environments)
    if (e.role == EnvRole::Test) return e;
  throw std::runtime_error("spec has no test environment");
}

const EnvironmentSpec& DatasetSpec::env_by_id(int env_id) const {
  for (const auto& e : environments)
    if (e.env_id == env_id) return e;
  throw std::runtime_error("unknown env_id " + std::to_string(env_id));
}

double DatasetSpec::train_prior(int env_id) const {
  int i = 0;
  for (const auto& e : environments) {
    if (e.role != EnvRole::Train) continue;
    if (e.env_id == env_id) return env_prior.at(i);
    ++i;
  }
  throw std::runtime_error("env_id " + std::to_string(env_id) +
                           " is not a training environment");
}

std::string DatasetSpec::digest() const {
  const std::string canon = spec_to_config(*this);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(RngStream::fnv1a(canon)));
  return buf;
}

DatasetSpec cmnist_plus(double rho) {
  if (!(rho > 0.5 && rho < 1.0))
    throw std::invalid_argument("cmnist_plus: rho must lie in (0.5, 1), got " +
                                std::to_string(rho));
  const double half = (1.0 - rho) / 2.0;
  DatasetSpec spec;
  spec.environments = {
      {1, EnvRole::Train, 0.9, {{{rho, half, half}, {half, half, rho}}}},
      {2, EnvRole::Train, 0.1, {{{half, rho, half}, {half, half, rho}}}},
      {3, EnvRole::Test, 0.5, {{{0.1, 0.1, 0.8}, {0.4, 0.4, 0.2}}}},
  };
  spec.env_prior = {0.5, 0.5};
  spec.flip_rate = 0.25;
  spec.rho = rho;
  return spec;
}

DatasetSpec cmnist() {
  DatasetSpec spec;
  spec.environments = {
      {1, EnvRole::Train, 0.5, {{{0.9, 0.0, 0.1}, {0.1, 0.0, 0.9}}}},
      {2, EnvRole::Train, 0.5, {{{0.8, 0.0, 0.2}, {0.2, 0.0, 0.8}}}},
      {3, EnvRole::Test, 0.5, {{{0.1, 0.0, 0.9}, {0.9, 0.0, 0.1}}}},
  };
  spec.env_prior = {0.5, 0.5};
  spec.flip_rate = 0.25;
  return spec;
}

DatasetSpec interpolate(const InterpolationParams& params) {
  if (!(params.w_plus >= 0.0 && params.w_plus <= 1.0))
    throw std::invalid_argument("interpolate: w_plus must lie in [0, 1]");
  if (!(params.p_ye >= 0.5 && params.p_ye <= 0.9))
    throw std::invalid_argument("interpolate: p_ye must lie in [0.5, 0.9]");

  const DatasetSpec plus = cmnist_plus(0.9);
  const DatasetSpec base = cmnist();
  const double w = params.w_plus;

  DatasetSpec spec;
  for (int i = 0; i < 2; ++i) {
    EnvironmentSpec env = plus.environments[i];
    env.p_y1 = (env.env_id == 1) ? params.p_ye : 1.0 - params.p_ye;
    for (int row = 0; row < 2; ++row) {
      double sum = 0.0;
      for (int col = 0; col < 3; ++col) {
        double v = w * plus.environments[i].color_table[row][col] +
                   (1.0 - w) * base.environments[i].color_table[row][col];
        env.color_table[row][col] = v;
        sum += v;
      }
      for (int col = 0; col < 3; ++col) env.color_table[row][col] /= sum;
    }
    spec.environments.push_back(env);
  }
  spec.environments.push_back(plus.environments[2]);
  spec.env_prior = {0.5, 0.5};
  spec.flip_rate = 0.25;
  return spec;
}

ValidationReport validate_spec(const DatasetSpec& spec) {
  ValidationReport report;
  auto fail = [&](const std::string& msg) { report.violations.push_back(msg); };

  int n_train = 0;
  int n_test = 0;
  for (const auto& env : spec.environments) {
    (env.role == EnvRole::Train ? n_train : n_test) += 1;
    if (!(env.p_y1 >= 0.0 && env.p_y1 <= 1.0))
      fail("p_y1 out of range in env " + std::to_string(env.env_id));
    for (int row = 0; row < 2; ++row) {
      double sum = 0.0;
      for (int col = 0; col < 3; ++col) {
        double v = env.color_table[row][col];
        if (!(v >= 0.0 && v <= 1.0))
          fail("color probability out of range at (E=" +
               std::to_string(env.env_id) + ", Y=" + (row == 0 ? "1" : "0") +
               ")");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        fail("color row does not sum to 1 at (E=" + std::to_string(env.env_id) +
             ", Y=" + (row == 0 ? "1" : "0") + ")");
    }
  }
  if (n_test != 1) fail("spec must have exactly one test environment");
  if (n_train < 1) fail("spec must have at least one training environment");

  if (spec.env_prior.size() != static_cast<size_t>(n_train)) {
    fail("env_prior size does not match the number of training environments");
  } else {
    double sum = 0.0;
    for (double p : spec.env_prior) {
      if (!(p >= 0.0 && p <= 1.0)) fail("env_prior entry out of range");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) fail("env_prior does not sum to 1");
  }

  if (!(spec.flip_rate >= 0.0 && spec.flip_rate < 0.5))
    fail("flip_rate out of range");
  if (spec.rho && !(*spec.rho > 0.0 && *spec.rho < 1.0))
    fail("recorded rho out of range");
  return report;
}

std::string spec_to_config(const DatasetSpec& spec) {
  nlohmann::json root;
  auto& envs = root["environments"] = nlohmann::json::array();
  for (const auto& env : spec.environments) {
    nlohmann::json e;
    e["env_id"] = env.env_id;
    e["role"] = env.role == EnvRole::Train ? "train" : "test";
    e["p_y1"] = env.p_y1;
    e["color_table"] = {env.color_table[0], env.color_table[1]};
    envs.push_back(e);
  }
  root["env_prior"] = spec.env_prior;
  root["flip_rate"] = spec.flip_rate;
  if (spec.rho) root["rho"] = *spec.rho;
  return root.dump(2) + "\n";
}

DatasetSpec spec_from_config(const std::string& text) {
  nlohmann::json root = nlohmann::json::parse(text);
  DatasetSpec spec;
  for (const auto& e : root.at("environments")) {
    EnvironmentSpec env;
    env.env_id = e.at("env_id").get<int>();
    const std::string role = e.at("role").get<std::string>();
    if (role == "train")
      env.role = EnvRole::Train;
    else if (role == "test")
      env.role = EnvRole::Test;
    else
      throw std::invalid_argument("unknown environment role: " + role);
    env.p_y1 = e.at("p_y1").get<double>();
    const auto& table = e.at("color_table");
    if (table.size() != 2 || table[0].size() != 3 || table[1].size() != 3)
      throw std::invalid_argument("color_table must be 2x3");
    for (int row = 0; row < 2; ++row)
      for (int col = 0; col < 3; ++col)
        env.color_table[row][col] = table[row][col].get<double>();
    spec.environments.push_back(env);
  }
  spec.env_prior = root.at("env_prior").get<std::vector<double>>();
  spec.flip_rate = root.at("flip_rate").get<double>();
  if (root.contains("rho")) spec.rho = root.at("rho").get<double>();
  return spec;
}

}  // namespace irmlab
