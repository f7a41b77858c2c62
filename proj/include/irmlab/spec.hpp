#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace irmlab {

// The three color symbols. The ordering G < B < R is fixed and is the column
// order of every color table in this project.
enum class Color : int { G = 0, B = 1, R = 2 };

inline constexpr std::array<Color, 3> kColors{Color::G, Color::B, Color::R};

char color_name(Color c);
std::optional<Color> color_from_name(char name);

enum class EnvRole { Train, Test };

// One environment of the discrete causal model: a class prior P(Y=1|E) and a
// 2x3 table P(C|Y,E) with rows indexed by y=1 then y=0, columns by G,B,R.
struct EnvironmentSpec {
  int env_id = 1;
  EnvRole role = EnvRole::Train;
  double p_y1 = 0.5;
  std::array<std::array<double, 3>, 2> color_table{};

  double p_color(int y, Color c) const {
    return color_table[y == 1 ? 0 : 1][static_cast<int>(c)];
  }
  double p_label(int y) const { return y == 1 ? p_y1 : 1.0 - p_y1; }
};

// A full dataset specification: environments, the prior over training
// environments, the label flip rate, and (when the spec comes from the
// one-parameter family) the spuriousness parameter rho.
struct DatasetSpec {
  std::vector<EnvironmentSpec> environments;
  std::vector<double> env_prior;  // over training environments, in order
  double flip_rate = 0.25;
  std::optional<double> rho;

  std::vector<const EnvironmentSpec*> train_envs() const;
  const EnvironmentSpec& test_env() const;
  const EnvironmentSpec& env_by_id(int env_id) const;
  double train_prior(int env_id) const;

  // Stable identifier: FNV-1a over the canonical config serialization.
  std::string digest() const;
};

struct InterpolationParams {
  double w_plus = 0.0;  // weight of the strong-spuriousness endpoint, in [0,1]
  double p_ye = 0.5;    // sets P(Y=1|E=1) = P(Y=0|E=2), in [0.5, 0.9]
};

// Strong-triangle-spuriousness family. Two training environments whose color
// tables are mirrored functions of rho plus a fixed test environment; spurious
// correlations grow with rho in (0.5, 1).
DatasetSpec cmnist_plus(double rho);

// The classic two-color benchmark expressed in the same three-symbol layout
// (the B column carries zero mass everywhere).
DatasetSpec cmnist();

// Per-cell convex mix of the cmnist_plus(0.9) and cmnist() color tables with
// weight w_plus on the former, rows renormalized; class priors from p_ye. The
// test environment is the cmnist_plus one.
DatasetSpec interpolate(const InterpolationParams& params);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Report-style check of every structural invariant: row sums, prior sum,
// range checks, exactly one test environment.
ValidationReport validate_spec(const DatasetSpec& spec);

// Config file round-trip (JSON text, nested tables keyed by the canonical
// field names).
std::string spec_to_config(const DatasetSpec& spec);
DatasetSpec spec_from_config(const std::string& text);

}  // namespace irmlab
