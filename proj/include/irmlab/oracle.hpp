#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "irmlab/spec.hpp"

namespace irmlab {

// The four feature families whose deterministic majority-class classifiers
// have closed-form accuracies under a DatasetSpec.
enum class FeatureFamily : int { Color = 0, PredictedDomain, DomainAndColor, Shape };

inline constexpr std::array<FeatureFamily, 4> kFamilies{
    FeatureFamily::Color, FeatureFamily::PredictedDomain,
    FeatureFamily::DomainAndColor, FeatureFamily::Shape};

std::string family_name(FeatureFamily family);

// Conditioning key for a posterior entry. env_id is -1 for color-only tables.
struct PosteriorKey {
  Color color = Color::G;
  int env_id = -1;
  auto operator<=>(const PosteriorKey&) const = default;
};

// A table of posteriors of the positive outcome (Y=1, or E = the first
// training environment) per conditioning cell. Cells whose conditioning event
// has zero probability are listed in `undefined` instead of `entries`.
struct PosteriorTable {
  enum class Kind { YGivenC, EGivenC, YGivenCE };
  Kind kind = Kind::YGivenC;
  std::map<PosteriorKey, double> entries;
  std::vector<PosteriorKey> undefined;

  bool defined(PosteriorKey key) const { return entries.count(key) != 0; }
  double at(PosteriorKey key) const;
};

// P(Y=1|C=c) over the training mixture. With `balanced`, P(Y|E) is replaced
// by 1/2 everywhere before computing.
PosteriorTable posterior_y_given_c(const DatasetSpec& spec, bool balanced = false);

// P(E=e1|C=c) where e1 is the first training environment.
PosteriorTable posterior_e_given_c(const DatasetSpec& spec, bool balanced = false);

// P(Y=1|C=c, E=e) per training environment.
PosteriorTable posterior_y_given_ce(const DatasetSpec& spec, bool balanced = false);

// A deterministic decision rule over the feature domain of one family.
// Color-based families decide per color; Shape is the identity on the
// invariant channel. Cells whose posterior is exactly 1/2 sit in tie_cells;
// their decision entry is label 1 but expected-accuracy sums score them 1/2.
struct DeterministicClassifier {
  FeatureFamily family = FeatureFamily::Color;
  bool balanced = false;
  std::map<Color, int> decision_map;       // color -> predicted label
  std::map<Color, int> domain_map;         // color -> predicted env (two-stage families)
  std::set<Color> tie_cells;
  // Decisions used for the validation-split measure when they differ from
  // decision_map (DomainAndColor only; see build_classifier).
  std::optional<std::map<Color, int>> val_decision_map;
  std::set<Color> val_tie_cells;

  const std::map<Color, int>& decisions(bool validation_split) const {
    return validation_split && val_decision_map ? *val_decision_map : decision_map;
  }
  const std::set<Color>& ties(bool validation_split) const {
    return validation_split && val_decision_map ? val_tie_cells : tie_cells;
  }
};

DeterministicClassifier build_classifier(FeatureFamily family,
                                         const DatasetSpec& spec,
                                         bool balanced = false);

enum class EvalSplit { Validation, Test };

// Exact expected accuracy of the classifier under the spec's joint
// distribution; Validation uses the training environments and env_prior,
// Test uses the test environment. The balanced flag of the classifier also
// balances the evaluation measure.
double classifier_accuracy(const DeterministicClassifier& clf,
                           const DatasetSpec& spec, EvalSplit split);

struct OracleReport {
  std::string spec_digest;
  bool balanced = false;
  PosteriorTable y_given_c;
  PosteriorTable e_given_c;
  PosteriorTable y_given_ce;
  struct Accuracy {
    double validation = 0.0;
    double test = 0.0;
  };
  std::map<FeatureFamily, Accuracy> accuracies;
  FeatureFamily winner = FeatureFamily::Shape;
  std::set<FeatureFamily> winner_ties;  // the full argmax set (singleton if unique)
};

// Posteriors, all four family accuracies, and the winner by validation
// accuracy with exact ties listed.
OracleReport full_report(const DatasetSpec& spec, bool balanced = false);

// Validation accuracy of the DomainAndColor family when its test-time
// decision map is used for the validation measure as well (the single-map
// reading); exposed so both readings of the published table stay auditable.
double domain_and_color_single_map_val_accuracy(const DatasetSpec& spec,
                                                bool balanced = false);

// CSV rows (rho, balanced, family, val_acc, test_acc, winner_flag) for one
// report; `header` emits the column line.
std::string report_csv_header();
std::string report_csv_rows(const OracleReport& report,
                            const std::string& rho_label);

// Human-readable accuracy grid over a rho list, both balancing modes.
std::string render_accuracy_table(const std::vector<double>& rhos);

}  // namespace irmlab
