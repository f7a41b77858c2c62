#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "irmlab/cdm.hpp"
#include "irmlab/nn.hpp"
#include "irmlab/penalty.hpp"
#include "irmlab/sampler.hpp"

namespace irmlab {

enum class Method { ERM, IRM, IRMBAL, MMD, ACDM, IRM_MMD, IRM_ACDM };

std::string method_name(Method method);
std::optional<Method> method_from_name(const std::string& name);

bool method_uses_irm(Method method);
bool method_uses_mmd(Method method);
bool method_uses_acdm(Method method);

struct TrainConfig {
  Method method = Method::ERM;
  LossKind loss_kind = LossKind::MSE;
  double alpha = 0.0;  // IRM penalty weight
  double beta = 0.0;   // CDM penalty weight
  int k_irm = 0;       // iteration at which the IRM penalty activates
  int d_steps = 10;    // discriminator updates per iteration
  double lr = 0.1;
  double momentum = 0.0;
  int iterations = 501;
  int batch_size = 512;  // per environment
  std::uint64_t seed = 1;
  int runs = 10;
  PenaltyGranularity granularity = PenaltyGranularity::PerBatch;
  int checkpoint_every = 10;
  bool val_loss_includes_penalty = false;
  bool cdm_normalized_pairs = false;
  int mmd_group_cap = 128;  // per-group sample cap inside the MMD term; 0 = none
  std::vector<int> hidden = {16, 16};
  int disc_hidden = 16;
  double disc_lr = 0.1;
  // Rescale each step's gradient by 1/max(1, alpha_t, beta) so large penalty
  // weights anneal the step instead of blowing it up.
  bool rescale_large_penalty_weights = true;
  double grad_clip_norm = 10.0;  // global norm cap per step; 0 disables
  bool keep_iteration_log = true;
};

struct IterRow {
  int iteration = 0;
  int env_id = 0;
  double risk = 0.0;
  double irm_penalty = 0.0;
  double cdm_penalty = 0.0;
  bool has_val_loss = false;
  double val_loss = 0.0;
};

struct Checkpoint {
  int iteration = 0;
  double val_loss = 0.0;
};

struct RunResult {
  std::vector<IterRow> log;
  std::vector<Checkpoint> checkpoints;
  int selected_iteration = -1;
  double selected_val_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  double test_acc = 0.0;
  std::uint64_t seed = 0;
  long model_updates = 0;
  long disc_updates = 0;
  bool failed = false;
  std::string failure;
};

// Lowest validation loss, ties broken by the earliest iteration.
const Checkpoint& select_model(std::span<const Checkpoint> checkpoints);

// Forward pass of the trained model on encoded features: representation rows
// and squashed outputs (sigmoid for BCE, raw for MSE).
struct ModelEval {
  Matrix representation;
  std::vector<double> outputs;
};
ModelEval model_forward(const Mlp& model, const Matrix& x, LossKind kind);

// Fixed batches plus everything needed to evaluate one training step's total
// loss as a pure function of the model (and discriminator) parameters. The
// kernel and gamma weights are constants of the step.
struct StepBatches {
  std::vector<int> env_ids;
  std::vector<Matrix> x;
  std::vector<std::vector<std::uint8_t>> y;
};

struct ComposedLossSpec {
  LossKind kind = LossKind::MSE;
  double alpha = 0.0;
  double beta = 0.0;
  PenaltyGranularity granularity = PenaltyGranularity::PerBatch;
  bool use_mmd = false;
  bool use_acdm = false;
  KernelSpec kernel;
  GammaWeights gamma;
  bool normalized_pairs = false;
  int group_cap = 0;

  struct EnvTerms {
    double risk = 0.0;
    double irm_penalty = 0.0;
  };
};

// sum_e [risk_e + alpha * penalty_e] + beta * (CDM term); fills per-env terms
// and the CDM value when requested, and accumulates d(total)/d(model params)
// into model_grad when given.
double composed_loss(const Mlp& model, const Discriminator* disc,
                     const StepBatches& batches, const ComposedLossSpec& spec,
                     std::vector<double>* model_grad = nullptr,
                     std::vector<ComposedLossSpec::EnvTerms>* env_terms = nullptr,
                     double* cdm_value = nullptr);

// The quantity the discriminator ascends (the class-conditioned environment
// log-likelihood under gamma weighting), as a function of its parameters with
// the model frozen; accumulates its gradient when given.
double discriminator_objective(const Mlp& model, const Discriminator& disc,
                               const StepBatches& batches,
                               const ComposedLossSpec& spec,
                               std::vector<double>* disc_grad = nullptr);

RunResult train_run(const Dataset& ds, const TrainConfig& cfg);

struct HyperGrid {
  std::vector<double> alpha_grid = {1e0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8};
  std::vector<double> beta_grid = {1e0, 1e1, 1e2, 1e3, 1e4, 1e5};
  std::vector<int> k_irm_grid = {200, 400, 600};
};

struct GridPointResult {
  double alpha = 0.0;
  double beta = 0.0;
  int k_irm = 0;
  double mean_val_loss = 0.0;
  double mean_val_acc = 0.0;
  double mean_test_acc = 0.0;
  double std_test_acc = 0.0;
  int failed_runs = 0;
  std::vector<RunResult> runs;
};

struct GridSearchResult {
  GridPointResult best;
  std::vector<GridPointResult> points;
};

// One dataset per seed; every grid point is trained on all of them and points
// are ranked by mean selected validation loss (test accuracy never enters the
// ranking). Grid dimensions that the method does not use collapse to a single
// point. Runs are sharded over n_jobs threads; results are deterministic.
GridSearchResult grid_search(std::span<const Dataset> datasets, Method method,
                             const HyperGrid& grid, const TrainConfig& base,
                             int n_jobs = 1);

}  // namespace irmlab
