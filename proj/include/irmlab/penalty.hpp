#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace irmlab {

enum class LossKind { BCE, MSE };

// One environment's model outputs and labels. For BCE the outputs are
// probabilities (the model's squashed output); for MSE they are raw scalars.
struct EnvBatch {
  std::vector<double> outputs;
  std::vector<std::uint8_t> labels;
  int env_id = 0;
};

// Whether the dummy-classifier gradient is taken of the mean environment risk
// (one squared norm per environment) or per instance and then averaged.
enum class PenaltyGranularity { PerBatch, PerInstance };

inline constexpr double kBceEps = 1e-7;

// Count of BCE evaluations that hit the [eps, 1-eps] clamp since the last
// reset; saturated terms contribute zero dummy-gradient.
std::uint64_t bce_clamp_events();
void reset_bce_clamp_events();

// Mean per-instance loss. BCE = -[y log p + (1-y) log(1-p)] with p clamped;
// MSE = (p - y)^2. Throws on an empty batch.
double risk(const EnvBatch& batch, LossKind kind);

// d(risk)/d(output_i), same length as the batch.
std::vector<double> risk_grad(const EnvBatch& batch, LossKind kind);

// Squared norm of the gradient of the environment risk with respect to the
// fixed dummy multiplier w at w=1. MSE per-instance gradient is 2(wF-y)F;
// BCE is -y/w + (1-y)F/(1-wF) on unclamped terms and 0 on saturated ones.
double irm_penalty(const EnvBatch& batch, LossKind kind,
                   PenaltyGranularity granularity = PenaltyGranularity::PerBatch);

// d(irm_penalty)/d(output_i).
std::vector<double> irm_penalty_grad(
    const EnvBatch& batch, LossKind kind,
    PenaltyGranularity granularity = PenaltyGranularity::PerBatch);

// sum_e [ risk_e + alpha * irm_penalty_e ].
double irm_regularized_loss(
    std::span<const EnvBatch> batches, LossKind kind, double alpha,
    PenaltyGranularity granularity = PenaltyGranularity::PerBatch);

}  // namespace irmlab
