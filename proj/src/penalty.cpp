#include "irmlab/penalty.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

namespace irmlab {

namespace {

std::atomic<std::uint64_t> g_clamp_events{0};

void check_batch(const EnvBatch& batch) {
  if (batch.outputs.empty()) throw std::invalid_argument("empty batch");
  if (batch.outputs.size() != batch.labels.size())
    throw std::invalid_argument("batch outputs/labels length mismatch");
}

// Clamped probability plus a saturation flag. A saturated term is constant in
// the dummy multiplier, so its w-gradient is zero.
struct Clamped {
  double p;
  bool saturated;
};

Clamped clamp_bce(double p) {
  if (p < kBceEps) {
    g_clamp_events.fetch_add(1, std::memory_order_relaxed);
    return {kBceEps, true};
  }
  if (p > 1.0 - kBceEps) {
    g_clamp_events.fetch_add(1, std::memory_order_relaxed);
    return {1.0 - kBceEps, true};
  }
  return {p, false};
}

// Per-instance gradient of the loss with respect to w at w=1.
double dummy_grad(double output, int y, LossKind kind) {
  if (kind == LossKind::MSE) return 2.0 * (output - y) * output;
  Clamped c = clamp_bce(output);
  if (c.saturated) return 0.0;
  return -static_cast<double>(y) + (1.0 - y) * c.p / (1.0 - c.p);
}

// d(dummy_grad)/d(output).
double dummy_grad_wrt_output(double output, int y, LossKind kind) {
  if (kind == LossKind::MSE) return 4.0 * output - 2.0 * y;
  Clamped c = clamp_bce(output);
  if (c.saturated) return 0.0;
  return (1.0 - y) / ((1.0 - c.p) * (1.0 - c.p));
}

}  // namespace

std::uint64_t bce_clamp_events() {
  return g_clamp_events.load(std::memory_order_relaxed);
}

void reset_bce_clamp_events() {
  g_clamp_events.store(0, std::memory_order_relaxed);
}

double risk(const EnvBatch& batch, LossKind kind) {
  check_batch(batch);
  double sum = 0.0;
  for (std::size_t i = 0; i < batch.outputs.size(); ++i) {
    const double y = batch.labels[i];
    if (kind == LossKind::MSE) {
      const double d = batch.outputs[i] - y;
      sum += d * d;
    } else {
      const double p = clamp_bce(batch.outputs[i]).p;
      sum += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    }
  }
  return sum / static_cast<double>(batch.outputs.size());
}

std::vector<double> risk_grad(const EnvBatch& batch, LossKind kind) {
  check_batch(batch);
  const double inv_n = 1.0 / static_cast<double>(batch.outputs.size());
  std::vector<double> grad(batch.outputs.size());
  for (std::size_t i = 0; i < batch.outputs.size(); ++i) {
    const double y = batch.labels[i];
    if (kind == LossKind::MSE) {
      grad[i] = 2.0 * (batch.outputs[i] - y) * inv_n;
    } else {
      Clamped c = clamp_bce(batch.outputs[i]);
      grad[i] = c.saturated ? 0.0 : (c.p - y) / (c.p * (1.0 - c.p)) * inv_n;
    }
  }
  return grad;
}

double irm_penalty(const EnvBatch& batch, LossKind kind,
                   PenaltyGranularity granularity) {
  check_batch(batch);
  const double inv_n = 1.0 / static_cast<double>(batch.outputs.size());
  if (granularity == PenaltyGranularity::PerBatch) {
    double g = 0.0;
    for (std::size_t i = 0; i < batch.outputs.size(); ++i)
      g += dummy_grad(batch.outputs[i], batch.labels[i], kind);
    g *= inv_n;
    return g * g;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < batch.outputs.size(); ++i) {
    const double g = dummy_grad(batch.outputs[i], batch.labels[i], kind);
    sum += g * g;
  }
  return sum * inv_n;
}

std::vector<double> irm_penalty_grad(const EnvBatch& batch, LossKind kind,
                                     PenaltyGranularity granularity) {
  check_batch(batch);
  const double inv_n = 1.0 / static_cast<double>(batch.outputs.size());
  std::vector<double> grad(batch.outputs.size());
  if (granularity == PenaltyGranularity::PerBatch) {
    double g = 0.0;
    for (std::size_t i = 0; i < batch.outputs.size(); ++i)
      g += dummy_grad(batch.outputs[i], batch.labels[i], kind);
    g *= inv_n;
    for (std::size_t i = 0; i < batch.outputs.size(); ++i)
      grad[i] = 2.0 * g * inv_n *
                dummy_grad_wrt_output(batch.outputs[i], batch.labels[i], kind);
    return grad;
  }
  for (std::size_t i = 0; i < batch.outputs.size(); ++i) {
    const double g = dummy_grad(batch.outputs[i], batch.labels[i], kind);
    grad[i] = 2.0 * g * inv_n *
              dummy_grad_wrt_output(batch.outputs[i], batch.labels[i], kind);
  }
  return grad;
}

double irm_regularized_loss(std::span<const EnvBatch> batches, LossKind kind,
                            double alpha, PenaltyGranularity granularity) {
  if (batches.empty())
    throw std::invalid_argument("irm_regularized_loss needs >= 1 environment");
  double total = 0.0;
  for (const EnvBatch& batch : batches)
    total += risk(batch, kind) + alpha * irm_penalty(batch, kind, granularity);
  return total;
}

}  // namespace irmlab
