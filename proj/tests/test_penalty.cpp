#include <stdexcept>
#include <cmath>

#include "doctest.h"
#include "irmlab/penalty.hpp"
#include "irmlab/rng.hpp"

using namespace irmlab;

namespace {

// Central finite difference of a penalty/risk scalar in one output slot.
template <typename F>
double fd_slot(EnvBatch batch, std::size_t i, F f, double h = 1e-6) {
  batch.outputs[i] += h;
  const double up = f(batch);
  batch.outputs[i] -= 2 * h;
  const double down = f(batch);
  return (up - down) / (2 * h);
}

}  // namespace

TEST_CASE("risk values") {
  SUBCASE("MSE of a perfect fit is zero") {
    EnvBatch batch{{0.0, 1.0, 1.0}, {0, 1, 1}, 1};
    CHECK(risk(batch, LossKind::MSE) == 0.0);
  }
  SUBCASE("BCE at p=0.5 is ln 2") {
    EnvBatch batch{{0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}, 1};
    CHECK(risk(batch, LossKind::BCE) == doctest::Approx(std::log(2.0)));
  }
  SUBCASE("MSE single pair (2,1) is 1") {
    EnvBatch batch{{2.0}, {1}, 1};
    CHECK(risk(batch, LossKind::MSE) == doctest::Approx(1.0));
  }
  SUBCASE("empty batch is an error") {
    EnvBatch batch;
    CHECK_THROWS_AS(risk(batch, LossKind::MSE), std::invalid_argument);
    CHECK_THROWS_AS(irm_penalty(batch, LossKind::BCE), std::invalid_argument);
  }
}

TEST_CASE("penalty zeros at the perfect fit") {
  EnvBatch batch{{1.0, 0.0, 1.0, 0.0, 0.0}, {1, 0, 1, 0, 0}, 1};
  for (LossKind kind : {LossKind::MSE, LossKind::BCE}) {
    for (PenaltyGranularity g :
         {PenaltyGranularity::PerBatch, PenaltyGranularity::PerInstance}) {
      CHECK(irm_penalty(batch, kind, g) < 1e-12);
    }
  }
}

TEST_CASE("penalty hand-derived cases") {
  SUBCASE("MSE single instance F=2,y=1 gives exactly 16") {
    EnvBatch batch{{2.0}, {1}, 1};
    CHECK(irm_penalty(batch, LossKind::MSE) == 16.0);
    CHECK(irm_penalty(batch, LossKind::MSE, PenaltyGranularity::PerInstance) ==
          16.0);
  }
  SUBCASE("MSE batch {(0,0),(1,1)} has zero mean-risk gradient") {
    EnvBatch batch{{0.0, 1.0}, {0, 1}, 1};
    CHECK(irm_penalty(batch, LossKind::MSE) == 0.0);
  }
  SUBCASE("BCE saturation clamps are counted") {
    reset_bce_clamp_events();
    EnvBatch batch{{1.0, 0.0}, {1, 0}, 1};
    (void)irm_penalty(batch, LossKind::BCE);
    CHECK(bce_clamp_events() >= 2);
  }
  SUBCASE("scale sensitivity: F = c*y with c != 1 is penalized") {
    EnvBatch batch{{1.7, 0.0, 1.7}, {1, 0, 1}, 1};
    CHECK(irm_penalty(batch, LossKind::MSE) > 0.1);
  }
  SUBCASE("penalty is nonnegative on random batches") {
    RngStream rng(99, "penalty_prop");
    for (int trial = 0; trial < 200; ++trial) {
      EnvBatch batch;
      const int n = 2 + static_cast<int>(rng.uniform_int(6));
      for (int i = 0; i < n; ++i) {
        batch.outputs.push_back(rng.uniform(0.05, 0.95));
        batch.labels.push_back(rng.bernoulli(0.5) ? 1 : 0);
      }
      for (LossKind kind : {LossKind::MSE, LossKind::BCE})
        CHECK(irm_penalty(batch, kind) >= 0.0);
    }
  }
}

TEST_CASE("regularized loss composition") {
  EnvBatch a{{0.3, 0.9}, {0, 1}, 1};
  EnvBatch b{{0.6, 0.2}, {1, 0}, 2};
  std::vector<EnvBatch> batches{a, b};
  SUBCASE("alpha=0 equals summed risk") {
    const double expect = risk(a, LossKind::MSE) + risk(b, LossKind::MSE);
    CHECK(irm_regularized_loss(batches, LossKind::MSE, 0.0) ==
          doctest::Approx(expect));
  }
  SUBCASE("weighted arithmetic") {
    const double expect =
        risk(a, LossKind::MSE) + risk(b, LossKind::MSE) +
        10.0 * (irm_penalty(a, LossKind::MSE) + irm_penalty(b, LossKind::MSE));
    CHECK(irm_regularized_loss(batches, LossKind::MSE, 10.0) ==
          doctest::Approx(expect));
  }
  SUBCASE("perfect outputs give zero total under MSE") {
    std::vector<EnvBatch> perfect{{{1.0, 0.0}, {1, 0}, 1}};
    CHECK(irm_regularized_loss(perfect, LossKind::MSE, 5.0) ==
          doctest::Approx(0.0));
  }
}

TEST_CASE("analytic gradients match finite differences") {
  RngStream rng(7, "penalty_fd");
  for (int trial = 0; trial < 40; ++trial) {
    EnvBatch batch;
    const int n = 2 + static_cast<int>(rng.uniform_int(7));
    for (int i = 0; i < n; ++i) {
      batch.outputs.push_back(rng.uniform(0.1, 0.9));
      batch.labels.push_back(rng.bernoulli(0.5) ? 1 : 0);
    }
    for (LossKind kind : {LossKind::MSE, LossKind::BCE}) {
      for (PenaltyGranularity g :
           {PenaltyGranularity::PerBatch, PenaltyGranularity::PerInstance}) {
        std::vector<double> grad = irm_penalty_grad(batch, kind, g);
        std::vector<double> rgrad = risk_grad(batch, kind);
        for (std::size_t i = 0; i < batch.outputs.size(); ++i) {
          const double fd_pen = fd_slot(
              batch, i, [&](const EnvBatch& b) { return irm_penalty(b, kind, g); });
          const double fd_risk =
              fd_slot(batch, i, [&](const EnvBatch& b) { return risk(b, kind); });
          CHECK(grad[i] ==
                doctest::Approx(fd_pen).epsilon(1e-4).scale(
                    std::max(1.0, std::abs(fd_pen))));
          CHECK(rgrad[i] ==
                doctest::Approx(fd_risk).epsilon(1e-4).scale(
                    std::max(1.0, std::abs(fd_risk))));
        }
      }
    }
  }
}
