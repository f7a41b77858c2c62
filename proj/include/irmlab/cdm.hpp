#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "irmlab/nn.hpp"
#include "irmlab/sampler.hpp"

namespace irmlab {

// Convex mixture of RBF kernels k(a,b) = exp(-|a-b|^2 / (2 sigma^2)).
struct KernelSpec {
  std::vector<double> bandwidths;
  std::vector<double> weights;

  static KernelSpec single_rbf(double sigma);
  // Five bandwidths {1/4, 1/2, 1, 2, 4} x the median pairwise distance of the
  // given sample rows, equal weights. Falls back to sigma = 1 when the median
  // is zero.
  static KernelSpec multi_rbf_median(const Matrix& samples);

  void validate() const;
};

double rbf_kernel(const double* a, const double* b, int dim, double sigma);

// Unbiased two-sample estimator:
//   1/(N(N-1)) sum_{i!=j} k(p_i,p_j) + 1/(M(M-1)) sum_{i!=j} k(q_i,q_j)
//   - 2/(MN) sum_i sum_j k(p_i,q_j).
// Requires at least two samples on each side.
double mmd_unbiased(const Matrix& p, const Matrix& q, const KernelSpec& k);

// Same value; also accumulates weight * d(MMD)/d(row) into d_p / d_q.
double mmd_unbiased_grad(const Matrix& p, const Matrix& q, const KernelSpec& k,
                         Matrix& d_p, Matrix& d_q, double weight = 1.0);

struct GroupKey {
  int y = 0;
  int env_id = 0;
  auto operator<=>(const GroupKey&) const = default;
};

// Row indices of one (class, environment) group within a representation
// matrix.
using GroupIndex = std::map<GroupKey, std::vector<int>>;

struct CdmPenaltyResult {
  double value = 0.0;
  int skipped_groups = 0;  // groups below the estimator's minimum size of 2
};

// sum_y sum_e sum_{e' != e} MMD(group(y,e), group(y,e')) over ordered pairs
// (each unordered pair counted twice). With normalized_unordered set, each
// unordered pair is counted once and the sum is divided by the pair count.
// Throws when every group is undersized; accumulates weight * gradient into
// d_reps when given.
CdmPenaltyResult cdm_mmd_penalty(const Matrix& reps, const GroupIndex& groups,
                                 const KernelSpec& k, Matrix* d_reps = nullptr,
                                 double weight = 1.0,
                                 bool normalized_unordered = false);

// Empirical joint P(E=e, Y=y) over the training split of the dataset.
using GammaWeights = std::map<GroupKey, double>;
GammaWeights gamma_weights(const Dataset& ds);

// Count of discriminator outputs clamped away from 0 inside log terms.
std::uint64_t acdm_clamp_events();
void reset_acdm_clamp_events();

// The minimax scalar: sum_y sum_e gamma_e^y * mean over group(y,e) of
// log D^e(rep, y). The discriminator ascends it, the representation descends
// it. logits are per-instance scores over training environments (softmax
// applied inside); env_col/group_of give each row's environment column and
// group. Fills d_logits with the gradient when given.
double acdm_objective(const Matrix& logits, std::span<const int> env_col,
                      std::span<const GroupKey> group_of,
                      const GammaWeights& gamma,
                      const std::map<GroupKey, int>& group_sizes,
                      Matrix* d_logits = nullptr);

// Class-conditioned environment discriminator: a two-hidden-layer MLP on
// [representation, one-hot class] with one output per training environment.
class Discriminator {
 public:
  Discriminator() = default;
  Discriminator(int rep_dim, int n_classes, int n_envs, int hidden,
                std::uint64_t seed);

  int n_envs() const { return n_envs_; }
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

  // Assembles [rep, one-hot y] rows and runs the net; returns logits.
  Matrix logits(const Matrix& reps, std::span<const std::uint8_t> labels,
                Mlp::Cache& cache) const;

  // Backprop d_logits through the net; accumulates parameter gradients and
  // optionally the gradient w.r.t. the representation block of the input.
  void backward(const Mlp::Cache& cache, const Matrix& d_logits,
                std::vector<double>& grad, Matrix* d_reps = nullptr) const;

 private:
  Mlp net_;
  int rep_dim_ = 0;
  int n_classes_ = 0;
  int n_envs_ = 0;
};

}  // namespace irmlab
