#include "irmlab/cdm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

namespace irmlab {

namespace {

std::atomic<std::uint64_t> g_acdm_clamp_events{0};
constexpr double kLogEps = 1e-7;

void check_two_sided(const Matrix& p, const Matrix& q) {
  if (p.rows < 2 || q.rows < 2)
    throw std::invalid_argument(
        "mmd_unbiased needs at least two samples on each side");
  if (p.cols != q.cols)
    throw std::invalid_argument("mmd_unbiased: dimension mismatch");
}

}  // namespace

KernelSpec KernelSpec::single_rbf(double sigma) { return {{sigma}, {1.0}}; }

KernelSpec KernelSpec::multi_rbf_median(const Matrix& samples) {
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(samples.rows) * (samples.rows - 1) / 2);
  for (int i = 0; i < samples.rows; ++i) {
    for (int j = i + 1; j < samples.rows; ++j) {
      double d2 = 0.0;
      const double* a = samples.row(i);
      const double* b = samples.row(j);
      for (int k = 0; k < samples.cols; ++k) {
        const double d = a[k] - b[k];
        d2 += d * d;
      }
      dists.push_back(std::sqrt(d2));
    }
  }
  double median = 0.0;
  if (!dists.empty()) {
    auto mid = dists.begin() + dists.size() / 2;
    std::nth_element(dists.begin(), mid, dists.end());
    median = *mid;
  }
  if (median <= 0.0) median = 1.0;
  KernelSpec k;
  for (double f : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    k.bandwidths.push_back(f * median);
    k.weights.push_back(0.2);
  }
  return k;
}

void KernelSpec::validate() const {
  if (bandwidths.empty() || bandwidths.size() != weights.size())
    throw std::invalid_argument("kernel has mismatched bandwidths/weights");
  double sum = 0.0;
  for (std::size_t i = 0; i < bandwidths.size(); ++i) {
    if (!(bandwidths[i] > 0.0))
      throw std::invalid_argument("kernel bandwidths must be positive");
    if (weights[i] < 0.0)
      throw std::invalid_argument("kernel weights must be nonnegative");
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("kernel weights must sum to 1");
}

double rbf_kernel(const double* a, const double* b, int dim, double sigma) {
  double d2 = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double d = a[k] - b[k];
    d2 += d * d;
  }
  return std::exp(-d2 / (2.0 * sigma * sigma));
}

namespace {

// Mixture kernel value and, optionally, the coefficient of (b - a) in the
// gradient with respect to a (which is sum_m w_m k_m / sigma_m^2).
double mix_kernel(const double* a, const double* b, int dim,
                  const KernelSpec& k, double* grad_coef) {
  double d2 = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  double value = 0.0;
  double coef = 0.0;
  for (std::size_t m = 0; m < k.bandwidths.size(); ++m) {
    const double s2 = k.bandwidths[m] * k.bandwidths[m];
    const double km = std::exp(-d2 / (2.0 * s2));
    value += k.weights[m] * km;
    if (grad_coef) coef += k.weights[m] * km / s2;
  }
  if (grad_coef) *grad_coef = coef;
  return value;
}

double mmd_impl(const Matrix& p, const Matrix& q, const KernelSpec& k,
                Matrix* d_p, Matrix* d_q, double weight) {
  check_two_sided(p, q);
  k.validate();
  const int dim = p.cols;
  const int n = p.rows;
  const int m = q.rows;
  const bool grad = d_p != nullptr;

  double within_p = 0.0;
  const double cp = 2.0 / (static_cast<double>(n) * (n - 1));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double coef = 0.0;
      within_p += mix_kernel(p.row(i), p.row(j), dim, k, grad ? &coef : nullptr);
      if (grad) {
        // d k(a,b)/da = k * (b - a)/sigma^2, accumulated for both endpoints
        for (int t = 0; t < dim; ++t) {
          const double g = coef * (p.at(j, t) - p.at(i, t)) * cp * weight;
          d_p->at(i, t) += g;
          d_p->at(j, t) -= g;
        }
      }
    }
  }
  within_p *= cp;

  double within_q = 0.0;
  const double cq = 2.0 / (static_cast<double>(m) * (m - 1));
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      double coef = 0.0;
      within_q += mix_kernel(q.row(i), q.row(j), dim, k, grad ? &coef : nullptr);
      if (grad) {
        for (int t = 0; t < dim; ++t) {
          const double g = coef * (q.at(j, t) - q.at(i, t)) * cq * weight;
          d_q->at(i, t) += g;
          d_q->at(j, t) -= g;
        }
      }
    }
  }
  within_q *= cq;

  double cross = 0.0;
  const double cc = 2.0 / (static_cast<double>(m) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      double coef = 0.0;
      cross += mix_kernel(p.row(i), q.row(j), dim, k, grad ? &coef : nullptr);
      if (grad) {
        for (int t = 0; t < dim; ++t) {
          const double g = coef * (q.at(j, t) - p.at(i, t)) * cc * weight;
          d_p->at(i, t) -= g;
          d_q->at(j, t) += g;
        }
      }
    }
  }
  cross *= cc;

  return within_p + within_q - cross;
}

}  // namespace

double mmd_unbiased(const Matrix& p, const Matrix& q, const KernelSpec& k) {
  return mmd_impl(p, q, k, nullptr, nullptr, 1.0);
}

double mmd_unbiased_grad(const Matrix& p, const Matrix& q, const KernelSpec& k,
                         Matrix& d_p, Matrix& d_q, double weight) {
  return mmd_impl(p, q, k, &d_p, &d_q, weight);
}

CdmPenaltyResult cdm_mmd_penalty(const Matrix& reps, const GroupIndex& groups,
                                 const KernelSpec& k, Matrix* d_reps,
                                 double weight, bool normalized_unordered) {
  CdmPenaltyResult result;
  std::vector<std::pair<GroupKey, const std::vector<int>*>> usable;
  for (const auto& [key, rows] : groups) {
    if (rows.size() < 2) {
      result.skipped_groups += 1;
      continue;
    }
    usable.emplace_back(key, &rows);
  }
  if (usable.empty())
    throw std::invalid_argument(
        "cdm_mmd_penalty: every group is below the minimum size of 2");

  auto gather = [&](const std::vector<int>& rows) {
    Matrix m(static_cast<int>(rows.size()), reps.cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
      std::copy_n(reps.row(rows[i]), reps.cols, m.row(static_cast<int>(i)));
    return m;
  };

  int pair_count = 0;
  double total = 0.0;
  // unordered pairs accumulated once; the ordered double sum doubles them
  Matrix local;
  if (d_reps) local = Matrix(reps.rows, reps.cols);
  for (std::size_t a = 0; a < usable.size(); ++a) {
    for (std::size_t b = a + 1; b < usable.size(); ++b) {
      if (usable[a].first.y != usable[b].first.y) continue;
      pair_count += 1;
      Matrix pa = gather(*usable[a].second);
      Matrix pb = gather(*usable[b].second);
      if (d_reps) {
        Matrix da(pa.rows, pa.cols);
        Matrix db(pb.rows, pb.cols);
        total += mmd_unbiased_grad(pa, pb, k, da, db, 1.0);
        for (std::size_t i = 0; i < usable[a].second->size(); ++i)
          for (int t = 0; t < reps.cols; ++t)
            local.at((*usable[a].second)[i], t) += da.at(static_cast<int>(i), t);
        for (std::size_t i = 0; i < usable[b].second->size(); ++i)
          for (int t = 0; t < reps.cols; ++t)
            local.at((*usable[b].second)[i], t) += db.at(static_cast<int>(i), t);
      } else {
        total += mmd_unbiased(pa, pb, k);
      }
    }
  }
  double scale = normalized_unordered
                     ? (pair_count > 0 ? 1.0 / pair_count : 0.0)
                     : 2.0;
  total *= scale;
  if (d_reps) {
    for (std::size_t i = 0; i < local.data.size(); ++i)
      d_reps->data[i] += local.data[i] * scale * weight;
  }
  result.value = total;
  return result;
}

GammaWeights gamma_weights(const Dataset& ds) {
  GammaWeights gamma;
  long total = 0;
  for (const auto& env : ds.envs) {
    if (env.is_test) continue;
    for (const Instance& inst : env.instances) {
      if (inst.split != Split::Train) continue;
      gamma[{inst.y, env.env_id}] += 1.0;
      total += 1;
    }
  }
  if (total == 0)
    throw std::invalid_argument("gamma_weights: empty training split");
  for (auto& [key, value] : gamma) value /= static_cast<double>(total);
  return gamma;
}

std::uint64_t acdm_clamp_events() {
  return g_acdm_clamp_events.load(std::memory_order_relaxed);
}

void reset_acdm_clamp_events() {
  g_acdm_clamp_events.store(0, std::memory_order_relaxed);
}

double acdm_objective(const Matrix& logits, std::span<const int> env_col,
                      std::span<const GroupKey> group_of,
                      const GammaWeights& gamma,
                      const std::map<GroupKey, int>& group_sizes,
                      Matrix* d_logits) {
  if (logits.rows != static_cast<int>(env_col.size()) ||
      logits.rows != static_cast<int>(group_of.size()))
    throw std::invalid_argument("acdm_objective: length mismatch");
  Matrix probs = softmax_rows(logits);
  double value = 0.0;
  for (int i = 0; i < logits.rows; ++i) {
    const auto git = gamma.find(group_of[i]);
    const auto sit = group_sizes.find(group_of[i]);
    if (git == gamma.end() || sit == group_sizes.end() || sit->second == 0)
      continue;
    const double coef = git->second / static_cast<double>(sit->second);
    double p = probs.at(i, env_col[i]);
    if (p < kLogEps) {
      g_acdm_clamp_events.fetch_add(1, std::memory_order_relaxed);
      p = kLogEps;
    }
    value += coef * std::log(p);
    if (d_logits) {
      for (int j = 0; j < logits.cols; ++j) {
        const double delta = j == env_col[i] ? 1.0 : 0.0;
        d_logits->at(i, j) += coef * (delta - probs.at(i, j));
      }
    }
  }
  return value;
}

Discriminator::Discriminator(int rep_dim, int n_classes, int n_envs,
                             int hidden, std::uint64_t seed)
    : net_({rep_dim + n_classes, hidden, hidden, n_envs}, seed, "disc_init"),
      rep_dim_(rep_dim),
      n_classes_(n_classes),
      n_envs_(n_envs) {}

Matrix Discriminator::logits(const Matrix& reps,
                             std::span<const std::uint8_t> labels,
                             Mlp::Cache& cache) const {
  if (reps.rows != static_cast<int>(labels.size()))
    throw std::invalid_argument("discriminator: reps/labels length mismatch");
  Matrix input(reps.rows, rep_dim_ + n_classes_);
  for (int i = 0; i < reps.rows; ++i) {
    std::copy_n(reps.row(i), rep_dim_, input.row(i));
    input.at(i, rep_dim_ + (labels[i] ? 1 : 0)) = 1.0;
  }
  net_.forward(input, cache);
  return cache.output();
}

void Discriminator::backward(const Mlp::Cache& cache, const Matrix& d_logits,
                             std::vector<double>& grad, Matrix* d_reps) const {
  Matrix d_input;
  net_.backward(cache, d_logits, nullptr, grad, d_reps ? &d_input : nullptr);
  if (d_reps) {
    for (int i = 0; i < d_input.rows; ++i)
      for (int t = 0; t < rep_dim_; ++t) d_reps->at(i, t) += d_input.at(i, t);
  }
}

}  // namespace irmlab
