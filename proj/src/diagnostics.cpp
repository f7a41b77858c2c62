#include "irmlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "irmlab/rng.hpp"

namespace irmlab {

namespace {

// Ridge-damped iteratively reweighted least squares for binary logistic
// regression; Newton steps are affine-covariant, so probe accuracy survives
// invertible affine maps of the inputs.
struct LogisticFit {
  std::vector<double> w;  // includes bias as the last coefficient
};

std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  // Cholesky factorization in place
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) sum -= a[i * n + k] * a[j * n + k];
      if (i == j) {
        if (sum <= 0.0) sum = 1e-12;
        a[i * n + i] = std::sqrt(sum);
      } else {
        a[i * n + j] = sum / a[j * n + j];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double sum = b[i];
    for (std::size_t k = 0; k < i; ++k) sum -= a[i * n + k] * b[k];
    b[i] = sum / a[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double sum = b[i];
    for (std::size_t k = i + 1; k < n; ++k) sum -= a[k * n + i] * b[k];
    b[i] = sum / a[i * n + i];
  }
  return b;
}

LogisticFit fit_logistic(const Matrix& x, const std::vector<int>& target) {
  const int n = x.rows;
  const int d = x.cols + 1;
  const double ridge = 1e-3;
  LogisticFit fit;
  fit.w.assign(d, 0.0);
  auto feature = [&](int i, int j) {
    return j < x.cols ? x.at(i, j) : 1.0;
  };
  for (int pass = 0; pass < 25; ++pass) {
    std::vector<double> grad(d, 0.0);
    std::vector<double> hess(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < n; ++i) {
      double z = 0.0;
      for (int j = 0; j < d; ++j) z += fit.w[j] * feature(i, j);
      const double p = 1.0 / (1.0 + std::exp(-z));
      const double r = p - target[i];
      const double s = std::max(p * (1.0 - p), 1e-6);
      for (int j = 0; j < d; ++j) {
        grad[j] += r * feature(i, j);
        for (int k = 0; k <= j; ++k)
          hess[static_cast<std::size_t>(j) * d + k] +=
              s * feature(i, j) * feature(i, k);
      }
    }
    for (int j = 0; j < d; ++j) {
      grad[j] += ridge * fit.w[j];
      hess[static_cast<std::size_t>(j) * d + j] += ridge;
      for (int k = j + 1; k < d; ++k)
        hess[static_cast<std::size_t>(j) * d + k] =
            hess[static_cast<std::size_t>(k) * d + j];
    }
    std::vector<double> step = solve_spd(hess, grad);
    double step_norm = 0.0;
    for (int j = 0; j < d; ++j) {
      fit.w[j] -= step[j];
      step_norm += step[j] * step[j];
    }
    if (step_norm < 1e-12) break;
  }
  return fit;
}

double probe_accuracy(const Matrix& x, const std::vector<int>& target,
                      std::uint64_t seed) {
  const int n = x.rows;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  RngStream shuffle(seed, "probe_split");
  for (int i = n; i > 1; --i)
    std::swap(order[i - 1], order[shuffle.uniform_int(i)]);
  const int n_train = std::max(1, (n * 4) / 5);

  Matrix xt(n_train, x.cols);
  std::vector<int> yt(n_train);
  for (int i = 0; i < n_train; ++i) {
    std::copy_n(x.row(order[i]), x.cols, xt.row(i));
    yt[i] = target[order[i]];
  }
  // column standardization from the training part
  std::vector<double> mean(x.cols, 0.0), scale(x.cols, 1.0);
  for (int j = 0; j < x.cols; ++j) {
    double m = 0.0;
    for (int i = 0; i < n_train; ++i) m += xt.at(i, j);
    m /= n_train;
    double v = 0.0;
    for (int i = 0; i < n_train; ++i) {
      const double dlt = xt.at(i, j) - m;
      v += dlt * dlt;
    }
    mean[j] = m;
    scale[j] = v > 1e-12 * n_train ? std::sqrt(v / n_train) : 1.0;
    for (int i = 0; i < n_train; ++i)
      xt.at(i, j) = (xt.at(i, j) - mean[j]) / scale[j];
  }
  LogisticFit fit = fit_logistic(xt, yt);

  long correct = 0;
  long held = 0;
  for (int i = n_train; i < n; ++i) {
    double z = fit.w[x.cols];
    for (int j = 0; j < x.cols; ++j)
      z += fit.w[j] * (x.at(order[i], j) - mean[j]) / scale[j];
    const int pred = z > 0.0 ? 1 : 0;
    correct += pred == target[order[i]];
    held += 1;
  }
  if (held == 0) return 0.0;
  return static_cast<double>(correct) / static_cast<double>(held);
}

}  // namespace

ProbeReport domain_probe(const Matrix& reps, std::span<const int> envs,
                         std::span<const std::uint8_t> labels,
                         std::uint64_t seed) {
  if (reps.rows != static_cast<int>(envs.size()))
    throw std::invalid_argument("domain_probe: reps/envs length mismatch");
  std::set<int> env_ids(envs.begin(), envs.end());
  if (env_ids.size() < 2)
    throw std::invalid_argument("domain_probe: need >= 2 environments");
  if (env_ids.size() > 2)
    throw std::invalid_argument("domain_probe: only two environments supported");
  std::map<int, int> env_count;
  for (int e : envs) env_count[e] += 1;
  for (const auto& [e, count] : env_count)
    if (count < 2)
      throw std::invalid_argument("domain_probe: environment " +
                                  std::to_string(e) + " has < 2 samples");

  const int positive_env = *env_ids.rbegin();
  std::vector<int> target(envs.size());
  for (std::size_t i = 0; i < envs.size(); ++i)
    target[i] = envs[i] == positive_env ? 1 : 0;

  ProbeReport report;
  report.domain_probe_accuracy = probe_accuracy(reps, target, seed);

  if (!labels.empty()) {
    Matrix with_y(reps.rows, reps.cols + 1);
    for (int i = 0; i < reps.rows; ++i) {
      std::copy_n(reps.row(i), reps.cols, with_y.row(i));
      with_y.at(i, reps.cols) = labels[i];
    }
    report.domain_probe_accuracy_given_label =
        probe_accuracy(with_y, target, seed + 1);
  }

  // Overlap via binned total variation on the same representation space.
  CiGapReport bins = conditional_independence_gap(reps, labels, envs, 16, seed);
  const int e0 = *env_ids.begin();
  const int e1 = positive_env;
  double tv = 0.0;
  for (const CiGapCell& cell : bins.cells) {
    const double p0 = cell.counts.count(e0)
                          ? static_cast<double>(cell.counts.at(e0)) /
                                env_count.at(e0)
                          : 0.0;
    const double p1 = cell.counts.count(e1)
                          ? static_cast<double>(cell.counts.at(e1)) /
                                env_count.at(e1)
                          : 0.0;
    tv += std::abs(p0 - p1);
  }
  report.overlap_score = 1.0 - 0.5 * tv;

  if (!labels.empty()) {
    for (int y : {0, 1}) {
      std::vector<int> rows;
      for (std::size_t i = 0; i < labels.size(); ++i)
        if ((labels[i] ? 1 : 0) == y) rows.push_back(static_cast<int>(i));
      if (rows.size() < 2) continue;
      Matrix sub(static_cast<int>(rows.size()), reps.cols);
      std::vector<int> sub_envs(rows.size());
      std::vector<std::uint8_t> sub_labels(rows.size());
      std::map<int, int> sub_count;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy_n(reps.row(rows[i]), reps.cols, sub.row(static_cast<int>(i)));
        sub_envs[i] = envs[rows[i]];
        sub_labels[i] = labels[rows[i]];
        sub_count[sub_envs[i]] += 1;
      }
      if (sub_count.size() < 2) continue;
      CiGapReport sub_bins =
          conditional_independence_gap(sub, sub_labels, sub_envs, 16, seed);
      double sub_tv = 0.0;
      for (const CiGapCell& cell : sub_bins.cells) {
        const double p0 = cell.counts.count(e0)
                              ? static_cast<double>(cell.counts.at(e0)) /
                                    sub_count.at(e0)
                              : 0.0;
        const double p1 = cell.counts.count(e1)
                              ? static_cast<double>(cell.counts.at(e1)) /
                                    sub_count.at(e1)
                              : 0.0;
        sub_tv += std::abs(p0 - p1);
      }
      report.per_class_overlap[y] = 1.0 - 0.5 * sub_tv;
    }
  }
  return report;
}

CiGapReport conditional_independence_gap(const Matrix& reps,
                                         std::span<const std::uint8_t> labels,
                                         std::span<const int> envs, int k,
                                         std::uint64_t seed) {
  const int n = reps.rows;
  if (n == 0) throw std::invalid_argument("conditional_independence_gap: empty");
  if (n != static_cast<int>(labels.size()) || n != static_cast<int>(envs.size()))
    throw std::invalid_argument("conditional_independence_gap: length mismatch");
  k = std::min(k, n);

  // Lloyd's iterations from seeded row picks; assignment ties go to the
  // lowest centroid index.
  Matrix centroids(k, reps.cols);
  RngStream init(seed, "kmeans_init");
  for (int c = 0; c < k; ++c)
    std::copy_n(reps.row(init.uniform_int(n)), reps.cols, centroids.row(c));

  std::vector<int> assign(n, 0);
  for (int pass = 0; pass < 25; ++pass) {
    bool moved = false;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (int c = 0; c < k; ++c) {
        double d2 = 0.0;
        for (int j = 0; j < reps.cols; ++j) {
          const double d = reps.at(i, j) - centroids.at(c, j);
          d2 += d * d;
        }
        if (d2 < best - 1e-15) {
          best = d2;
          best_c = c;
        }
      }
      if (assign[i] != best_c) {
        assign[i] = best_c;
        moved = true;
      }
    }
    if (!moved && pass > 0) break;
    Matrix sums(k, reps.cols);
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      counts[assign[i]] += 1;
      for (int j = 0; j < reps.cols; ++j)
        sums.at(assign[i], j) += reps.at(i, j);
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (int j = 0; j < reps.cols; ++j)
        centroids.at(c, j) = sums.at(c, j) / counts[c];
    }
  }

  CiGapReport report;
  report.sample_count = static_cast<std::size_t>(n);
  std::vector<CiGapCell> cells(k);
  std::vector<std::map<int, double>> label_sums(k);
  for (int i = 0; i < n; ++i) {
    CiGapCell& cell = cells[assign[i]];
    cell.counts[envs[i]] += 1;
    cell.total += 1;
    label_sums[assign[i]][envs[i]] += labels[i];
  }
  for (int c = 0; c < k; ++c) {
    for (const auto& [e, count] : cells[c].counts)
      cells[c].mean_label[e] = label_sums[c][e] / count;
  }

  double weighted_gap = 0.0;
  long shared_samples = 0;
  bool any_shared = false;
  for (const CiGapCell& cell : cells) {
    if (cell.total == 0) continue;
    if (cell.counts.size() >= 2) {
      any_shared = true;
      shared_samples += cell.total;
      double largest = 0.0;
      for (auto it1 = cell.mean_label.begin(); it1 != cell.mean_label.end();
           ++it1) {
        for (auto it2 = std::next(it1); it2 != cell.mean_label.end(); ++it2)
          largest = std::max(largest, std::abs(it1->second - it2->second));
      }
      weighted_gap += largest * cell.total;
    }
  }
  report.shared_cell_fraction =
      static_cast<double>(shared_samples) / static_cast<double>(n);
  if (any_shared) report.gap = weighted_gap / shared_samples;
  for (CiGapCell& cell : cells)
    if (cell.total > 0) report.cells.push_back(std::move(cell));
  return report;
}

}  // namespace irmlab
