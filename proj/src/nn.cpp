#include "irmlab/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "irmlab/rng.hpp"

namespace irmlab {

Mlp::Mlp(std::vector<int> sizes, std::uint64_t seed, std::string_view stream)
    : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp needs >= 2 sizes");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    w_offset_.push_back(total);
    total += static_cast<std::size_t>(sizes_[l + 1]) * sizes_[l];
    b_offset_.push_back(total);
    total += sizes_[l + 1];
  }
  params_.resize(total);
  RngStream init(seed, stream);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
    const std::size_t n_w = static_cast<std::size_t>(sizes_[l + 1]) * sizes_[l];
    for (std::size_t i = 0; i < n_w; ++i)
      params_[w_offset_[l] + i] = init.uniform(-bound, bound);
    for (int i = 0; i < sizes_[l + 1]; ++i)
      params_[b_offset_[l] + i] = init.uniform(-bound, bound);
  }
}

void Mlp::forward(const Matrix& x, Cache& cache) const {
  if (x.cols != sizes_.front())
    throw std::invalid_argument("Mlp::forward: input width " +
                                std::to_string(x.cols) + ", expected " +
                                std::to_string(sizes_.front()));
  cache.acts.assign(1, x);
  const int n = x.rows;
  for (int l = 0; l + 1 < static_cast<int>(sizes_.size()); ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double* w = params_.data() + w_offset_[l];
    const double* b = params_.data() + b_offset_[l];
    const Matrix& prev = cache.acts.back();
    Matrix act(n, out);
    const bool last = l + 2 == static_cast<int>(sizes_.size());
    for (int i = 0; i < n; ++i) {
      const double* p = prev.row(i);
      double* a = act.row(i);
      for (int j = 0; j < out; ++j) {
        const double* wj = w + static_cast<std::size_t>(j) * in;
        double z = b[j];
        for (int k = 0; k < in; ++k) z += wj[k] * p[k];
        a[j] = last ? z : std::tanh(z);
      }
    }
    cache.acts.push_back(std::move(act));
  }
}

void Mlp::backward(const Cache& cache, const Matrix& d_output,
                   const Matrix* d_rep, std::vector<double>& grad,
                   Matrix* d_input) const {
  if (grad.size() != params_.size())
    throw std::invalid_argument("gradient buffer has wrong size");
  const int n_layers = static_cast<int>(sizes_.size()) - 1;
  const int n = cache.acts[0].rows;

  Matrix d_act = d_output;
  for (int l = n_layers - 1; l >= 0; --l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double* w = params_.data() + w_offset_[l];
    double* gw = grad.data() + w_offset_[l];
    double* gb = grad.data() + b_offset_[l];
    const Matrix& act = cache.acts[l + 1];
    const Matrix& prev = cache.acts[l];
    const bool last = l == n_layers - 1;

    Matrix d_prev(n, in);
    for (int i = 0; i < n; ++i) {
      const double* a = act.row(i);
      const double* p = prev.row(i);
      const double* da = d_act.row(i);
      double* dp = d_prev.row(i);
      for (int j = 0; j < out; ++j) {
        // tanh'(z) = 1 - tanh(z)^2; the final layer is linear
        const double dz = last ? da[j] : da[j] * (1.0 - a[j] * a[j]);
        if (dz == 0.0) continue;
        const double* wj = w + static_cast<std::size_t>(j) * in;
        double* gwj = gw + static_cast<std::size_t>(j) * in;
        gb[j] += dz;
        for (int k = 0; k < in; ++k) {
          gwj[k] += dz * p[k];
          dp[k] += dz * wj[k];
        }
      }
    }
    // Matching penalties attach at the representation (last hidden) layer.
    if (d_rep && l == n_layers - 1) {
      for (std::size_t i = 0; i < d_prev.data.size(); ++i)
        d_prev.data[i] += d_rep->data[i];
    }
    d_act = std::move(d_prev);
  }
  if (d_input) *d_input = std::move(d_act);
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix probs(logits.rows, logits.cols);
  for (int i = 0; i < logits.rows; ++i) {
    const double* z = logits.row(i);
    double* p = probs.row(i);
    double zmax = z[0];
    for (int j = 1; j < logits.cols; ++j) zmax = std::max(zmax, z[j]);
    double sum = 0.0;
    for (int j = 0; j < logits.cols; ++j) {
      p[j] = std::exp(z[j] - zmax);
      sum += p[j];
    }
    for (int j = 0; j < logits.cols; ++j) p[j] /= sum;
  }
  return probs;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace irmlab
