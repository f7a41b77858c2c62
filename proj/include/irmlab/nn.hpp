#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace irmlab {

// Dense row-major matrix; just enough linear algebra for small MLPs.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double* row(int i) { return data.data() + static_cast<std::size_t>(i) * cols; }
  const double* row(int i) const {
    return data.data() + static_cast<std::size_t>(i) * cols;
  }
  double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const {
    return data[static_cast<std::size_t>(i) * cols + j];
  }
  void zero() { std::fill(data.begin(), data.end(), 0.0); }
};

// Fully connected net with tanh hidden activations and a linear final layer.
// Parameters live in one flat vector (per-layer W then b) so finite-difference
// probes and optimizer steps can treat them uniformly. The activation of the
// last hidden layer is the representation consumed by the matching penalties.
class Mlp {
 public:
  Mlp() = default;
  // sizes = {input, hidden..., output}; weights uniform in +-1/sqrt(fan_in)
  // drawn from the named stream of the seed.
  Mlp(std::vector<int> sizes, std::uint64_t seed, std::string_view stream);

  int input_width() const { return sizes_.front(); }
  int output_width() const { return sizes_.back(); }
  int representation_width() const { return sizes_[sizes_.size() - 2]; }
  int n_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  std::size_t n_params() const { return params_.size(); }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  struct Cache {
    // acts[0] is the input; acts[l] is the post-activation output of layer l
    // (tanh for hidden layers, raw affine for the final layer).
    std::vector<Matrix> acts;
    const Matrix& output() const { return acts.back(); }
    const Matrix& representation() const { return acts[acts.size() - 2]; }
  };

  void forward(const Matrix& x, Cache& cache) const;

  // Accumulates parameter gradients for upstream gradients d_output (w.r.t.
  // the final affine output) and, optionally, d_rep added at the last hidden
  // activation and d_input filled with the gradient w.r.t. the input rows.
  void backward(const Cache& cache, const Matrix& d_output,
                const Matrix* d_rep, std::vector<double>& grad,
                Matrix* d_input = nullptr) const;

 private:
  std::vector<int> sizes_;
  std::vector<std::size_t> w_offset_;
  std::vector<std::size_t> b_offset_;
  std::vector<double> params_;
};

// probs = row-wise softmax(logits), numerically stabilized.
Matrix softmax_rows(const Matrix& logits);

double sigmoid(double z);

}  // namespace irmlab
