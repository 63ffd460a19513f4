#pragma once

#include <string>
#include <vector>

#include "embsizer/core/matrix.hpp"
#include "embsizer/core/parameter.hpp"

namespace embsizer {

class RngStream;

enum class Mode { Train, Inference };

// Elementwise and row-wise activations.
Matrix relu(const Matrix& x);
Matrix sigmoid(const Matrix& x);
double sigmoid(double x) noexcept;
// Each row mapped to the simplex; max-subtracted for stability.
Matrix softmax_rows(const Matrix& x);

// y = x W + b. Weights initialized uniform in +-1/sqrt(fan_in), bias zero.
class Affine {
 public:
  Affine() = default;
  Affine(const std::string& name, std::size_t in, std::size_t out, RngStream& rng);

  std::size_t in_features() const noexcept { return weight_.value.rows(); }
  std::size_t out_features() const noexcept { return weight_.value.cols(); }

  Matrix forward(const Matrix& x);
  Matrix predict(const Matrix& x) const;
  // Accumulates parameter gradients and returns d loss / d x.
  Matrix backward(const Matrix& dy);

  Parameter& weight() noexcept { return weight_; }
  Parameter& bias() noexcept { return bias_; }
  const Parameter& weight() const noexcept { return weight_; }
  const Parameter& bias() const noexcept { return bias_; }
  void collect(std::vector<Parameter*>& out) { out.insert(out.end(), {&weight_, &bias_}); }
  void collect(std::vector<const Parameter*>& out) const {
    out.insert(out.end(), {&weight_, &bias_});
  }

 private:
  Parameter weight_;
  Parameter bias_;
  Matrix input_;
};

class Relu {
 public:
  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& dy) const;

 private:
  Matrix input_;
};

// Per-column standardization with learned scale and shift. Running
// statistics follow r <- momentum * r + (1 - momentum) * batch_stat.
class BatchNorm {
 public:
  static constexpr double kEpsilon = 1e-5;
  static constexpr double kMomentum = 0.9;

  BatchNorm() = default;
  BatchNorm(const std::string& name, std::size_t width);

  std::size_t width() const noexcept { return gamma_.value.cols(); }

  // Train mode needs at least two rows.
  Matrix forward(const Matrix& x, Mode mode);
  Matrix predict(const Matrix& x) const;
  Matrix backward(const Matrix& dy);

  Parameter& gamma() noexcept { return gamma_; }
  Parameter& beta() noexcept { return beta_; }
  Matrix& running_mean() noexcept { return running_mean_; }
  Matrix& running_var() noexcept { return running_var_; }
  const Matrix& running_mean() const noexcept { return running_mean_; }
  const Matrix& running_var() const noexcept { return running_var_; }

  void collect(std::vector<Parameter*>& out) { out.insert(out.end(), {&gamma_, &beta_}); }
  void collect(std::vector<const Parameter*>& out) const {
    out.insert(out.end(), {&gamma_, &beta_});
  }

 private:
  Parameter gamma_;
  Parameter beta_;
  Matrix running_mean_;
  Matrix running_var_;
  Matrix xhat_;
  std::vector<double> inv_std_;
  Mode last_mode_ = Mode::Inference;
};

// Per-row normalization (transformer blocks).
class LayerNorm {
 public:
  static constexpr double kEpsilon = 1e-5;

  LayerNorm() = default;
  LayerNorm(const std::string& name, std::size_t width);

  Matrix forward(const Matrix& x);
  Matrix predict(const Matrix& x) const;
  Matrix backward(const Matrix& dy);

  Parameter& gamma() noexcept { return gamma_; }
  Parameter& beta() noexcept { return beta_; }
  void collect(std::vector<Parameter*>& out) { out.insert(out.end(), {&gamma_, &beta_}); }
  void collect(std::vector<const Parameter*>& out) const {
    out.insert(out.end(), {&gamma_, &beta_});
  }

 private:
  Parameter gamma_;
  Parameter beta_;
  Matrix xhat_;
  std::vector<double> inv_std_;
};

}  // namespace embsizer
