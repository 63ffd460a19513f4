#include "embsizer/core/layers.hpp"

#include <algorithm>
#include <cmath>

#include "embsizer/core/error.hpp"
#include "embsizer/core/rng.hpp"

namespace embsizer {

Matrix relu(const Matrix& x) {
  Matrix y = x;
  for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
  return y;
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix sigmoid(const Matrix& x) {
  Matrix y = x;
  for (double& v : y.values()) v = sigmoid(v);
  return y;
}

Matrix softmax_rows(const Matrix& x) {
  require_finite(x, "softmax_rows input");
  Matrix y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto in = x.row(i);
    auto out = y.row(i);
    const double mx = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      out[j] = std::exp(in[j] - mx);
      total += out[j];
    }
    for (double& v : out) v /= total;
  }
  return y;
}

// ---------------------------------------------------------------- Affine

Affine::Affine(const std::string& name, std::size_t in, std::size_t out, RngStream& rng)
    : weight_(name + ".weight", in, out), bias_(name + ".bias", 1, out) {
  if (in == 0 || out == 0) throw ConfigError("Affine '" + name + "': zero width");
  weight_.init_uniform(rng, 1.0 / std::sqrt(static_cast<double>(in)));
}

Matrix Affine::predict(const Matrix& x) const {
  if (x.cols() != weight_.value.rows()) {
    throw ConfigError("Affine '" + weight_.name + "': input width " + std::to_string(x.cols()) +
                      " != " + std::to_string(weight_.value.rows()));
  }
  Matrix y = matmul(x, weight_.value);
  add_row_broadcast(y, bias_.value.row(0));
  return y;
}

Matrix Affine::forward(const Matrix& x) {
  Matrix y = predict(x);
  input_ = x;
  return y;
}

Matrix Affine::backward(const Matrix& dy) {
  if (dy.rows() != input_.rows() || dy.cols() != weight_.value.cols()) {
    throw ConfigError("Affine '" + weight_.name + "': backward shape mismatch");
  }
  add_inplace(weight_.grad, matmul_tn(input_, dy));
  accumulate_column_sums(dy, bias_.grad.row(0));
  weight_.touch_all();
  bias_.touch_all();
  return matmul_nt(dy, weight_.value);
}

// ---------------------------------------------------------------- Relu

Matrix Relu::forward(const Matrix& x) {
  input_ = x;
  return relu(x);
}

Matrix Relu::backward(const Matrix& dy) const {
  Matrix dx = dy;
  const double* in = input_.data();
  double* d = dx.data();
  for (std::size_t k = 0; k < dx.size(); ++k)
    if (in[k] <= 0.0) d[k] = 0.0;
  return dx;
}

// ---------------------------------------------------------------- BatchNorm

BatchNorm::BatchNorm(const std::string& name, std::size_t width)
    : gamma_(name + ".gamma", 1, width),
      beta_(name + ".beta", 1, width),
      running_mean_(1, width, 0.0),
      running_var_(1, width, 1.0) {
  gamma_.value.fill(1.0);
}

Matrix BatchNorm::predict(const Matrix& x) const {
  if (x.cols() != width()) throw ConfigError("BatchNorm '" + gamma_.name + "': width mismatch");
  Matrix y(x.rows(), x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    const double scale = gamma_.value(0, j) / std::sqrt(running_var_(0, j) + kEpsilon);
    const double shift = beta_.value(0, j) - running_mean_(0, j) * scale;
    for (std::size_t i = 0; i < x.rows(); ++i) y(i, j) = x(i, j) * scale + shift;
  }
  return y;
}

Matrix BatchNorm::forward(const Matrix& x, Mode mode) {
  last_mode_ = mode;
  if (mode == Mode::Inference) return predict(x);
  if (x.cols() != width()) throw ConfigError("BatchNorm '" + gamma_.name + "': width mismatch");
  const std::size_t n = x.rows();
  if (n < 2) {
    throw ConfigError("BatchNorm '" + gamma_.name + "': degenerate batch of " +
                      std::to_string(n) + " row(s) in train mode");
  }
  const std::size_t d = x.cols();
  std::vector<double> mean(d, 0.0), var(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j);
  for (double& m : mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double c = x(i, j) - mean[j];
      var[j] += c * c;
    }
  for (double& v : var) v /= static_cast<double>(n);

  inv_std_.resize(d);
  for (std::size_t j = 0; j < d; ++j) inv_std_[j] = 1.0 / std::sqrt(var[j] + kEpsilon);
  xhat_ = Matrix(n, d);
  Matrix y(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (x(i, j) - mean[j]) * inv_std_[j];
      xhat_(i, j) = h;
      y(i, j) = gamma_.value(0, j) * h + beta_.value(0, j);
    }
  for (std::size_t j = 0; j < d; ++j) {
    running_mean_(0, j) = kMomentum * running_mean_(0, j) + (1.0 - kMomentum) * mean[j];
    running_var_(0, j) = kMomentum * running_var_(0, j) + (1.0 - kMomentum) * var[j];
  }
  return y;
}

Matrix BatchNorm::backward(const Matrix& dy) {
  if (last_mode_ != Mode::Train) throw ConfigError("BatchNorm: backward after inference forward");
  const std::size_t n = dy.rows();
  const std::size_t d = dy.cols();
  if (n != xhat_.rows() || d != xhat_.cols()) throw ConfigError("BatchNorm: backward shape");
  Matrix dx(n, d);
  for (std::size_t j = 0; j < d; ++j) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum_dy += dy(i, j);
      sum_dy_xhat += dy(i, j) * xhat_(i, j);
    }
    gamma_.grad(0, j) += sum_dy_xhat;
    beta_.grad(0, j) += sum_dy;
    const double g = gamma_.value(0, j);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      dx(i, j) = g * inv_std_[j] * (dy(i, j) - inv_n * sum_dy - xhat_(i, j) * inv_n * sum_dy_xhat);
    }
  }
  gamma_.touch_all();
  beta_.touch_all();
  return dx;
}

// ---------------------------------------------------------------- LayerNorm

LayerNorm::LayerNorm(const std::string& name, std::size_t width)
    : gamma_(name + ".gamma", 1, width), beta_(name + ".beta", 1, width) {
  gamma_.value.fill(1.0);
}

Matrix LayerNorm::predict(const Matrix& x) const {
  LayerNorm copy = *this;
  return copy.forward(x);
}

Matrix LayerNorm::forward(const Matrix& x) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (d != gamma_.value.cols()) throw ConfigError("LayerNorm '" + gamma_.name + "': width");
  xhat_ = Matrix(n, d);
  inv_std_.assign(n, 0.0);
  Matrix y(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = x.row(i);
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (double v : r) var += (v - mean) * (v - mean);
    var /= static_cast<double>(d);
    inv_std_[i] = 1.0 / std::sqrt(var + kEpsilon);
    for (std::size_t j = 0; j < d; ++j) {
      xhat_(i, j) = (r[j] - mean) * inv_std_[i];
      y(i, j) = gamma_.value(0, j) * xhat_(i, j) + beta_.value(0, j);
    }
  }
  return y;
}

Matrix LayerNorm::backward(const Matrix& dy) {
  const std::size_t n = dy.rows();
  const std::size_t d = dy.cols();
  Matrix dx(n, d);
  std::vector<double> dxhat(d);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0, sum_h = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      gamma_.grad(0, j) += dy(i, j) * xhat_(i, j);
      beta_.grad(0, j) += dy(i, j);
      dxhat[j] = dy(i, j) * gamma_.value(0, j);
      sum += dxhat[j];
      sum_h += dxhat[j] * xhat_(i, j);
    }
    const double inv_d = 1.0 / static_cast<double>(d);
    for (std::size_t j = 0; j < d; ++j) {
      dx(i, j) = inv_std_[i] * (dxhat[j] - inv_d * sum - xhat_(i, j) * inv_d * sum_h);
    }
  }
  gamma_.touch_all();
  beta_.touch_all();
  return dx;
}

}  // namespace embsizer
