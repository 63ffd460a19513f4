#pragma once

#include <map>
#include <vector>

#include "embsizer/core/layers.hpp"

namespace embsizer::supernet {

struct TransformConfig {
  // Affine layers (ReLU between them), followed by batch normalization.
  std::size_t depth = 1;
  bool batch_norm = true;
};

// Maps width-d embeddings to the unified width d_f.
class Transform {
 public:
  Transform() = default;
  Transform(const std::string& name, std::size_t in, std::size_t d_f, const TransformConfig& config,
            RngStream& rng);

  std::size_t in_width() const noexcept { return layers_.front().in_features(); }

  Matrix forward(const Matrix& x, Mode mode);
  Matrix predict(const Matrix& x) const;
  Matrix backward(const Matrix& dy);

  bool has_batch_norm() const noexcept { return use_bn_; }
  BatchNorm& batch_norm() noexcept { return bn_; }
  const BatchNorm& batch_norm() const noexcept { return bn_; }
  std::vector<Affine>& layers() noexcept { return layers_; }

  void collect(std::vector<Parameter*>& out);
  void collect(std::vector<const Parameter*>& out) const;

 private:
  void check(const Matrix& x) const;

  std::vector<Affine> layers_;
  std::vector<Relu> relus_;
  BatchNorm bn_;
  bool use_bn_ = true;
};

// One transform per embedding size, shared by every field using that size.
class TransformBank {
 public:
  TransformBank() = default;
  TransformBank(const std::vector<std::size_t>& sizes, std::size_t d_f, const TransformConfig& config,
                RngStream& rng);

  bool contains(std::size_t size) const { return by_size_.count(size) != 0; }
  Transform& at(std::size_t size);
  const Transform& at(std::size_t size) const;
  std::vector<std::size_t> sizes() const;
  std::size_t d_f() const noexcept { return d_f_; }
  const TransformConfig& config() const noexcept { return config_; }

  void collect(std::vector<Parameter*>& out);
  void collect(std::vector<const Parameter*>& out) const;

 private:
  std::map<std::size_t, Transform> by_size_;
  std::size_t d_f_ = 0;
  TransformConfig config_;
};

}  // namespace embsizer::supernet
