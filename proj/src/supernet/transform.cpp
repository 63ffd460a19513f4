#include "embsizer/supernet/transform.hpp"

#include <algorithm>

#include "embsizer/core/error.hpp"

namespace embsizer::supernet {

Transform::Transform(const std::string& name, std::size_t in, std::size_t d_f, const TransformConfig& config,
                     RngStream& rng)
    : use_bn_(config.batch_norm) {
  if (config.depth == 0) throw ConfigError("transform depth must be >= 1");
  for (std::size_t l = 0; l < config.depth; ++l) {
    layers_.emplace_back(name + ".l" + std::to_string(l), l == 0 ? in : d_f, d_f, rng);
  }
  relus_.resize(layers_.size());
  bn_ = BatchNorm(name + ".bn", d_f);
}

void Transform::check(const Matrix& x) const {
  if (x.cols() != in_width()) {
    throw ConfigError("transform for width " + std::to_string(in_width()) + " got width " +
                      std::to_string(x.cols()));
  }
}

Matrix Transform::forward(const Matrix& x, Mode mode) {
  if (mode == Mode::Inference) return predict(x);
  check(x);
  Matrix h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (l > 0) h = relus_[l].forward(h);
    h = layers_[l].forward(h);
  }
  return use_bn_ ? bn_.forward(h, Mode::Train) : h;
}

Matrix Transform::predict(const Matrix& x) const {
  check(x);
  Matrix h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (l > 0) h = relu(h);
    h = layers_[l].predict(h);
  }
  return use_bn_ ? bn_.predict(h) : h;
}

Matrix Transform::backward(const Matrix& dy) {
  Matrix d = use_bn_ ? bn_.backward(dy) : dy;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    d = layers_[l].backward(d);
    if (l > 0) d = relus_[l].backward(d);
  }
  return d;
}

void Transform::collect(std::vector<Parameter*>& out) {
  for (auto& a : layers_) a.collect(out);
  if (use_bn_) bn_.collect(out);
}

void Transform::collect(std::vector<const Parameter*>& out) const {
  for (const auto& a : layers_) a.collect(out);
  if (use_bn_) bn_.collect(out);
}

TransformBank::TransformBank(const std::vector<std::size_t>& sizes, std::size_t d_f, const TransformConfig& config,
                             RngStream& rng)
    : d_f_(d_f), config_(config) {
  std::vector<std::size_t> ordered = sizes;
  std::sort(ordered.begin(), ordered.end());
  for (std::size_t s : ordered) {
    if (contains(s)) continue;
    by_size_.emplace(s, Transform("transform.d" + std::to_string(s), s, d_f, config, rng));
  }
}

Transform& TransformBank::at(std::size_t size) {
  auto it = by_size_.find(size);
  if (it == by_size_.end()) throw ConfigError("no transform for embedding size " + std::to_string(size));
  return it->second;
}

const Transform& TransformBank::at(std::size_t size) const {
  auto it = by_size_.find(size);
  if (it == by_size_.end()) throw ConfigError("no transform for embedding size " + std::to_string(size));
  return it->second;
}

std::vector<std::size_t> TransformBank::sizes() const {
  std::vector<std::size_t> out;
  for (const auto& [s, t] : by_size_) out.push_back(s);
  return out;
}

void TransformBank::collect(std::vector<Parameter*>& out) {
  for (auto& [s, t] : by_size_) t.collect(out);
}

void TransformBank::collect(std::vector<const Parameter*>& out) const {
  for (const auto& [s, t] : by_size_) t.collect(out);
}

}  // namespace embsizer::supernet
