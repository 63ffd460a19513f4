#pragma once

#include <vector>

#include "embsizer/core/layers.hpp"

namespace embsizer::search {

// Multi-head self-attention over the rows (tokens) of x.
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(const std::string& name, std::size_t width, std::size_t heads, RngStream& rng);

  Matrix forward(const Matrix& x);
  Matrix predict(const Matrix& x) const;
  Matrix backward(const Matrix& dy);

  void collect(std::vector<Parameter*>& out);
  void collect(std::vector<const Parameter*>& out) const;

 private:
  struct Cache {
    Matrix q, k, v;
    std::vector<Matrix> attn;  // per head, tokens x tokens
  };
  Matrix attend(const Matrix& q, const Matrix& k, const Matrix& v, Cache* cache) const;

  std::size_t heads_ = 1;
  Affine wq_, wk_, wv_, wo_;
  Cache cache_;
};

// Post-norm transformer encoder block:
//   h = LN1(x + MHA(x)),  y = LN2(h + W2 relu(W1 h)).
class EncoderBlock {
 public:
  EncoderBlock() = default;
  EncoderBlock(const std::string& name, std::size_t width, std::size_t heads, std::size_t ff_width,
               RngStream& rng);

  Matrix forward(const Matrix& x);
  Matrix predict(const Matrix& x) const;
  Matrix backward(const Matrix& dy);

  void collect(std::vector<Parameter*>& out);
  void collect(std::vector<const Parameter*>& out) const;

 private:
  MultiHeadAttention attn_;
  LayerNorm ln1_, ln2_;
  Affine ff1_, ff2_;
  Relu relu_;
};

}  // namespace embsizer::search
