#pragma once

#include <span>
#include <vector>

#include "embsizer/search/attention.hpp"

namespace embsizer::search {

struct PolicyConfig {
  std::size_t d_model = 32;
  std::size_t heads = 4;
  std::size_t ff_width = 64;
  double token_init = 1.0;
};

// Transformer policy. Token i is the field-i embedding plus the embedding of
// field i's current size; one encoder block mixes the tokens and an affine
// head (zero-initialized, so the first P is uniform) maps each token to T
// logits. Row softmax gives the transition matrix P.
class PolicyNet {
 public:
  PolicyNet() = default;
  PolicyNet(std::size_t fields, std::size_t candidates, const PolicyConfig& config, RngStream& rng);

  std::size_t fields() const noexcept { return field_emb_.value.rows(); }
  std::size_t candidates() const noexcept { return size_emb_.value.rows(); }

  Matrix logits(std::span<const std::uint32_t> state) const;
  Matrix probabilities(std::span<const std::uint32_t> state) const;
  // Train-mode pass; returns P and caches what backward needs.
  Matrix forward(std::span<const std::uint32_t> state);
  // Accumulates parameter gradients from d loss / d logits.
  void backward(const Matrix& d_logits);

  Parameter& field_embedding() noexcept { return field_emb_; }
  Parameter& size_embedding() noexcept { return size_emb_; }
  Affine& head() noexcept { return head_; }

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

 private:
  Matrix tokens(std::span<const std::uint32_t> state) const;

  Parameter field_emb_;
  Parameter size_emb_;
  EncoderBlock encoder_;
  Affine head_;
  std::vector<std::uint32_t> state_;
};

// d loss / d logits for a row softmax, given d loss / d P.
Matrix softmax_backward(const Matrix& p, const Matrix& d_p);

// Mean over rows of the Shannon entropy (nats).
double mean_row_entropy(const Matrix& p);

}  // namespace embsizer::search
