#include "embsizer/search/policy.hpp"

#include <cmath>

#include "embsizer/core/error.hpp"
#include "embsizer/core/rng.hpp"

namespace embsizer::search {

PolicyNet::PolicyNet(std::size_t fields, std::size_t candidates, const PolicyConfig& config, RngStream& rng)
    : field_emb_("policy.field_emb", fields, config.d_model),
      size_emb_("policy.size_emb", candidates, config.d_model) {
  if (fields == 0 || candidates == 0) throw ConfigError("policy needs at least one field and one candidate");
  field_emb_.init_uniform(rng, config.token_init);
  size_emb_.init_uniform(rng, config.token_init);
  encoder_ = EncoderBlock("policy.encoder", config.d_model, config.heads, config.ff_width, rng);
  head_ = Affine("policy.head", config.d_model, candidates, rng);
  head_.weight().init_zero();
}

Matrix PolicyNet::tokens(std::span<const std::uint32_t> state) const {
  if (state.size() != fields()) throw ConfigError("policy state length differs from the field count");
  Matrix x(fields(), field_emb_.value.cols());
  for (std::size_t i = 0; i < fields(); ++i) {
    if (state[i] >= candidates()) throw ConfigError("policy state holds an invalid candidate index");
    auto f = field_emb_.value.row(i);
    auto s = size_emb_.value.row(state[i]);
    auto out = x.row(i);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = f[k] + s[k];
  }
  return x;
}

Matrix PolicyNet::logits(std::span<const std::uint32_t> state) const {
  return head_.predict(encoder_.predict(tokens(state)));
}

Matrix PolicyNet::probabilities(std::span<const std::uint32_t> state) const { return softmax_rows(logits(state)); }

Matrix PolicyNet::forward(std::span<const std::uint32_t> state) {
  Matrix x = tokens(state);
  state_.assign(state.begin(), state.end());
  return softmax_rows(head_.forward(encoder_.forward(x)));
}

void PolicyNet::backward(const Matrix& d_logits) {
  Matrix dx = encoder_.backward(head_.backward(d_logits));
  for (std::size_t i = 0; i < fields(); ++i) {
    auto g = dx.row(i);
    auto df = field_emb_.grad.row(i);
    auto ds = size_emb_.grad.row(state_[i]);
    for (std::size_t k = 0; k < g.size(); ++k) {
      df[k] += g[k];
      ds[k] += g[k];
    }
  }
  field_emb_.touch_all();
  size_emb_.touch_all();
}

std::vector<Parameter*> PolicyNet::parameters() {
  std::vector<Parameter*> out{&field_emb_, &size_emb_};
  encoder_.collect(out);
  head_.collect(out);
  return out;
}

std::vector<const Parameter*> PolicyNet::parameters() const {
  std::vector<const Parameter*> out{&field_emb_, &size_emb_};
  encoder_.collect(out);
  head_.collect(out);
  return out;
}

Matrix softmax_backward(const Matrix& p, const Matrix& d_p) {
  Matrix out(p.rows(), p.cols());
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double dot = 0.0;
    for (std::size_t j = 0; j < p.cols(); ++j) dot += d_p(i, j) * p(i, j);
    for (std::size_t j = 0; j < p.cols(); ++j) out(i, j) = p(i, j) * (d_p(i, j) - dot);
  }
  return out;
}

double mean_row_entropy(const Matrix& p) {
  if (p.rows() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i)
    for (double x : p.row(i))
      if (x > 0.0) total -= x * std::log(x);
  return total / static_cast<double>(p.rows());
}

}  // namespace embsizer::search
