#include "embsizer/search/attention.hpp"

#include <cmath>

#include "embsizer/core/error.hpp"

namespace embsizer::search {

namespace {

Matrix columns(const Matrix& m, std::size_t begin, std::size_t width) {
  Matrix out(m.rows(), width);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < width; ++c) out(r, c) = m(r, begin + c);
  return out;
}

void put_columns(Matrix& m, std::size_t begin, const Matrix& part) {
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < part.cols(); ++c) m(r, begin + c) = part(r, c);
}

}  // namespace

MultiHeadAttention::MultiHeadAttention(const std::string& name, std::size_t width, std::size_t heads,
                                       RngStream& rng)
    : heads_(heads),
      wq_(name + ".q", width, width, rng),
      wk_(name + ".k", width, width, rng),
      wv_(name + ".v", width, width, rng),
      wo_(name + ".o", width, width, rng) {
  if (heads == 0 || width % heads != 0) throw ConfigError("attention width must be divisible by the head count");
}

Matrix MultiHeadAttention::attend(const Matrix& q, const Matrix& k, const Matrix& v, Cache* cache) const {
  const std::size_t dk = q.cols() / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  Matrix out(q.rows(), q.cols());
  if (cache) cache->attn.clear();
  for (std::size_t h = 0; h < heads_; ++h) {
    Matrix s = matmul_nt(columns(q, h * dk, dk), columns(k, h * dk, dk));
    scale_inplace(s, scale);
    Matrix a = softmax_rows(s);
    put_columns(out, h * dk, matmul(a, columns(v, h * dk, dk)));
    if (cache) cache->attn.push_back(std::move(a));
  }
  return out;
}

Matrix MultiHeadAttention::forward(const Matrix& x) {
  cache_.q = wq_.forward(x);
  cache_.k = wk_.forward(x);
  cache_.v = wv_.forward(x);
  return wo_.forward(attend(cache_.q, cache_.k, cache_.v, &cache_));
}

Matrix MultiHeadAttention::predict(const Matrix& x) const {
  return wo_.predict(attend(wq_.predict(x), wk_.predict(x), wv_.predict(x), nullptr));
}

Matrix MultiHeadAttention::backward(const Matrix& dy) {
  const Matrix d_concat = wo_.backward(dy);
  const std::size_t n = dy.rows();
  const std::size_t width = dy.cols();
  const std::size_t dk = width / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  Matrix dq(n, width), dk_all(n, width), dv(n, width);
  for (std::size_t h = 0; h < heads_; ++h) {
    const Matrix& a = cache_.attn[h];
    const Matrix d_out = columns(d_concat, h * dk, dk);
    const Matrix qh = columns(cache_.q, h * dk, dk);
    const Matrix kh = columns(cache_.k, h * dk, dk);
    const Matrix vh = columns(cache_.v, h * dk, dk);
    const Matrix da = matmul_nt(d_out, vh);
    put_columns(dv, h * dk, matmul_tn(a, d_out));
    Matrix ds(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += da(i, j) * a(i, j);
      for (std::size_t j = 0; j < n; ++j) ds(i, j) = a(i, j) * (da(i, j) - dot) * scale;
    }
    put_columns(dq, h * dk, matmul(ds, kh));
    put_columns(dk_all, h * dk, matmul_tn(ds, qh));
  }
  Matrix dx = wq_.backward(dq);
  add_inplace(dx, wk_.backward(dk_all));
  add_inplace(dx, wv_.backward(dv));
  return dx;
}

void MultiHeadAttention::collect(std::vector<Parameter*>& out) {
  wq_.collect(out);
  wk_.collect(out);
  wv_.collect(out);
  wo_.collect(out);
}

void MultiHeadAttention::collect(std::vector<const Parameter*>& out) const {
  wq_.collect(out);
  wk_.collect(out);
  wv_.collect(out);
  wo_.collect(out);
}

EncoderBlock::EncoderBlock(const std::string& name, std::size_t width, std::size_t heads, std::size_t ff_width,
                           RngStream& rng)
    : attn_(name + ".attn", width, heads, rng),
      ln1_(name + ".ln1", width),
      ln2_(name + ".ln2", width),
      ff1_(name + ".ff1", width, ff_width, rng),
      ff2_(name + ".ff2", ff_width, width, rng) {}

Matrix EncoderBlock::forward(const Matrix& x) {
  Matrix h = attn_.forward(x);
  add_inplace(h, x);
  h = ln1_.forward(h);
  Matrix f = ff2_.forward(relu_.forward(ff1_.forward(h)));
  add_inplace(f, h);
  return ln2_.forward(f);
}

Matrix EncoderBlock::predict(const Matrix& x) const {
  Matrix h = attn_.predict(x);
  add_inplace(h, x);
  h = ln1_.predict(h);
  Matrix f = ff2_.predict(relu(ff1_.predict(h)));
  add_inplace(f, h);
  return ln2_.predict(f);
}

Matrix EncoderBlock::backward(const Matrix& dy) {
  Matrix dh = ln2_.backward(dy);
  Matrix d_ff = ff1_.backward(relu_.backward(ff2_.backward(dh)));
  add_inplace(dh, d_ff);
  Matrix dx = ln1_.backward(dh);
  Matrix d_attn = attn_.backward(dx);
  add_inplace(dx, d_attn);
  return dx;
}

void EncoderBlock::collect(std::vector<Parameter*>& out) {
  attn_.collect(out);
  ln1_.collect(out);
  ff1_.collect(out);
  ff2_.collect(out);
  ln2_.collect(out);
}

void EncoderBlock::collect(std::vector<const Parameter*>& out) const {
  attn_.collect(out);
  ln1_.collect(out);
  ff1_.collect(out);
  ff2_.collect(out);
  ln2_.collect(out);
}

}  // namespace embsizer::search
