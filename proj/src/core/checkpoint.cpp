#include "embsizer/core/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "embsizer/core/error.hpp"

namespace embsizer {

namespace {

void write_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>((v >> (8 * b)) & 0xffU));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes_[pos_ + b]) << (8 * b);
    pos_ += 4;
    return v;
  }
  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const noexcept { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("checkpoint: truncated container");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void Checkpoint::put(const std::string& name, const Matrix& m) {
  bool fits_f32 = true;
  for (double v : m.values()) fits_f32 = fits_f32 && static_cast<double>(static_cast<float>(v)) == v;
  Record r{fits_f32 ? DType::F32 : DType::F64, static_cast<std::uint32_t>(m.rows()),
           static_cast<std::uint32_t>(m.cols()), {}};
  r.words.reserve(fits_f32 ? m.size() : 2 * m.size());
  for (double v : m.values()) {
    if (fits_f32) {
      r.words.push_back(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    } else {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      r.words.push_back(static_cast<std::uint32_t>(bits));
      r.words.push_back(static_cast<std::uint32_t>(bits >> 32));
    }
  }
  if (!records_.count(name)) order_.push_back(name);
  records_[name] = std::move(r);
}

void Checkpoint::put_u32(const std::string& name, std::span<const std::uint32_t> values) {
  Record r{DType::U32, 1, static_cast<std::uint32_t>(values.size()),
           std::vector<std::uint32_t>(values.begin(), values.end())};
  if (!records_.count(name)) order_.push_back(name);
  records_[name] = std::move(r);
}

const Checkpoint::Record& Checkpoint::find(const std::string& name) const {
  auto it = records_.find(name);
  if (it == records_.end()) throw FormatError("checkpoint: missing record '" + name + "'");
  return it->second;
}

Matrix Checkpoint::get(const std::string& name) const {
  const Record& r = find(name);
  if (r.dtype == DType::U32) throw FormatError("checkpoint: record '" + name + "' is not a float matrix");
  Matrix m(r.rows, r.cols);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m.data()[i] = r.dtype == DType::F32
                      ? static_cast<double>(std::bit_cast<float>(r.words[i]))
                      : std::bit_cast<double>(static_cast<std::uint64_t>(r.words[2 * i]) |
                                              static_cast<std::uint64_t>(r.words[2 * i + 1]) << 32);
  }
  return m;
}

void Checkpoint::get_into(const std::string& name, Matrix& dst) const {
  Matrix m = get(name);
  if (!m.same_shape(dst)) {
    throw FormatError("checkpoint: record '" + name + "' has shape " + std::to_string(m.rows()) +
                      "x" + std::to_string(m.cols()) + ", expected " + std::to_string(dst.rows()) +
                      "x" + std::to_string(dst.cols()));
  }
  dst = std::move(m);
}

std::vector<std::uint32_t> Checkpoint::get_u32(const std::string& name) const {
  const Record& r = find(name);
  if (r.dtype != DType::U32) throw FormatError("checkpoint: record '" + name + "' is not u32");
  return r.words;
}

std::vector<std::string> Checkpoint::names() const { return order_; }

std::vector<std::uint8_t> Checkpoint::serialize() const {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  write_u32(out, kVersion);
  const std::string meta = meta_.dump();
  write_u32(out, static_cast<std::uint32_t>(meta.size()));
  out.insert(out.end(), meta.begin(), meta.end());
  write_u32(out, static_cast<std::uint32_t>(order_.size()));
  for (const std::string& name : order_) {
    const Record& r = records_.at(name);
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    out.push_back(static_cast<std::uint8_t>(r.dtype));
    write_u32(out, r.rows);
    write_u32(out, r.cols);
    for (std::uint32_t w : r.words) write_u32(out, w);
  }
  return out;
}

Checkpoint Checkpoint::deserialize(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  if (in.str(4) != std::string(kMagic, 4)) throw FormatError("checkpoint: bad magic");
  const std::uint32_t version = in.u32();
  if (version != kVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint ckpt;
  const std::string meta = in.str(in.u32());
  try {
    ckpt.meta_ = nlohmann::json::parse(meta);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: bad metadata: ") + e.what());
  }
  const std::uint32_t count = in.u32();
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string name = in.str(in.u32());
    Record r;
    const std::uint8_t dtype = in.u8();
    if (dtype > 2) throw FormatError("checkpoint: unknown dtype in '" + name + "'");
    r.dtype = static_cast<DType>(dtype);
    r.rows = in.u32();
    r.cols = in.u32();
    const std::uint64_t n = static_cast<std::uint64_t>(r.rows) * r.cols * (r.dtype == DType::F64 ? 2 : 1);
    if (n > bytes.size()) throw FormatError("checkpoint: truncated container");
    r.words.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) r.words[i] = in.u32();
    if (ckpt.records_.count(name)) throw FormatError("checkpoint: duplicate record " + name);
    ckpt.order_.push_back(name);
    ckpt.records_[std::move(name)] = std::move(r);
  }
  if (!in.done()) throw FormatError("checkpoint: trailing bytes");
  return ckpt;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("checkpoint: cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw FormatError("checkpoint: write failed for " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("checkpoint: cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace embsizer
