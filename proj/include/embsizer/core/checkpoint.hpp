#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embsizer/core/matrix.hpp"

namespace embsizer {

// Versioned binary container shared by model checkpoints and split caches.
//
//   "ADSS" | u32 version | u32 meta_len | meta (UTF-8 JSON) | u32 count |
//   count x { u32 name_len | name | u8 dtype | u32 rows | u32 cols | payload }
//
// All integers little-endian. dtype 0 = 32-bit IEEE float, dtype 1 = u32
// (index data), dtype 2 = 64-bit IEEE float. A matrix is written as 32-bit
// floats when every value is float-representable (always the case for F32
// models) and as 64-bit floats otherwise, so round trips are bit-exact.
class Checkpoint {
 public:
  static constexpr std::uint32_t kVersion = 1;
  static constexpr char kMagic[4] = {'A', 'D', 'S', 'S'};

  enum class DType : std::uint8_t { F32 = 0, U32 = 1, F64 = 2 };

  nlohmann::json& meta() noexcept { return meta_; }
  const nlohmann::json& meta() const noexcept { return meta_; }

  void put(const std::string& name, const Matrix& m);
  void put_u32(const std::string& name, std::span<const std::uint32_t> values);

  bool contains(const std::string& name) const { return records_.count(name) != 0; }
  Matrix get(const std::string& name) const;
  // Copies a stored matrix into `dst`, which must already have its shape.
  void get_into(const std::string& name, Matrix& dst) const;
  std::vector<std::uint32_t> get_u32(const std::string& name) const;
  std::vector<std::string> names() const;

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  std::vector<std::uint8_t> serialize() const;
  static Checkpoint deserialize(std::span<const std::uint8_t> bytes);

 private:
  struct Record {
    DType dtype = DType::F32;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<std::uint32_t> words;  // raw payload; F64 values take two words, low first
  };
  const Record& find(const std::string& name) const;

  nlohmann::json meta_ = nlohmann::json::object();
  std::map<std::string, Record> records_;
  std::vector<std::string> order_;
};

}  // namespace embsizer
