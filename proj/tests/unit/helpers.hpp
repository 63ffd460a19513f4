#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "embsizer/core/matrix.hpp"
#include "embsizer/core/rng.hpp"
#include "embsizer/data/dataset.hpp"
#include "embsizer/data/sample_table.hpp"
#include "embsizer/data/schema.hpp"

namespace testutil {

inline embsizer::Matrix random_matrix(std::size_t rows, std::size_t cols, embsizer::RngStream& rng,
                                      double scale = 1.0) {
  embsizer::Matrix m(rows, cols);
  for (double& v : m.values()) v = scale * rng.uniform(-1.0, 1.0);
  return m;
}

// Random rows for `schema`; multi-valued fields get 0..3 values per row.
inline embsizer::data::SampleTable random_batch(const embsizer::data::Schema& schema, std::size_t rows,
                                                embsizer::RngStream& rng) {
  embsizer::data::SampleTable t(schema.size());
  embsizer::data::Sample s;
  s.values.resize(schema.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < schema.size(); ++i) {
      s.values[i].clear();
      const std::size_t k = schema[i].multi_valued ? rng.uniform_int(4) : 1;
      for (std::size_t j = 0; j < k; ++j)
        s.values[i].push_back(static_cast<std::uint32_t>(rng.uniform_int(schema[i].cardinality)));
    }
    s.label = r % 2 == 0 ? 1.0 : 0.0;
    s.timestamp = static_cast<std::int64_t>(r);
    t.append(s);
  }
  return t;
}

inline embsizer::data::Schema small_schema() {
  return {{"a", 7, false}, {"b", 5, false}, {"c", 6, true}};
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("embsizer_" + tag + "_" + std::to_string(embsizer::RngStream(std::random_device{}()).next_u64()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
