#include "embsizer/data/preprocess.hpp"

#include <algorithm>
#include <chrono>
#include <string>

#include "embsizer/core/error.hpp"

namespace embsizer::data {

int mlens_labelize(int rating) {
  if (rating < 1 || rating > 5) throw DataError("rating " + std::to_string(rating) + " outside 1..5");
  return rating > 3 ? 1 : 0;
}

TimeFeatures timestamp_expand(std::int64_t posix_seconds) {
  using namespace std::chrono;
  const sys_seconds t{seconds{posix_seconds}};
  const sys_days day = floor<days>(t);
  const weekday wd{day};
  const auto hour = duration_cast<hours>(t - day).count();
  return {(wd == Saturday || wd == Sunday) ? 1 : 0, static_cast<int>(hour)};
}

QuantileBucketizer QuantileBucketizer::fit(std::span<const double> train_values,
                                           std::size_t num_buckets) {
  if (num_buckets == 0) throw ConfigError("bucketizer: zero buckets");
  if (train_values.empty()) throw DataError("bucketizer: no training values to fit");
  std::vector<double> sorted(train_values.begin(), train_values.end());
  std::sort(sorted.begin(), sorted.end());
  QuantileBucketizer b;
  const std::size_t n = sorted.size();
  for (std::size_t k = 1; k < num_buckets; ++k) b.boundaries_.push_back(sorted[k * n / num_buckets]);
  return b;
}

std::size_t QuantileBucketizer::bucket(double v) const {
  return static_cast<std::size_t>(std::upper_bound(boundaries_.begin(), boundaries_.end(), v) -
                                  boundaries_.begin());
}

}  // namespace embsizer::data
