#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace embsizer::data {

// MovieLens rating to click label: 1 iff rating > 3. Ratings outside 1..5
// raise DataError.
int mlens_labelize(int rating);

struct TimeFeatures {
  int weekend = 0;       // 1 on Saturday/Sunday (UTC)
  int hour_in_day = 0;   // 0..23 (UTC)

  friend bool operator==(const TimeFeatures&, const TimeFeatures&) = default;
};

TimeFeatures timestamp_expand(std::int64_t posix_seconds);

// Equal-frequency bucketing fitted on training values. Boundaries are the
// k/B quantiles (k = 1..B-1) of the fitted sample; values outside the fitted
// range clamp to the end buckets.
class QuantileBucketizer {
 public:
  static constexpr std::size_t kDefaultBuckets = 32;

  QuantileBucketizer() = default;
  static QuantileBucketizer fit(std::span<const double> train_values,
                                std::size_t num_buckets = kDefaultBuckets);

  std::size_t num_buckets() const noexcept { return boundaries_.size() + 1; }
  std::span<const double> boundaries() const noexcept { return boundaries_; }
  std::size_t bucket(double v) const;

 private:
  std::vector<double> boundaries_;
};

}  // namespace embsizer::data
