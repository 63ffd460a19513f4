#pragma once

#include <filesystem>

#include "embsizer/data/csv_loader.hpp"

namespace embsizer::data {

// Converts the MovieLens-1M distribution (ratings.dat, users.dat,
// movies.dat; '::'-separated) into the CSV contract: ten categorical fields
// (user_id, gender, age, occupation, zip, movie_id, year, genres, weekend,
// hour_in_day), a binary label (rating > 3) and the rating timestamp for the
// chronological 8:1:1 split. Returns the matching loader config.
CsvConfig convert_movielens(const std::filesystem::path& ml1m_dir,
                            const std::filesystem::path& out_csv);

}  // namespace embsizer::data
