#include "embsizer/data/movielens.hpp"

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "embsizer/core/error.hpp"
#include "embsizer/data/preprocess.hpp"

namespace embsizer::data {

namespace {

std::vector<std::string> split_colons(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find("::", start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 2;
  }
}

template <typename F>
void for_each_record(const std::filesystem::path& path, std::size_t arity, F&& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto parts = split_colons(line);
    if (parts.size() != arity) {
      throw DataError(path.filename().string() + " line " + std::to_string(line_no) + ": expected " +
                      std::to_string(arity) + " fields");
    }
    fn(parts, line_no);
  }
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',') c = ';';
  return s;
}

}  // namespace

CsvConfig convert_movielens(const std::filesystem::path& dir, const std::filesystem::path& out_csv) {
  std::map<std::string, std::vector<std::string>> users;  // id -> gender, age, occupation, zip
  for_each_record(dir / "users.dat", 5, [&](const auto& p, std::size_t) {
    users[p[0]] = {p[1], p[2], p[3], sanitize(p[4])};
  });
  std::map<std::string, std::pair<std::string, std::string>> movies;  // id -> year, genres
  for_each_record(dir / "movies.dat", 3, [&](const auto& p, std::size_t) {
    const std::string& title = p[1];
    std::string year = "unknown";
    const auto open = title.rfind('(');
    if (open != std::string::npos && title.size() >= open + 6) year = title.substr(open + 1, 4);
    movies[p[0]] = {year, sanitize(p[2])};
  });

  std::ofstream out(out_csv);
  if (!out) throw DataError("cannot open " + out_csv.string() + " for writing");
  out << "user_id,gender,age,occupation,zip,movie_id,year,genres,weekend,hour_in_day,label,timestamp\n";
  for_each_record(dir / "ratings.dat", 4, [&](const auto& p, std::size_t line_no) {
    const auto u = users.find(p[0]);
    const auto m = movies.find(p[1]);
    if (u == users.end() || m == movies.end()) {
      throw DataError("ratings.dat line " + std::to_string(line_no) + ": unknown user or movie");
    }
    const int label = mlens_labelize(std::stoi(p[2]));
    const std::int64_t ts = std::stoll(p[3]);
    const TimeFeatures tf = timestamp_expand(ts);
    out << p[0] << ',' << u->second[0] << ',' << u->second[1] << ',' << u->second[2] << ','
        << u->second[3] << ',' << p[1] << ',' << m->second.first << ',' << m->second.second << ','
        << tf.weekend << ',' << tf.hour_in_day << ',' << label << ',' << ts << '\n';
  });

  CsvConfig config;
  config.label_column = "label";
  config.timestamp_column = "timestamp";
  for (const char* name : {"user_id", "gender", "age", "occupation", "zip", "movie_id", "year"})
    config.fields.push_back({name, false, false, 32});
  config.fields.push_back({"genres", true, false, 32});
  config.fields.push_back({"weekend", false, false, 32});
  config.fields.push_back({"hour_in_day", false, false, 32});
  return config;
}

}  // namespace embsizer::data
