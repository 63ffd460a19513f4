#include "embsizer/data/csv_loader.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "embsizer/core/error.hpp"
#include "embsizer/data/preprocess.hpp"

namespace embsizer::data {

namespace {

constexpr char kMultiSeparator = '|';

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

std::vector<std::string> split_multi(const std::string& cell) {
  if (cell.empty()) return {};
  return split_line(cell, kMultiSeparator);
}

struct RawRow {
  std::size_t line = 0;
  std::vector<std::string> cells;  // per configured field
  double label = 0.0;
  std::int64_t timestamp = 0;
};

std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

}  // namespace

CsvConfig csv_config_from_json(const nlohmann::json& j) {
  CsvConfig c;
  try {
    c.label_column = j.at("label").get<std::string>();
    if (j.contains("timestamp") && !j.at("timestamp").is_null())
      c.timestamp_column = j.at("timestamp").get<std::string>();
    for (const auto& f : j.at("fields")) {
      CsvFieldConfig fc;
      fc.column = f.at("column").get<std::string>();
      fc.multi_valued = f.value("multi_valued", false);
      fc.numeric = f.value("numeric", false);
      fc.buckets = f.value("buckets", std::size_t{32});
      c.fields.push_back(fc);
    }
    if (j.contains("split")) {
      const auto r = j.at("split").get<std::vector<double>>();
      if (r.size() != 3) throw ConfigError("csv config: split needs three ratios");
      c.ratios = {r[0], r[1], r[2]};
    }
    const std::string delim = j.value("delimiter", std::string(","));
    if (delim.size() != 1) throw ConfigError("csv config: delimiter must be one character");
    c.delimiter = delim[0];
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("csv config: ") + e.what());
  }
  if (c.fields.empty()) throw ConfigError("csv config: no fields");
  for (const auto& f : c.fields)
    if (f.numeric && f.multi_valued) throw ConfigError("csv config: numeric field cannot be multi-valued");
  return c;
}

nlohmann::json csv_config_to_json(const CsvConfig& c) {
  nlohmann::json fields = nlohmann::json::array();
  for (const auto& f : c.fields) {
    fields.push_back({{"column", f.column}, {"multi_valued", f.multi_valued}, {"numeric", f.numeric},
                      {"buckets", f.buckets}});
  }
  nlohmann::json j = {{"label", c.label_column},
                      {"fields", fields},
                      {"split", {c.ratios.train, c.ratios.validation, c.ratios.test}},
                      {"delimiter", std::string(1, c.delimiter)}};
  j["timestamp"] = c.timestamp_column ? nlohmann::json(*c.timestamp_column) : nlohmann::json(nullptr);
  return j;
}

DatasetSplit load_csv(const std::filesystem::path& path, const CsvConfig& config) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_line(line, config.delimiter);
  auto column_of = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw DataError(path.string() + ": missing column '" + name + "'");
  };
  const std::size_t label_col = column_of(config.label_column);
  const std::optional<std::size_t> ts_col =
      config.timestamp_column ? std::optional(column_of(*config.timestamp_column)) : std::nullopt;
  std::vector<std::size_t> field_cols;
  for (const auto& f : config.fields) field_cols.push_back(column_of(f.column));

  std::vector<RawRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_line(line, config.delimiter);
    if (cells.size() != header.size()) {
      throw DataError(at_line(line_no) + "expected " + std::to_string(header.size()) + " cells, got " +
                      std::to_string(cells.size()));
    }
    RawRow r;
    r.line = line_no;
    const std::string& lab = cells[label_col];
    if (lab == "0") {
      r.label = 0.0;
    } else if (lab == "1") {
      r.label = 1.0;
    } else {
      throw DataError(at_line(line_no) + "label '" + lab + "' is not 0 or 1");
    }
    if (ts_col) {
      const std::string& t = cells[*ts_col];
      auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), r.timestamp);
      if (ec != std::errc() || p != t.data() + t.size())
        throw DataError(at_line(line_no) + "bad timestamp '" + t + "'");
    }
    for (std::size_t c : field_cols) r.cells.push_back(std::move(cells[c]));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw DataError(path.string() + ": no data rows");

  // Deterministic order: (timestamp, line number).
  std::stable_sort(rows.begin(), rows.end(), [](const RawRow& a, const RawRow& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.line < b.line;
  });
  const SplitSizes sizes = split_sizes(rows.size(), config.ratios);

  const std::size_t m = config.fields.size();
  DatasetSplit split;
  split.vocabularies.assign(m, {});
  std::vector<std::unordered_map<std::string, std::uint32_t>> vocab(m);
  std::vector<QuantileBucketizer> buckets(m);

  for (std::size_t f = 0; f < m; ++f) {
    const auto& fc = config.fields[f];
    if (fc.numeric) {
      std::vector<double> values;
      for (std::size_t r = 0; r < sizes.train; ++r) {
        const std::string& cell = rows[r].cells[f];
        if (cell.empty()) continue;
        try {
          std::size_t used = 0;
          values.push_back(std::stod(cell, &used));
          if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
          throw DataError(at_line(rows[r].line) + "non-numeric value '" + cell + "' in '" + fc.column + "'");
        }
      }
      if (values.empty()) values.push_back(0.0);
      buckets[f] = QuantileBucketizer::fit(values, fc.buckets);
      split.vocabularies[f].push_back("<missing>");
      for (std::size_t b = 0; b < buckets[f].num_buckets(); ++b)
        split.vocabularies[f].push_back("bucket" + std::to_string(b));
      split.schema.push_back({fc.column, static_cast<std::uint32_t>(buckets[f].num_buckets() + 1), false});
    } else {
      split.vocabularies[f].push_back("<oov>");
      for (std::size_t r = 0; r < sizes.train; ++r) {
        const auto values = fc.multi_valued ? split_multi(rows[r].cells[f])
                                            : std::vector<std::string>{rows[r].cells[f]};
        for (const auto& v : values) {
          if (vocab[f].emplace(v, static_cast<std::uint32_t>(split.vocabularies[f].size())).second)
            split.vocabularies[f].push_back(v);
        }
      }
      split.schema.push_back({fc.column, static_cast<std::uint32_t>(split.vocabularies[f].size()), fc.multi_valued});
    }
  }
  validate_schema(split.schema);

  auto encode = [&](const RawRow& r) {
    Sample s;
    s.label = r.label;
    s.timestamp = r.timestamp;
    for (std::size_t f = 0; f < m; ++f) {
      const auto& fc = config.fields[f];
      std::vector<std::uint32_t> idx;
      if (fc.numeric) {
        const std::string& cell = r.cells[f];
        if (cell.empty()) {
          idx.push_back(0);
        } else {
          double v = 0.0;
          try {
            std::size_t used = 0;
            v = std::stod(cell, &used);
            if (used != cell.size()) throw std::invalid_argument(cell);
          } catch (const std::exception&) {
            throw DataError(at_line(r.line) + "non-numeric value '" + cell + "' in '" + fc.column + "'");
          }
          idx.push_back(static_cast<std::uint32_t>(1 + buckets[f].bucket(v)));
        }
      } else {
        const auto values = fc.multi_valued ? split_multi(r.cells[f]) : std::vector<std::string>{r.cells[f]};
        for (const auto& v : values) {
          auto it = vocab[f].find(v);
          idx.push_back(it == vocab[f].end() ? 0U : it->second);
        }
      }
      s.values.push_back(std::move(idx));
    }
    return s;
  };

  split.train = SampleTable(m);
  split.validation = SampleTable(m);
  split.test = SampleTable(m);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    SampleTable& dst = r < sizes.train ? split.train
                       : r < sizes.train + sizes.validation ? split.validation
                                                            : split.test;
    dst.append(encode(rows[r]));
  }
  return split;
}

CsvConfig write_csv(const std::filesystem::path& path, const DatasetSplit& split) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  CsvConfig config;
  config.label_column = "label";
  config.timestamp_column = "timestamp";
  const std::size_t m = split.schema.size();
  for (std::size_t f = 0; f < m; ++f) {
    out << split.schema[f].name << ',';
    config.fields.push_back({split.schema[f].name, split.schema[f].multi_valued, false, 32});
  }
  out << "label,timestamp\n";
  auto raw = [&](std::size_t f, std::uint32_t idx) -> std::string {
    if (f < split.vocabularies.size() && idx < split.vocabularies[f].size()) return split.vocabularies[f][idx];
    return "v" + std::to_string(idx);
  };
  for (const SampleTable* t : {&split.train, &split.validation, &split.test}) {
    for (std::size_t r = 0; r < t->size(); ++r) {
      for (std::size_t f = 0; f < m; ++f) {
        auto vals = t->column(f).values(r);
        for (std::size_t k = 0; k < vals.size(); ++k) out << (k ? "|" : "") << raw(f, vals[k]);
        out << ',';
      }
      out << static_cast<int>(t->labels()[r]) << ',' << t->timestamps()[r] << '\n';
    }
  }
  return config;
}

}  // namespace embsizer::data
