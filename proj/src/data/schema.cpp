#include "embsizer/data/schema.hpp"

#include <cstdio>
#include <set>

#include "embsizer/core/error.hpp"

namespace embsizer::data {

void validate_schema(const Schema& schema) {
  if (schema.empty()) throw ConfigError("schema has no fields");
  std::set<std::string> names;
  for (const auto& f : schema) {
    if (f.cardinality < 1) throw ConfigError("field '" + f.name + "' has cardinality 0");
    if (!names.insert(f.name).second) throw ConfigError("duplicate field name '" + f.name + "'");
  }
}

std::uint64_t schema_hash(const Schema& schema) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ULL;
  };
  for (const auto& f : schema) {
    for (char c : f.name) mix(static_cast<unsigned char>(c));
    mix(0);
    for (int b = 0; b < 4; ++b) mix(static_cast<unsigned char>((f.cardinality >> (8 * b)) & 0xff));
    mix(f.multi_valued ? 1 : 0);
  }
  return h;
}

std::string schema_hash_hex(const Schema& schema) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(schema_hash(schema)));
  return buf;
}

nlohmann::json schema_to_json(const Schema& schema) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& f : schema) {
    arr.push_back({{"name", f.name}, {"cardinality", f.cardinality}, {"multi_valued", f.multi_valued}});
  }
  return arr;
}

Schema schema_from_json(const nlohmann::json& j) {
  Schema schema;
  try {
    for (const auto& f : j) {
      schema.push_back({f.at("name").get<std::string>(), f.at("cardinality").get<std::uint32_t>(),
                        f.value("multi_valued", false)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("schema json: ") + e.what());
  }
  validate_schema(schema);
  return schema;
}

}  // namespace embsizer::data
