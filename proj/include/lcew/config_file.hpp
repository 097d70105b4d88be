#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "lcew/microsim.hpp"
#include "lcew/stgcnn.hpp"

namespace lcew {

using Json = nlohmann::json;

// Flat TOML subset: comments, [section] headers, key = value with numbers,
// booleans, quoted strings and homogeneous arrays. Keys are flattened to
// "section.key".
struct ConfigValue {
  std::variant<double, bool, std::string, std::vector<double>, std::vector<std::string>> v;

  double as_number(const std::string& key) const;
  bool as_bool(const std::string& key) const;
  std::string as_string(const std::string& key) const;
  std::vector<double> as_number_list(const std::string& key) const;
  std::vector<std::string> as_string_list(const std::string& key) const;
};

using ConfigMap = std::map<std::string, ConfigValue>;

ConfigMap parse_config_file(const std::string& path);
ConfigMap parse_config_string(const std::string& text);

// Typed views over the flat map. Every consumed key is checked off; a key
// nobody consumed raises std::invalid_argument naming it.
class ConfigReader {
 public:
  explicit ConfigReader(ConfigMap map) : map_(std::move(map)) {}

  bool has(const std::string& key) const { return map_.count(key) > 0; }
  double number(const std::string& key, double fallback);
  bool boolean(const std::string& key, bool fallback);
  std::string text(const std::string& key, const std::string& fallback);
  std::vector<double> number_list(const std::string& key);
  std::vector<std::string> string_list(const std::string& key);

  // Throws if any key was never consumed.
  void reject_unknown() const;

 private:
  ConfigMap map_;
  std::map<std::string, bool> consumed_;
};

// Applies [sim]/[demand]/... keys onto defaults; rejects unknown keys.
SimConfig sim_config_from_reader(ConfigReader& reader);
// Applies [model]/[kernel] keys onto defaults.
ModelConfig model_config_from_reader(ConfigReader& reader);

Json sim_config_to_json(const SimConfig& cfg);
Json model_config_to_json(const ModelConfig& cfg);

}  // namespace lcew
