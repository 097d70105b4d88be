#include <fstream>
#include <sstream>

#include "lcew/config_file.hpp"

namespace lcew {

double ConfigValue::as_number(const std::string& key) const {
  if (const double* d = std::get_if<double>(&v)) return *d;
  throw std::invalid_argument("config key '" + key + "' must be a number");
}

bool ConfigValue::as_bool(const std::string& key) const {
  if (const bool* b = std::get_if<bool>(&v)) return *b;
  throw std::invalid_argument("config key '" + key + "' must be a boolean");
}

std::string ConfigValue::as_string(const std::string& key) const {
  if (const std::string* s = std::get_if<std::string>(&v)) return *s;
  throw std::invalid_argument("config key '" + key + "' must be a string");
}

std::vector<double> ConfigValue::as_number_list(const std::string& key) const {
  if (const auto* l = std::get_if<std::vector<double>>(&v)) return *l;
  if (const double* d = std::get_if<double>(&v)) return {*d};
  throw std::invalid_argument("config key '" + key + "' must be a number array");
}

std::vector<std::string> ConfigValue::as_string_list(const std::string& key) const {
  if (const auto* l = std::get_if<std::vector<std::string>>(&v)) return *l;
  if (const std::string* s = std::get_if<std::string>(&v)) return {*s};
  throw std::invalid_argument("config key '" + key + "' must be a string array");
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

ConfigValue parse_scalar(const std::string& raw, const std::string& key, int lineno) {
  const std::string s = trim(raw);
  if (s.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty value for '" + key + "'");
  if (s == "true") return {true};
  if (s == "false") return {false};
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": unterminated string for '" + key + "'");
    }
    return {s.substr(1, s.size() - 2)};
  }
  try {
    size_t pos = 0;
    const double d = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return {d};
  } catch (const std::exception&) {
    throw std::invalid_argument("config line " + std::to_string(lineno) + ": bad value '" + s + "' for '" + key + "'");
  }
}

}  // namespace

ConfigMap parse_config_string(const std::string& text) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // strip comments outside of quotes
    bool in_quote = false;
    for (size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_quote = !in_quote;
      if (line[i] == '#' && !in_quote) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument("config line " + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    std::string value = trim(line.substr(eq + 1));
    if (map.count(key)) throw std::invalid_argument("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");

    if (!value.empty() && value.front() == '[') {
      if (value.back() != ']') throw std::invalid_argument("config line " + std::to_string(lineno) + ": unterminated array for '" + key + "'");
      const std::string inner = value.substr(1, value.size() - 2);
      std::vector<std::string> items;
      std::string cur;
      bool quoted = false;
      for (char c : inner) {
        if (c == '"') quoted = !quoted;
        if (c == ',' && !quoted) {
          items.push_back(cur);
          cur.clear();
        } else {
          cur += c;
        }
      }
      if (!trim(cur).empty()) items.push_back(cur);
      std::vector<double> nums;
      std::vector<std::string> strs;
      bool is_string = false;
      for (const auto& item : items) {
        const ConfigValue cv = parse_scalar(item, key, lineno);
        if (std::holds_alternative<std::string>(cv.v)) {
          is_string = true;
          strs.push_back(std::get<std::string>(cv.v));
        } else if (std::holds_alternative<double>(cv.v)) {
          nums.push_back(std::get<double>(cv.v));
        } else {
          throw std::invalid_argument("config line " + std::to_string(lineno) + ": unsupported array element for '" + key + "'");
        }
      }
      if (is_string && !nums.empty()) {
        throw std::invalid_argument("config line " + std::to_string(lineno) + ": mixed array for '" + key + "'");
      }
      if (is_string) map[key] = {strs};
      else map[key] = {nums};
    } else {
      map[key] = parse_scalar(value, key, lineno);
    }
  }
  return map;
}

ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config file not found: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str());
}

double ConfigReader::number(const std::string& key, double fallback) {
  consumed_[key] = true;
  const auto it = map_.find(key);
  return it == map_.end() ? fallback : it->second.as_number(key);
}

bool ConfigReader::boolean(const std::string& key, bool fallback) {
  consumed_[key] = true;
  const auto it = map_.find(key);
  return it == map_.end() ? fallback : it->second.as_bool(key);
}

std::string ConfigReader::text(const std::string& key, const std::string& fallback) {
  consumed_[key] = true;
  const auto it = map_.find(key);
  return it == map_.end() ? fallback : it->second.as_string(key);
}

std::vector<double> ConfigReader::number_list(const std::string& key) {
  consumed_[key] = true;
  const auto it = map_.find(key);
  return it == map_.end() ? std::vector<double>{} : it->second.as_number_list(key);
}

std::vector<std::string> ConfigReader::string_list(const std::string& key) {
  consumed_[key] = true;
  const auto it = map_.find(key);
  return it == map_.end() ? std::vector<std::string>{} : it->second.as_string_list(key);
}

void ConfigReader::reject_unknown() const {
  for (const auto& [key, value] : map_) {
    if (!consumed_.count(key)) {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
}

SimConfig sim_config_from_reader(ConfigReader& r) {
  SimConfig c;
  c.mainline_demand_vph = r.number("demand.mainline_vph", c.mainline_demand_vph);
  c.ramp_demand_vph = r.number("demand.ramp_vph", c.ramp_demand_vph);
  c.segment_length = r.number("road.segment_length", c.segment_length);
  c.merge_x = r.number("road.merge_x", c.merge_x);
  c.lane_width = r.number("road.lane_width", c.lane_width);
  c.warmup_s = r.number("sim.warmup_s", c.warmup_s);
  c.measurement_s = r.number("sim.measurement_s", c.measurement_s);
  c.dt = r.number("sim.dt", c.dt);
  c.seed = static_cast<uint64_t>(r.number("sim.seed", static_cast<double>(c.seed)));
  c.method = method_from_name(r.text("sim.method", method_name(c.method)));
  c.penetration = r.number("sim.penetration", c.penetration);
  c.warning_horizon_s = r.number("sim.warning_horizon_s", c.warning_horizon_s);
  c.ttc_warning_threshold_s = r.number("sim.ttc_warning_threshold_s", c.ttc_warning_threshold_s);
  c.desired_speed_mean = r.number("driver.desired_speed_mean", c.desired_speed_mean);
  c.desired_speed_sd = r.number("driver.desired_speed_sd", c.desired_speed_sd);
  c.desired_speed_lo = r.number("driver.desired_speed_lo", c.desired_speed_lo);
  c.desired_speed_hi = r.number("driver.desired_speed_hi", c.desired_speed_hi);
  c.ramp_entry_speed = r.number("driver.ramp_entry_speed", c.ramp_entry_speed);
  c.mainline_entry_speed = r.number("driver.mainline_entry_speed", c.mainline_entry_speed);
  c.reaction_unequipped_s = r.number("driver.reaction_unequipped_s", c.reaction_unequipped_s);
  c.reaction_equipped_s = r.number("driver.reaction_equipped_s", c.reaction_equipped_s);
  c.speed_cap = r.number("driver.speed_cap", c.speed_cap);
  c.vehicle_length = r.number("driver.vehicle_length", c.vehicle_length);
  c.vehicle_width = r.number("driver.vehicle_width", c.vehicle_width);
  c.spawn_clear_m = r.number("driver.spawn_clear_m", c.spawn_clear_m);
  c.accel_response.mean = r.number("response.accel_mean", c.accel_response.mean);
  c.accel_response.sd = r.number("response.accel_sd", c.accel_response.sd);
  c.accel_response.lo = r.number("response.accel_lo", c.accel_response.lo);
  c.accel_response.hi = r.number("response.accel_hi", c.accel_response.hi);
  c.decel_response.mean = r.number("response.decel_mean", c.decel_response.mean);
  c.decel_response.sd = r.number("response.decel_sd", c.decel_response.sd);
  c.decel_response.lo = r.number("response.decel_lo", c.decel_response.lo);
  c.decel_response.hi = r.number("response.decel_hi", c.decel_response.hi);
  c.response_duration_s = r.number("response.duration_s", c.response_duration_s);
  c.idm.headway_s = r.number("idm.headway_s", c.idm.headway_s);
  c.idm.min_gap = r.number("idm.min_gap", c.idm.min_gap);
  c.idm.a_max = r.number("idm.a_max", c.idm.a_max);
  c.idm.b_comf = r.number("idm.b_comf", c.idm.b_comf);
  c.idm.b_max = r.number("idm.b_max", c.idm.b_max);
  c.idm.delta = r.number("idm.delta", c.idm.delta);
  c.lc.incentive_threshold = r.number("lc.incentive_threshold", c.lc.incentive_threshold);
  c.lc.lead_time_gap_s = r.number("lc.lead_time_gap_s", c.lc.lead_time_gap_s);
  c.lc.lag_time_gap_s = r.number("lc.lag_time_gap_s", c.lc.lag_time_gap_s);
  c.lc.min_gap = r.number("lc.min_gap", c.lc.min_gap);
  c.lc.duration_s = r.number("lc.duration_s", c.lc.duration_s);
  c.lc.cooldown_s = r.number("lc.cooldown_s", c.lc.cooldown_s);
  c.thw_buffer_s = r.number("sim.thw_buffer_s", c.thw_buffer_s);
  c.overlap_tolerance_m = r.number("sim.overlap_tolerance_m", c.overlap_tolerance_m);
  c.use_trained_model = r.boolean("predictor.use_trained_model", c.use_trained_model);
  c.model_path = r.text("predictor.model_path", c.model_path);
  return c;
}

ModelConfig model_config_from_reader(ConfigReader& r) {
  ModelConfig c;
  c.history_steps = static_cast<int>(r.number("model.history_steps", c.history_steps));
  c.future_steps = static_cast<int>(r.number("model.future_steps", c.future_steps));
  c.hidden_dim = static_cast<int>(r.number("model.hidden_dim", c.hidden_dim));
  c.gcn_layers = static_cast<int>(r.number("model.gcn_layers", c.gcn_layers));
  c.txp_layers = static_cast<int>(r.number("model.txp_layers", c.txp_layers));
  c.txp_kernel = static_cast<int>(r.number("model.txp_kernel", c.txp_kernel));
  c.prelu_init = r.number("model.prelu_init", c.prelu_init);
  c.epochs = static_cast<int>(r.number("model.epochs", c.epochs));
  c.lr_initial = r.number("model.lr_initial", c.lr_initial);
  c.lr_later = r.number("model.lr_later", c.lr_later);
  c.lr_switch_epoch = static_cast<int>(r.number("model.lr_switch_epoch", c.lr_switch_epoch));
  c.grad_accum = static_cast<int>(r.number("model.grad_accum", c.grad_accum));
  c.seed = static_cast<uint64_t>(r.number("model.seed", static_cast<double>(c.seed)));
  c.kernel = kernel_from_name(r.text("kernel.kind", kernel_name(c.kernel)));
  c.kernel_params.mi_bins = static_cast<int>(r.number("kernel.mi_bins", c.kernel_params.mi_bins));
  c.kernel_params.mi_min_samples =
      static_cast<int>(r.number("kernel.mi_min_samples", c.kernel_params.mi_min_samples));
  return c;
}

Json sim_config_to_json(const SimConfig& c) {
  Json j;
  j["demand"] = {{"mainline_vph", c.mainline_demand_vph}, {"ramp_vph", c.ramp_demand_vph}};
  j["road"] = {{"segment_length", c.segment_length}, {"merge_x", c.merge_x}, {"lane_width", c.lane_width}};
  j["sim"] = {{"warmup_s", c.warmup_s},
              {"measurement_s", c.measurement_s},
              {"dt", c.dt},
              {"seed", c.seed},
              {"method", method_name(c.method)},
              {"penetration", c.penetration},
              {"warning_horizon_s", c.warning_horizon_s},
              {"ttc_warning_threshold_s", c.ttc_warning_threshold_s},
              {"thw_buffer_s", c.thw_buffer_s},
              {"overlap_tolerance_m", c.overlap_tolerance_m}};
  j["driver"] = {{"desired_speed_mean", c.desired_speed_mean},
                 {"desired_speed_sd", c.desired_speed_sd},
                 {"desired_speed_lo", c.desired_speed_lo},
                 {"desired_speed_hi", c.desired_speed_hi},
                 {"ramp_entry_speed", c.ramp_entry_speed},
                 {"mainline_entry_speed", c.mainline_entry_speed},
                 {"reaction_unequipped_s", c.reaction_unequipped_s},
                 {"reaction_equipped_s", c.reaction_equipped_s},
                 {"speed_cap", c.speed_cap},
                 {"vehicle_length", c.vehicle_length},
                 {"vehicle_width", c.vehicle_width},
                 {"spawn_clear_m", c.spawn_clear_m}};
  j["response"] = {{"accel_mean", c.accel_response.mean},
                   {"accel_sd", c.accel_response.sd},
                   {"accel_lo", c.accel_response.lo},
                   {"accel_hi", c.accel_response.hi},
                   {"decel_mean", c.decel_response.mean},
                   {"decel_sd", c.decel_response.sd},
                   {"decel_lo", c.decel_response.lo},
                   {"decel_hi", c.decel_response.hi},
                   {"duration_s", c.response_duration_s}};
  j["idm"] = {{"headway_s", c.idm.headway_s}, {"min_gap", c.idm.min_gap},
              {"a_max", c.idm.a_max},         {"b_comf", c.idm.b_comf},
              {"b_max", c.idm.b_max},         {"delta", c.idm.delta}};
  j["lc"] = {{"incentive_threshold", c.lc.incentive_threshold},
             {"lead_time_gap_s", c.lc.lead_time_gap_s},
             {"lag_time_gap_s", c.lc.lag_time_gap_s},
             {"min_gap", c.lc.min_gap},
             {"duration_s", c.lc.duration_s},
             {"cooldown_s", c.lc.cooldown_s}};
  j["predictor"] = {{"use_trained_model", c.use_trained_model}, {"model_path", c.model_path}};
  return j;
}

Json model_config_to_json(const ModelConfig& c) {
  Json j;
  j["model"] = {{"history_steps", c.history_steps},
                {"future_steps", c.future_steps},
                {"hidden_dim", c.hidden_dim},
                {"gcn_layers", c.gcn_layers},
                {"txp_layers", c.txp_layers},
                {"txp_kernel", c.txp_kernel},
                {"prelu_init", c.prelu_init},
                {"epochs", c.epochs},
                {"lr_initial", c.lr_initial},
                {"lr_later", c.lr_later},
                {"lr_switch_epoch", c.lr_switch_epoch},
                {"grad_accum", c.grad_accum},
                {"seed", c.seed}};
  j["kernel"] = {{"kind", kernel_name(c.kernel)},
                 {"mi_bins", c.kernel_params.mi_bins},
                 {"mi_min_samples", c.kernel_params.mi_min_samples}};
  return j;
}

}  // namespace lcew
