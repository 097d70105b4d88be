#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lcew/artifact_io.hpp"

namespace lcew {

std::string config_hash(const Json& config) {
  const std::string dump = config.dump();
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void stamp_artifact(Json& j, uint64_t seed, const Json& config) {
  j["schema_version"] = kSchemaVersion;
  j["seed"] = seed;
  j["config_hash"] = config_hash(config);
}

Json scene_to_json(const Scene& scene) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["ego_index"] = scene.ego_index;
  j["vehicle_ids"] = scene.vehicle_ids;
  j["t0"] = scene.t0;
  const int t_steps = scene.history_steps(), f_steps = scene.future_steps();
  const int n = scene.num_vehicles();
  Json hist = Json::array(), fut = Json::array();
  for (int t = 0; t < t_steps; ++t) {
    Json row = Json::array();
    for (int i = 0; i < n; ++i) {
      row.push_back({scene.history.at(t, 0, i), scene.history.at(t, 1, i)});
    }
    hist.push_back(row);
  }
  for (int f = 0; f < f_steps; ++f) {
    Json row = Json::array();
    for (int i = 0; i < n; ++i) {
      row.push_back({scene.future.at(f, 0, i), scene.future.at(f, 1, i)});
    }
    fut.push_back(row);
  }
  j["history"] = std::move(hist);
  j["future"] = std::move(fut);
  Json dims = Json::array();
  for (const auto& d : scene.dims) dims.push_back({d[0], d[1]});
  j["dims"] = std::move(dims);
  return j;
}

Scene scene_from_json(const Json& j) {
  if (j.value("schema_version", -1) != kSchemaVersion) {
    throw SchemaError("scene record: unsupported schema_version");
  }
  Scene scene;
  scene.ego_index = j.at("ego_index").get<int>();
  scene.vehicle_ids = j.at("vehicle_ids").get<std::vector<int64_t>>();
  scene.t0 = j.at("t0").get<double>();
  const auto& hist = j.at("history");
  const auto& fut = j.at("future");
  const int n = scene.num_vehicles();
  scene.history = Tensor3(static_cast<int>(hist.size()), 2, n);
  scene.future = Tensor3(static_cast<int>(fut.size()), 2, n);
  for (int t = 0; t < static_cast<int>(hist.size()); ++t) {
    for (int i = 0; i < n; ++i) {
      scene.history.at(t, 0, i) = hist[t][i][0].get<double>();
      scene.history.at(t, 1, i) = hist[t][i][1].get<double>();
    }
  }
  for (int f = 0; f < static_cast<int>(fut.size()); ++f) {
    for (int i = 0; i < n; ++i) {
      scene.future.at(f, 0, i) = fut[f][i][0].get<double>();
      scene.future.at(f, 1, i) = fut[f][i][1].get<double>();
    }
  }
  if (j.contains("dims")) {
    for (const auto& d : j.at("dims")) scene.dims.push_back({d[0].get<double>(), d[1].get<double>()});
  } else {
    scene.dims.assign(n, {5.0, 1.8});
  }
  return scene;
}

void write_scenes_jsonl(const std::string& path, const std::vector<Scene>& scenes,
                        uint64_t seed, const Json& config) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  Json header;
  header["record"] = "scenes_header";
  header["count"] = scenes.size();
  stamp_artifact(header, seed, config);
  out << header.dump() << "\n";
  for (const auto& s : scenes) out << scene_to_json(s).dump() << "\n";
}

std::vector<Scene> read_scenes_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<Scene> scenes;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Json j = Json::parse(line);
    if (j.contains("record") && j["record"] == "scenes_header") continue;
    scenes.push_back(scene_from_json(j));
  }
  return scenes;
}

namespace {

constexpr char kParamsMagic[8] = {'L', 'C', 'E', 'W', 'P', 'M', '0', '1'};

void put_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint32_t get_u32(std::istream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void put_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

double get_f64(std::istream& in) {
  double v = 0.0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

void write_model_params(const std::string& path, const ModelParams& params,
                        const ModelConfig& cfg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(kParamsMagic, sizeof(kParamsMagic));
  put_u32(out, static_cast<uint32_t>(cfg.history_steps));
  put_u32(out, static_cast<uint32_t>(cfg.future_steps));
  put_u32(out, static_cast<uint32_t>(cfg.input_dim));
  put_u32(out, static_cast<uint32_t>(cfg.hidden_dim));
  put_u32(out, static_cast<uint32_t>(cfg.gcn_layers));
  put_u32(out, static_cast<uint32_t>(cfg.txp_layers));
  put_u32(out, static_cast<uint32_t>(cfg.txp_kernel));
  uint32_t count = 0;
  visit_params(const_cast<ModelParams&>(params),
               [&](double&, const char*, int, int) { ++count; });
  put_u32(out, count);
  visit_params(const_cast<ModelParams&>(params),
               [&](double& v, const char*, int, int) { put_f64(out, v); });
}

std::pair<ModelParams, ModelConfig> read_model_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kParamsMagic, sizeof(magic)) != 0) {
    throw SchemaError(path + ": not a model parameter file");
  }
  ModelConfig cfg;
  cfg.history_steps = static_cast<int>(get_u32(in));
  cfg.future_steps = static_cast<int>(get_u32(in));
  cfg.input_dim = static_cast<int>(get_u32(in));
  cfg.hidden_dim = static_cast<int>(get_u32(in));
  cfg.gcn_layers = static_cast<int>(get_u32(in));
  cfg.txp_layers = static_cast<int>(get_u32(in));
  cfg.txp_kernel = static_cast<int>(get_u32(in));
  const uint32_t count = get_u32(in);
  ModelParams params = ModelParams::zeros(cfg);
  uint32_t expected = 0;
  visit_params(params, [&](double&, const char*, int, int) { ++expected; });
  if (count != expected) throw SchemaError(path + ": parameter count mismatch");
  visit_params(params, [&](double& v, const char*, int, int) { v = get_f64(in); });
  if (!in) throw SchemaError(path + ": truncated parameter file");
  return {std::move(params), cfg};
}

Json train_report_to_json(const TrainReport& report, const ModelConfig& cfg) {
  Json j;
  j["record"] = "train_report";
  j["train_loss"] = report.train_loss;
  Json val = Json::array();
  for (double v : report.val_loss) {
    if (std::isnan(v)) val.push_back(nullptr);
    else val.push_back(v);
  }
  j["val_loss"] = std::move(val);
  j["lr"] = report.lr;
  j["seed"] = report.seed;
  j["diverged"] = report.diverged;
  if (report.diverged) j["diverged_epoch"] = report.diverged_epoch;
  j["config"] = {{"history_steps", cfg.history_steps},
                 {"future_steps", cfg.future_steps},
                 {"hidden_dim", cfg.hidden_dim},
                 {"gcn_layers", cfg.gcn_layers},
                 {"txp_layers", cfg.txp_layers},
                 {"txp_kernel", cfg.txp_kernel},
                 {"prelu_init", cfg.prelu_init},
                 {"epochs", cfg.epochs},
                 {"lr_initial", cfg.lr_initial},
                 {"lr_later", cfg.lr_later},
                 {"lr_switch_epoch", cfg.lr_switch_epoch},
                 {"kernel", kernel_name(cfg.kernel)},
                 {"temporal_conv_axis", "feature"}};
  return j;
}

Json prediction_to_json(const Prediction& pred, const Scene& scene) {
  Json j;
  j["record"] = "prediction";
  j["vehicle_ids"] = scene.vehicle_ids;
  j["ego_index"] = scene.ego_index;
  Json values = Json::array();
  for (int f = 0; f < pred.steps(); ++f) {
    Json row = Json::array();
    for (int i = 0; i < pred.num_vehicles(); ++i) {
      row.push_back({pred.values.at(f, 0, i), pred.values.at(f, 1, i)});
    }
    values.push_back(row);
  }
  j["values"] = std::move(values);
  return j;
}

Prediction prediction_from_json(const Json& j) {
  const auto& values = j.at("values");
  const int f_steps = static_cast<int>(values.size());
  if (f_steps == 0) throw SchemaError("prediction record: empty values");
  const int n = static_cast<int>(values[0].size());
  Prediction pred;
  pred.values = Tensor3(f_steps, 2, n);
  for (int f = 0; f < f_steps; ++f) {
    for (int i = 0; i < n; ++i) {
      pred.values.at(f, 0, i) = values[f][i][0].get<double>();
      pred.values.at(f, 1, i) = values[f][i][1].get<double>();
    }
  }
  return pred;
}

Json metrics_to_json(const PredictionErrorReport& report) {
  Json j;
  j["record"] = "metrics";
  j["ade"] = report.ade;
  j["fde"] = report.fde;
  j["rmse_x"] = report.rmse_x;
  j["rmse_y"] = report.rmse_y;
  j["per_step_ade"] = report.per_step_ade;
  return j;
}

Json adjacency_export(const Scene& scene, KernelKind kind, const KernelParams& params) {
  Json j;
  j["record"] = "adjacency";
  j["kernel"] = kernel_name(kind);
  j["vehicle_ids"] = scene.vehicle_ids;
  Json mats = Json::array();
  for (int t = 0; t < scene.history_steps(); ++t) {
    const auto a = adjacency(scene, t, kind, params);
    Json m = Json::array();
    for (int r = 0; r < a.w.rows(); ++r) {
      Json row = Json::array();
      for (int c = 0; c < a.w.cols(); ++c) row.push_back(a.w.at(r, c));
      m.push_back(row);
    }
    mats.push_back({{"t", t}, {"w", m}});
  }
  j["matrices"] = std::move(mats);
  return j;
}

Json collision_event_to_json(const CollisionEvent& ev) {
  return Json{{"id_a", ev.id_a},
              {"id_b", ev.id_b},
              {"step", ev.step},
              {"x", ev.location_hint.x},
              {"y", ev.location_hint.y}};
}

Json warning_to_json(const WarningSignal& sig) {
  return Json{{"horizon_steps", sig.horizon_steps},
              {"location", sig.location == CollisionLocation::FRONT ? "front" : "rear"},
              {"first_event", collision_event_to_json(sig.first_event)}};
}

Json sim_result_to_json(const SimResult& result) {
  Json j;
  j["record"] = "sim_result";
  j["seed"] = result.seed;
  j["spawned"] = result.spawned;
  j["exited"] = result.exited;
  j["remaining"] = result.remaining;
  j["throughput"] = result.throughput_count;
  Json vehicles = Json::array();
  for (const auto& v : result.vehicles) {
    vehicles.push_back({{"id", v.id},
                        {"equipped_draw", v.equipped_draw},
                        {"equipped", v.equipped},
                        {"attempted_lc", v.attempted_lc},
                        {"completed_lc", v.completed_lc},
                        {"first_attempt_t", v.first_attempt_t},
                        {"spawn_t", v.spawn_t},
                        {"exit_t", v.exit_t},
                        {"max_drac", v.behavior.max_drac},
                        {"max_decel", v.behavior.max_decel},
                        {"max_jerk", v.behavior.max_jerk},
                        {"hazard_steps", v.hazard_steps},
                        {"warnings", v.warnings_received}});
  }
  j["vehicles"] = std::move(vehicles);
  Json warnings = Json::array();
  for (const auto& w : result.warnings) {
    warnings.push_back({{"t", w.t},
                        {"vehicle", w.vehicle},
                        {"location", w.location == CollisionLocation::FRONT ? "front" : "rear"},
                        {"speed_branch", w.speed_branch},
                        {"accel_cmd", w.accel_cmd},
                        {"horizon_steps", w.horizon_steps}});
  }
  j["warnings"] = std::move(warnings);
  Json collisions = Json::array();
  for (const auto& c : result.collisions) {
    collisions.push_back({{"t", c.t}, {"a", c.a}, {"b", c.b}, {"overlap_m", c.overlap_m}});
  }
  j["collisions"] = std::move(collisions);
  Json exits = Json::array();
  for (const auto& e : result.exits) exits.push_back({{"t", e.t}, {"vehicle", e.vehicle_id}});
  j["exits"] = std::move(exits);
  return j;
}

Json sweep_table_to_json(const SweepTable& table) {
  Json j;
  j["record"] = "sweep";
  j["rates"] = table.rates;
  Json methods = Json::array();
  for (auto m : table.methods) methods.push_back(method_name(m));
  j["methods"] = std::move(methods);
  j["seeds"] = table.seeds;
  Json cells = Json::array();
  for (const auto& c : table.cells) {
    cells.push_back({{"rate", c.rate},
                     {"method", method_name(c.method)},
                     {"mean_throughput", c.mean_throughput},
                     {"per_seed_throughput", c.per_seed_throughput},
                     {"lc_vehicles", c.lc_vehicle_count},
                     {"drac", {{"p50", c.drac_p50}, {"p90", c.drac_p90}, {"p95", c.drac_p95}}},
                     {"decel", {{"p50", c.decel_p50}, {"p90", c.decel_p90}, {"p95", c.decel_p95}}},
                     {"jerk", {{"p50", c.jerk_p50}, {"p90", c.jerk_p90}, {"p95", c.jerk_p95}}}});
  }
  j["cells"] = std::move(cells);
  return j;
}

std::string sweep_table_to_csv(const SweepTable& table) {
  std::ostringstream out;
  out << "rate,method,mean_throughput,lc_vehicles,drac_p50,drac_p90,drac_p95,"
         "decel_p50,decel_p90,decel_p95,jerk_p50,jerk_p90,jerk_p95\n";
  for (const auto& c : table.cells) {
    out << c.rate << ',' << method_name(c.method) << ',' << c.mean_throughput << ','
        << c.lc_vehicle_count << ',' << c.drac_p50 << ',' << c.drac_p90 << ',' << c.drac_p95
        << ',' << c.decel_p50 << ',' << c.decel_p90 << ',' << c.decel_p95 << ',' << c.jerk_p50
        << ',' << c.jerk_p90 << ',' << c.jerk_p95 << '\n';
  }
  return out.str();
}

std::string kernel_comparison_csv(const Json& merged) {
  // merged: {kernel -> {horizon -> metrics json}}
  std::vector<std::string> kernels;
  std::vector<int> horizons;
  for (auto it = merged.begin(); it != merged.end(); ++it) {
    kernels.push_back(it.key());
    for (auto h = it.value().begin(); h != it.value().end(); ++h) {
      const int hv = std::stoi(h.key());
      if (std::find(horizons.begin(), horizons.end(), hv) == horizons.end()) horizons.push_back(hv);
    }
  }
  std::sort(kernels.begin(), kernels.end());
  std::sort(horizons.begin(), horizons.end());

  std::ostringstream out;
  out << "metric,horizon";
  for (const auto& k : kernels) out << ',' << k;
  out << '\n';
  for (const char* metric : {"ade", "fde", "rmse_x", "rmse_y"}) {
    for (int h : horizons) {
      out << metric << ',' << h;
      for (const auto& k : kernels) {
        const auto hkey = std::to_string(h);
        if (merged.contains(k) && merged[k].contains(hkey) && merged[k][hkey].contains(metric)) {
          out << ',' << merged[k][hkey][metric].get<double>();
        } else {
          out << ',';
        }
      }
      out << '\n';
    }
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  Json j;
  in >> j;
  return j;
}

}  // namespace lcew
