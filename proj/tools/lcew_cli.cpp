// lcew: lane-change early-warning toolkit command line.
//
// Pipelines are chained through files so every stage can be re-run on its
// own: ingest/extract produce scene records, train fits a predictor, predict/
// detect/warn run the warning pipeline offline, simulate/sweep run the
// closed-loop ramp-merge experiments, report assembles tables from artifacts.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <string>

#include "CLI11.hpp"
#include "lcew/artifact_io.hpp"
#include "lcew/config_file.hpp"
#include "lcew/oracles.hpp"
#include "lcew/synthetic.hpp"

namespace fs = std::filesystem;
using namespace lcew;

namespace {

int log_level() {
  const char* env = std::getenv("LCEW_LOG");
  if (!env) return 1;
  const std::string v = env;
  if (v == "quiet") return 0;
  if (v == "debug") return 2;
  return 1;
}

void info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[lcew] " << msg << "\n";
}

ConfigReader reader_for(const std::string& config_path) {
  if (config_path.empty()) return ConfigReader(ConfigMap{});
  return ConfigReader(parse_config_file(config_path));
}

void ensure_out_dir(const std::string& out) {
  if (!out.empty()) fs::create_directories(out);
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

struct JsonlWriter {
  std::ofstream out;
  explicit JsonlWriter(const std::string& path) : out(path) {
    if (!out) throw std::runtime_error("cannot write " + path);
  }
  void line(const Json& j) { out << j.dump() << "\n"; }
};

int cmd_ingest(const std::string& input, const std::string& lanes_path,
               const std::string& out, uint64_t seed) {
  ensure_out_dir(out);
  const auto tracks = parse_trajectory_file(input);
  if (!lanes_path.empty()) LaneGeometry::parse_file(lanes_path);  // validate early
  Json config{{"input", fs::path(input).filename().string()}};
  JsonlWriter w(join_path(out, "tracks.jsonl"));
  Json header{{"record", "tracks_header"}, {"count", tracks.size()}};
  stamp_artifact(header, seed, config);
  w.line(header);
  double t_min = 0.0, t_max = 0.0;
  for (size_t i = 0; i < tracks.size(); ++i) {
    const auto& tr = tracks[i];
    if (i == 0) {
      t_min = tr.start_time();
      t_max = tr.end_time();
    }
    t_min = std::min(t_min, tr.start_time());
    t_max = std::max(t_max, tr.end_time());
    Json j{{"id", tr.id},        {"agent_type", tr.agent_type}, {"length", tr.length},
           {"width", tr.width},  {"start_t", tr.start_time()},  {"end_t", tr.end_time()},
           {"points", tr.points.size()}};
    w.line(j);
  }
  Json report{{"record", "ingest_report"},
              {"tracks", tracks.size()},
              {"time_span_s", tracks.empty() ? 0.0 : t_max - t_min}};
  stamp_artifact(report, seed, config);
  write_json_file(join_path(out, "ingest_report.json"), report);
  info("ingested " + std::to_string(tracks.size()) + " tracks");
  return 0;
}

int cmd_extract(const std::string& input, const std::string& lanes_path, const std::string& out,
                int history, int future, int stride, uint64_t seed) {
  ensure_out_dir(out);
  const auto tracks = parse_trajectory_file(input);
  const auto lanes = LaneGeometry::parse_file(lanes_path);
  ExtractDiagnostics diag;
  const auto events = extract_lc_events(tracks, lanes, &diag);

  Json config{{"history", history}, {"future", future}, {"stride", stride}};
  JsonlWriter we(join_path(out, "events.jsonl"));
  Json header{{"record", "events_header"}, {"count", events.size()}};
  stamp_artifact(header, seed, config);
  we.line(header);
  std::vector<Scene> scenes;
  for (const auto& ev : events) {
    we.line(Json{{"ego_id", ev.ego_id},
                 {"start_t", ev.start_t},
                 {"cross_t", ev.cross_t},
                 {"end_t", ev.end_t},
                 {"source_lane", ev.source_lane},
                 {"target_lane", ev.target_lane}});
    const auto windows = make_scene_windows(ev, tracks, lanes, history, future, stride);
    scenes.insert(scenes.end(), windows.begin(), windows.end());
  }
  write_scenes_jsonl(join_path(out, "scenes.jsonl"), scenes, seed, config);
  Json report{{"record", "extract_report"},
              {"events", events.size()},
              {"scenes", scenes.size()},
              {"crossings_seen", diag.crossings_seen},
              {"truncated", diag.truncated},
              {"unsustained", diag.unsustained},
              {"overlapped", diag.overlapped}};
  stamp_artifact(report, seed, config);
  write_json_file(join_path(out, "extract_report.json"), report);
  info("extracted " + std::to_string(events.size()) + " events, " +
       std::to_string(scenes.size()) + " scenes");
  return 0;
}

int cmd_train(const std::string& scenes_path, const std::string& config_path,
              const std::string& kernel, int horizon, int epochs, uint64_t seed,
              const std::string& out) {
  ensure_out_dir(out);
  ConfigReader reader = reader_for(config_path);
  ModelConfig cfg = model_config_from_reader(reader);
  reader.reject_unknown();
  if (!kernel.empty()) cfg.kernel = kernel_from_name(kernel);
  if (horizon > 0) cfg.future_steps = horizon;
  if (epochs > 0) cfg.epochs = epochs;
  if (seed != 0) cfg.seed = seed;
  cfg.validate();

  auto scenes = read_scenes_jsonl(scenes_path);
  if (scenes.empty()) throw std::runtime_error("no scenes in " + scenes_path);
  for (auto& s : scenes) {
    if (s.future_steps() > cfg.future_steps) s = truncate_future(s, cfg.future_steps);
  }
  const auto split = split_scenes(scenes, cfg.seed);
  const auto& train_set = split.train.empty() ? scenes : split.train;
  info("training on " + std::to_string(train_set.size()) + " scenes (" +
       std::to_string(split.val.size()) + " val, " + std::to_string(split.test.size()) +
       " test), kernel=" + kernel_name(cfg.kernel));

  const auto [params, report] = train(train_set, split.val, cfg);

  const Json cfg_json = model_config_to_json(cfg);
  const std::string tag = kernel_name(cfg.kernel) + "_h" + std::to_string(cfg.future_steps);
  write_model_params(join_path(out, "params_" + tag + ".bin"), params, cfg);
  Json report_json = train_report_to_json(report, cfg);
  stamp_artifact(report_json, cfg.seed, cfg_json);
  write_json_file(join_path(out, "train_report_" + tag + ".json"), report_json);

  if (!split.test.empty()) {
    double ade = 0.0, fde = 0.0, rx = 0.0, ry = 0.0;
    for (const auto& s : split.test) {
      const auto pred = predict(s, params, cfg.kernel, cfg.kernel_params);
      const auto m = prediction_errors(pred.values, s.future);
      ade += m.ade;
      fde += m.fde;
      rx += m.rmse_x * m.rmse_x;
      ry += m.rmse_y * m.rmse_y;
    }
    const double k = static_cast<double>(split.test.size());
    Json metrics{{"record", "metrics"},
                 {"kernel", kernel_name(cfg.kernel)},
                 {"horizon", cfg.future_steps},
                 {"ade", ade / k},
                 {"fde", fde / k},
                 {"rmse_x", std::sqrt(rx / k)},
                 {"rmse_y", std::sqrt(ry / k)},
                 {"test_scenes", split.test.size()}};
    stamp_artifact(metrics, cfg.seed, cfg_json);
    write_json_file(join_path(out, "metrics_" + tag + ".json"), metrics);
  }
  return 0;
}

int cmd_predict(const std::string& scenes_path, const std::string& params_path,
                bool zero_params, const std::string& kernel, uint64_t seed,
                const std::string& out, bool with_metrics, const std::string& adjacency_out) {
  ensure_out_dir(out);
  auto scenes = read_scenes_jsonl(scenes_path);
  if (scenes.empty()) throw std::runtime_error("no scenes in " + scenes_path);

  ModelParams params;
  ModelConfig cfg;
  if (zero_params) {
    cfg.history_steps = scenes.front().history_steps();
    cfg.future_steps = scenes.front().future_steps() > 0 ? scenes.front().future_steps() : 20;
    params = ModelParams::zeros(cfg);
  } else {
    if (params_path.empty()) throw std::invalid_argument("predict: --params or --zero-params required");
    std::tie(params, cfg) = read_model_params(params_path);
  }
  if (!kernel.empty()) cfg.kernel = kernel_from_name(kernel);

  const Json cfg_json = model_config_to_json(cfg);
  JsonlWriter w(join_path(out, "predictions.jsonl"));
  Json header{{"record", "predictions_header"}, {"count", scenes.size()}};
  stamp_artifact(header, seed, cfg_json);
  w.line(header);

  double ade = 0.0, fde = 0.0, rx = 0.0, ry = 0.0;
  int scored = 0;
  for (auto& scene : scenes) {
    if (scene.history_steps() != cfg.history_steps) {
      throw std::runtime_error("scene history length does not match the model");
    }
    const auto pred = predict(scene, params, cfg.kernel, cfg.kernel_params);
    w.line(prediction_to_json(pred, scene));
    if (with_metrics && scene.future_steps() >= cfg.future_steps) {
      const auto truth = scene.future_steps() == cfg.future_steps
                             ? scene.future
                             : truncate_future(scene, cfg.future_steps).future;
      const auto m = prediction_errors(pred.values, truth);
      ade += m.ade;
      fde += m.fde;
      rx += m.rmse_x * m.rmse_x;
      ry += m.rmse_y * m.rmse_y;
      ++scored;
    }
  }
  if (with_metrics && scored > 0) {
    Json metrics{{"record", "metrics"},
                 {"kernel", kernel_name(cfg.kernel)},
                 {"horizon", cfg.future_steps},
                 {"ade", ade / scored},
                 {"fde", fde / scored},
                 {"rmse_x", std::sqrt(rx / scored)},
                 {"rmse_y", std::sqrt(ry / scored)},
                 {"test_scenes", scored}};
    stamp_artifact(metrics, seed, cfg_json);
    write_json_file(join_path(out, "metrics_" + kernel_name(cfg.kernel) + "_h" +
                                   std::to_string(cfg.future_steps) + ".json"),
                    metrics);
  }
  if (!adjacency_out.empty()) {
    Json adj = adjacency_export(scenes.front(), cfg.kernel, cfg.kernel_params);
    stamp_artifact(adj, seed, cfg_json);
    write_json_file(adjacency_out, adj);
  }
  info("predicted " + std::to_string(scenes.size()) + " scenes");
  return 0;
}

int cmd_detect(const std::string& scenes_path, const std::string& predictions_path,
               uint64_t seed, const std::string& out) {
  ensure_out_dir(out);
  const auto scenes = read_scenes_jsonl(scenes_path);
  std::ifstream in(predictions_path);
  if (!in) throw std::runtime_error("cannot read " + predictions_path);
  Json config{{"source", fs::path(predictions_path).filename().string()}};
  JsonlWriter w(join_path(out, "collision_events.jsonl"));
  Json header{{"record", "collision_events_header"}};
  stamp_artifact(header, seed, config);
  w.line(header);

  std::string line;
  size_t scene_index = 0;
  int total = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Json j = Json::parse(line);
    if (j.contains("record") && j["record"] != "prediction") continue;
    if (scene_index >= scenes.size()) throw std::runtime_error("more predictions than scenes");
    const Scene& scene = scenes[scene_index];
    const Prediction pred = prediction_from_json(j);
    std::vector<VehicleDims> dims;
    for (const auto& d : scene.dims) dims.push_back({d[0], d[1]});
    const auto events = detect_collisions(pred, scene, dims);
    Json evs = Json::array();
    for (const auto& ev : events) evs.push_back(collision_event_to_json(ev));
    w.line(Json{{"scene_index", scene_index}, {"events", evs}});
    total += static_cast<int>(events.size());
    ++scene_index;
  }
  info("detected " + std::to_string(total) + " collision events over " +
       std::to_string(scene_index) + " scenes");
  return 0;
}

int cmd_warn(const std::string& scenes_path, const std::string& predictions_path,
             const std::string& events_path, uint64_t seed, const std::string& out) {
  ensure_out_dir(out);
  const auto scenes = read_scenes_jsonl(scenes_path);

  std::vector<Prediction> preds;
  {
    std::ifstream in(predictions_path);
    if (!in) throw std::runtime_error("cannot read " + predictions_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const Json j = Json::parse(line);
      if (j.contains("record") && j["record"] != "prediction") continue;
      preds.push_back(prediction_from_json(j));
    }
  }

  std::ifstream in(events_path);
  if (!in) throw std::runtime_error("cannot read " + events_path);
  Json config{{"source", fs::path(events_path).filename().string()}};
  JsonlWriter w(join_path(out, "warnings.jsonl"));
  Json header{{"record", "warnings_header"}};
  stamp_artifact(header, seed, config);
  w.line(header);

  std::string line;
  int issued = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Json j = Json::parse(line);
    if (j.contains("record")) continue;
    const size_t idx = j.at("scene_index").get<size_t>();
    if (idx >= scenes.size() || idx >= preds.size()) {
      throw std::runtime_error("event record points past the scene list");
    }
    std::vector<CollisionEvent> events;
    for (const auto& e : j.at("events")) {
      CollisionEvent ev;
      ev.id_a = e.at("id_a").get<int64_t>();
      ev.id_b = e.at("id_b").get<int64_t>();
      ev.step = e.at("step").get<int>();
      ev.location_hint = {e.at("x").get<double>(), e.at("y").get<double>()};
      events.push_back(ev);
    }
    const auto sig = issue_warning(events, preds[idx], scenes[idx].ego_index);
    Json rec{{"scene_index", idx}};
    if (sig) {
      rec["warning"] = warning_to_json(*sig);
      ++issued;
    } else {
      rec["warning"] = nullptr;
    }
    w.line(rec);
  }
  info("issued " + std::to_string(issued) + " warnings");
  return 0;
}

int cmd_simulate(const std::string& config_path, uint64_t seed, const std::string& out) {
  ensure_out_dir(out);
  ConfigReader reader = reader_for(config_path);
  SimConfig cfg = sim_config_from_reader(reader);
  reader.reject_unknown();
  if (seed != 0) cfg.seed = seed;
  cfg.validate();

  ModelParams model;
  ModelConfig model_cfg;
  const ModelParams* model_ptr = nullptr;
  const ModelConfig* model_cfg_ptr = nullptr;
  if (cfg.use_trained_model) {
    std::tie(model, model_cfg) = read_model_params(cfg.model_path);
    model_ptr = &model;
    model_cfg_ptr = &model_cfg;
  }

  const auto result = run_sim(cfg, model_ptr, model_cfg_ptr);
  const Json cfg_json = sim_config_to_json(cfg);
  Json rj = sim_result_to_json(result);
  stamp_artifact(rj, cfg.seed, cfg_json);
  write_json_file(join_path(out, "sim_result.json"), rj);

  JsonlWriter w(join_path(out, "sim_events.jsonl"));
  Json header{{"record", "sim_events_header"}};
  stamp_artifact(header, cfg.seed, cfg_json);
  w.line(header);
  for (const auto& e : result.exits) {
    w.line(Json{{"event", "exit"}, {"t", e.t}, {"vehicle", e.vehicle_id}});
  }
  for (const auto& wrn : result.warnings) {
    w.line(Json{{"event", "warning"},
                {"t", wrn.t},
                {"vehicle", wrn.vehicle},
                {"location", wrn.location == CollisionLocation::FRONT ? "front" : "rear"}});
  }
  for (const auto& c : result.collisions) {
    w.line(Json{{"event", "collision"}, {"t", c.t}, {"a", c.a}, {"b", c.b}});
  }

  std::ostringstream csv;
  csv << "id,equipped,attempted_lc,completed_lc,max_drac,max_decel,max_jerk,hazard_steps\n";
  for (const auto& v : result.vehicles) {
    csv << v.id << ',' << (v.equipped ? 1 : 0) << ',' << (v.attempted_lc ? 1 : 0) << ','
        << (v.completed_lc ? 1 : 0) << ',' << v.behavior.max_drac << ',' << v.behavior.max_decel
        << ',' << v.behavior.max_jerk << ',' << v.hazard_steps << '\n';
  }
  write_text_file(join_path(out, "behavior.csv"), csv.str());
  info("simulated " + std::to_string(result.spawned) + " vehicles, throughput " +
       std::to_string(result.throughput_count));
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::vector<double>& rates,
              const std::vector<std::string>& method_names, const std::vector<uint64_t>& seeds,
              const std::string& out) {
  ensure_out_dir(out);
  ConfigReader reader = reader_for(config_path);
  SimConfig base = sim_config_from_reader(reader);
  reader.reject_unknown();

  std::vector<WarningMethod> methods;
  for (const auto& name : method_names) methods.push_back(method_from_name(name));

  const auto table = sweep_penetration(base, rates, methods, seeds);
  const Json cfg_json = sim_config_to_json(base);
  Json tj = sweep_table_to_json(table);
  stamp_artifact(tj, base.seed, cfg_json);
  write_json_file(join_path(out, "sweep.json"), tj);
  write_text_file(join_path(out, "sweep.csv"), sweep_table_to_csv(table));
  info("sweep finished: " + std::to_string(table.cells.size()) + " cells");
  return 0;
}

int cmd_report(const std::string& in_dir, const std::string& out) {
  ensure_out_dir(out);
  Json merged = Json::object();
  Json inputs = Json::array();
  const std::regex metrics_re("metrics_([a-z0-9]+)_h([0-9]+)\\.json");
  for (const auto& entry : fs::directory_iterator(in_dir)) {
    const std::string name = entry.path().filename().string();
    std::smatch m;
    if (std::regex_match(name, m, metrics_re)) {
      const Json j = read_json_file(entry.path().string());
      merged[m[1].str()][m[2].str()] = j;
      inputs.push_back(name);
    } else if (name == "sweep.json") {
      const Json j = read_json_file(entry.path().string());
      std::ostringstream csv;
      csv << "rate,method,mean_throughput\n";
      for (const auto& cell : j.at("cells")) {
        csv << cell.at("rate").get<double>() << ',' << cell.at("method").get<std::string>() << ','
            << cell.at("mean_throughput").get<double>() << '\n';
      }
      write_text_file(join_path(out, "throughput_table.csv"), csv.str());
      inputs.push_back(name);
    }
  }
  if (!merged.empty()) {
    write_text_file(join_path(out, "kernel_comparison.csv"), kernel_comparison_csv(merged));
  }
  Json summary{{"record", "report"}, {"inputs", inputs}};
  write_json_file(join_path(out, "report.json"), summary);
  info("report assembled from " + std::to_string(inputs.size()) + " artifacts");
  return 0;
}

int cmd_selftest() {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "\n";
    if (!ok) ++failures;
  };

  // gradient check on a few random small models
  {
    bool ok = true;
    for (uint64_t seed = 1; seed <= 3 && ok; ++seed) {
      ModelConfig cfg;
      cfg.history_steps = 6;
      cfg.future_steps = 5;
      cfg.hidden_dim = 4;
      cfg.seed = seed;
      RandomStream rng(seed);
      ModelParams params = ModelParams::init(cfg, rng);
      RandomStream scene_rng(seed + 100);
      const Scene scene = random_scene(scene_rng, 3, cfg.history_steps, cfg.future_steps);
      const auto inputs = build_inputs(scene, KernelKind::L2);
      const auto [loss, grads] = mse_loss_and_grad(inputs, scene.future, params);
      (void)loss;
      std::vector<double*> pv;
      visit_params(params, [&](double& x, const char*, int, int) { pv.push_back(&x); });
      std::vector<double> gv;
      visit_params(const_cast<ModelGrads&>(grads),
                   [&](double& x, const char*, int, int) { gv.push_back(x); });
      const auto eval = [&]() {
        return mse_loss(forward(inputs, params, nullptr), scene.future);
      };
      for (size_t k = 0; k < pv.size(); ++k) {
        const double fd = oracles::finite_difference(eval, pv[k], 1e-5);
        const double rel = std::abs(fd - gv[k]) / std::max({1.0, std::abs(fd), std::abs(gv[k])});
        if (rel >= 1e-4) ok = false;
      }
    }
    check("gradient check vs central finite differences", ok);
  }

  // SAT vs exact polygon intersection, one box lane-aligned
  {
    RandomStream rng(7);
    int checked = 0, agreed = 0;
    for (int k = 0; k < 2000; ++k) {
      OBB a{{rng.uniform(-5, 5), rng.uniform(-5, 5)}, rng.uniform(0.5, 3), rng.uniform(0.3, 1.2), 0.0};
      OBB b{{rng.uniform(-5, 5), rng.uniform(-5, 5)}, rng.uniform(0.5, 3), rng.uniform(0.3, 1.2),
            rng.uniform(-0.5, 0.5)};
      if (oracles::min_axis_overlap_abs(a, b, 0.0) < 1e-9) continue;
      ++checked;
      if (sat_collide(a, b, 0.0) == oracles::obb_overlap_exact(a, b)) ++agreed;
    }
    check("four-axis SAT vs polygon-clipping oracle (" + std::to_string(agreed) + "/" +
              std::to_string(checked) + ")",
          checked > 0 && agreed == checked);
  }

  // histogram MI vs analytic Gaussian value
  {
    bool ok = true;
    const double analytic = oracles::gaussian_mi_analytic(0.9);
    for (uint64_t seed = 1; seed <= 3; ++seed) {
      RandomStream rng(seed);
      std::vector<double> a(2000), b(2000);
      for (int i = 0; i < 2000; ++i) {
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        a[i] = z1;
        b[i] = 0.9 * z1 + std::sqrt(1.0 - 0.81) * z2;
      }
      const auto est = histogram_mi(a, b, 16);
      if (std::abs(est.value - analytic) > 0.25) ok = false;
      const double first_form = est.h_a + est.h_b - est.h_joint;
      const double second_form = est.h_joint - (est.h_joint - est.h_b) - (est.h_joint - est.h_a);
      if (std::abs(first_form - second_form) > 1e-9) ok = false;
    }
    check("histogram MI vs analytic bivariate-Gaussian value", ok);
  }

  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lane-change early-warning toolkit"};
  app.require_subcommand(1);

  std::string input, lanes_path, out = ".", config_path, scenes_path, params_path;
  std::string predictions_path, events_path, kernel, adjacency_out, in_dir;
  uint64_t seed = 0;
  int history = 20, future = 20, stride = 10, horizon = 0, epochs = 0;
  bool zero_params = false, with_metrics = false;
  std::vector<double> rates;
  std::vector<std::string> methods;
  std::vector<uint64_t> seeds;

  auto* ingest = app.add_subcommand("ingest", "parse and validate a trajectory CSV");
  ingest->add_option("--input", input, "trajectory CSV")->required();
  ingest->add_option("--lanes", lanes_path, "lane geometry config");
  ingest->add_option("--out", out, "output directory");
  ingest->add_option("--seed", seed, "seed echoed into artifacts");

  auto* extract = app.add_subcommand("extract", "extract LC events and scene windows");
  extract->add_option("--input", input, "trajectory CSV")->required();
  extract->add_option("--lanes", lanes_path, "lane geometry config")->required();
  extract->add_option("--out", out, "output directory");
  extract->add_option("--history", history, "history steps (T)");
  extract->add_option("--future", future, "future steps (F)");
  extract->add_option("--stride", stride, "window stride");
  extract->add_option("--seed", seed, "seed echoed into artifacts");

  auto* train_cmd = app.add_subcommand("train", "train the trajectory predictor");
  train_cmd->add_option("--scenes", scenes_path, "scenes.jsonl")->required();
  train_cmd->add_option("--config", config_path, "model config file");
  train_cmd->add_option("--kernel", kernel, "mi|l2|long");
  train_cmd->add_option("--horizon", horizon, "prediction horizon (steps)");
  train_cmd->add_option("--epochs", epochs, "training epochs");
  train_cmd->add_option("--seed", seed, "training seed");
  train_cmd->add_option("--out", out, "output directory");

  auto* predict_cmd = app.add_subcommand("predict", "predict futures for scene records");
  predict_cmd->add_option("--scenes", scenes_path, "scenes.jsonl")->required();
  predict_cmd->add_option("--params", params_path, "trained parameter file");
  predict_cmd->add_flag("--zero-params", zero_params, "use an all-zero model");
  predict_cmd->add_option("--kernel", kernel, "mi|l2|long");
  predict_cmd->add_option("--seed", seed, "seed echoed into artifacts");
  predict_cmd->add_option("--out", out, "output directory");
  predict_cmd->add_flag("--metrics", with_metrics, "also write prediction-error metrics");
  predict_cmd->add_option("--adjacency-out", adjacency_out, "export first scene's adjacency");

  auto* detect = app.add_subcommand("detect", "run OBB collision detection on predictions");
  detect->add_option("--scenes", scenes_path, "scenes.jsonl")->required();
  detect->add_option("--predictions", predictions_path, "predictions.jsonl")->required();
  detect->add_option("--seed", seed, "seed echoed into artifacts");
  detect->add_option("--out", out, "output directory");

  auto* warn = app.add_subcommand("warn", "issue warning signals from collision events");
  warn->add_option("--scenes", scenes_path, "scenes.jsonl")->required();
  warn->add_option("--predictions", predictions_path, "predictions.jsonl")->required();
  warn->add_option("--events", events_path, "collision_events.jsonl")->required();
  warn->add_option("--seed", seed, "seed echoed into artifacts");
  warn->add_option("--out", out, "output directory");

  auto* simulate = app.add_subcommand("simulate", "run one closed-loop ramp-merge simulation");
  simulate->add_option("--config", config_path, "simulation config (TOML)");
  simulate->add_option("--seed", seed, "override the config seed");
  simulate->add_option("--out", out, "output directory");

  auto* sweep = app.add_subcommand("sweep", "penetration-rate sweep across methods and seeds");
  sweep->add_option("--config", config_path, "simulation config (TOML)");
  sweep->add_option("--rates", rates, "penetration rates")->delimiter(',')->required();
  sweep->add_option("--methods", methods, "none|ttc|lcew")->delimiter(',')->required();
  sweep->add_option("--seeds", seeds, "seeds")->delimiter(',')->required();
  sweep->add_option("--out", out, "output directory");

  auto* report = app.add_subcommand("report", "assemble tables from existing artifacts");
  report->add_option("--in", in_dir, "artifact directory")->required();
  report->add_option("--out", out, "output directory");

  app.add_subcommand("selftest", "run the built-in oracle checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand("ingest")) return cmd_ingest(input, lanes_path, out, seed);
    if (app.got_subcommand("extract"))
      return cmd_extract(input, lanes_path, out, history, future, stride, seed);
    if (app.got_subcommand("train"))
      return cmd_train(scenes_path, config_path, kernel, horizon, epochs, seed, out);
    if (app.got_subcommand("predict"))
      return cmd_predict(scenes_path, params_path, zero_params, kernel, seed, out, with_metrics,
                         adjacency_out);
    if (app.got_subcommand("detect")) return cmd_detect(scenes_path, predictions_path, seed, out);
    if (app.got_subcommand("warn"))
      return cmd_warn(scenes_path, predictions_path, events_path, seed, out);
    if (app.got_subcommand("simulate")) return cmd_simulate(config_path, seed, out);
    if (app.got_subcommand("sweep")) return cmd_sweep(config_path, rates, methods, seeds, out);
    if (app.got_subcommand("report")) return cmd_report(in_dir, out);
    if (app.got_subcommand("selftest")) return cmd_selftest();
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
