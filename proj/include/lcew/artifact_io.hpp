#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "lcew/collision.hpp"
#include "lcew/microsim.hpp"
#include "lcew/safety_metrics.hpp"
#include "lcew/stgcnn.hpp"
#include "lcew/trajdata.hpp"

namespace lcew {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::json;

// FNV-1a over the canonical dump; echoed into every artifact.
std::string config_hash(const Json& config);

// Stamps schema_version / seed / config_hash into an artifact object.
void stamp_artifact(Json& j, uint64_t seed, const Json& config);

// --- scenes: one JSON object per line -------------------------------------
Json scene_to_json(const Scene& scene);
Scene scene_from_json(const Json& j);
void write_scenes_jsonl(const std::string& path, const std::vector<Scene>& scenes,
                        uint64_t seed, const Json& config);
std::vector<Scene> read_scenes_jsonl(const std::string& path);

// --- model parameters: versioned flat binary -------------------------------
// Layout: magic "LCEWPM01", u32 counts (gcn layers, txp layers), u32 shape
// table, then every parameter group as row-major doubles in visit order.
void write_model_params(const std::string& path, const ModelParams& params,
                        const ModelConfig& cfg);
std::pair<ModelParams, ModelConfig> read_model_params(const std::string& path);

// --- reports ---------------------------------------------------------------
Json train_report_to_json(const TrainReport& report, const ModelConfig& cfg);
Json prediction_to_json(const Prediction& pred, const Scene& scene);
Prediction prediction_from_json(const Json& j);
Json metrics_to_json(const PredictionErrorReport& report);
Json adjacency_export(const Scene& scene, KernelKind kind, const KernelParams& params);

Json collision_event_to_json(const CollisionEvent& ev);
Json warning_to_json(const WarningSignal& sig);

Json sim_result_to_json(const SimResult& result);
Json sweep_table_to_json(const SweepTable& table);
std::string sweep_table_to_csv(const SweepTable& table);

// Kernel-comparison table assembled by the report tool from metric artifacts.
std::string kernel_comparison_csv(const Json& merged_metrics);

void write_text_file(const std::string& path, const std::string& content);
void write_json_file(const std::string& path, const Json& j);
Json read_json_file(const std::string& path);

}  // namespace lcew
