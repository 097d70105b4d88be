#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lcew/collision.hpp"
#include "lcew/rng.hpp"
#include "lcew/safety_metrics.hpp"
#include "lcew/stgcnn.hpp"

namespace lcew {

enum class WarningMethod { NONE, TTC, LCEW };

std::string method_name(WarningMethod m);
WarningMethod method_from_name(const std::string& name);

struct IdmParams {
  double headway_s = 1.5;
  double min_gap = 2.0;
  double a_max = 2.0;
  double b_comf = 2.5;
  double b_max = 8.0;
  double delta = 4.0;
};

// Intelligent-driver acceleration, bounded to [-b_max, a_max]. A nonpositive
// gap reports an overlap through the flag and commands -b_max.
double idm_accel(const IdmParams& p, double v, double v_desired, bool has_leader,
                 double gap, double leader_v, bool* overlap = nullptr);

struct LcParams {
  double incentive_threshold = 0.25;  // m/s^2 accel gain to want a change
  double lead_time_gap_s = 0.5;       // accepted lead gap: min_gap + v_ego * this
  double lag_time_gap_s = 0.6;        // accepted lag gap: min_gap + v_lag * this
  double min_gap = 2.0;
  double duration_s = 3.0;            // lateral transition time
  double cooldown_s = 5.0;
};

struct LcNeighborGaps {
  bool lead_exists = false;
  double lead_gap = 0.0;  // bumper-to-bumper
  double lead_v = 0.0;
  bool lag_exists = false;
  double lag_gap = 0.0;
  double lag_v = 0.0;
};

// Gap acceptance for a proposed change; the incentive criterion is evaluated
// by the caller from IDM accelerations.
bool lc_gaps_acceptable(const LcParams& p, double v_ego, const LcNeighborGaps& gaps);

struct ResponseMagnitude {
  double mean = 1.0;  // m/s^2
  double sd = 0.5;
  double lo = 0.2;
  double hi = 3.0;
};

struct SimConfig {
  // demand
  double mainline_demand_vph = 1600.0;  // split across mainline lanes
  double ramp_demand_vph = 500.0;
  // road: mainline lanes 1..2 run the full segment; lane 0 is the ramp
  // continuation that exists from merge_x onward (three lanes after merge)
  double segment_length = 440.0;
  double merge_x = 150.0;
  double lane_width = 3.5;
  // protocol
  double warmup_s = 300.0;
  double measurement_s = 900.0;
  double dt = 0.1;
  uint64_t seed = 1;
  WarningMethod method = WarningMethod::NONE;
  double penetration = 0.0;  // fraction of vehicles carrying the system
  double warning_horizon_s = 2.0;
  double ttc_warning_threshold_s = 5.0;  // TTC-based baseline trigger
  // drivers
  double desired_speed_mean = 15.0;
  double desired_speed_sd = 1.5;
  double desired_speed_lo = 10.0;
  double desired_speed_hi = 20.0;
  double ramp_entry_speed = 11.0;
  double mainline_entry_speed = 14.0;
  double reaction_unequipped_s = 1.7;
  double reaction_equipped_s = 1.3;
  double speed_cap = 40.0;
  double vehicle_length = 5.0;
  double vehicle_width = 1.8;
  double spawn_clear_m = 12.0;
  // responses; truncated-normal magnitudes, the same defaults for both signs
  ResponseMagnitude accel_response;
  ResponseMagnitude decel_response;
  double response_duration_s = 1.5;
  // models
  IdmParams idm;
  LcParams lc;
  double thw_buffer_s = 0.6;
  double overlap_tolerance_m = 0.01;
  // predictor for the in-loop pipeline: constant velocity unless a trained
  // model is supplied
  bool use_trained_model = false;
  std::string model_path;

  void validate() const;
  double total_duration_s() const { return warmup_s + measurement_s; }
};

struct ScheduledResponse {
  double activate_t = 0.0;
  double end_t = 0.0;
  double accel_cmd = 0.0;     // signed; 0 for the shortened-reaction branch
  bool speed_branch = false;  // true: speed adjustment, false: reaction pathway
  CollisionLocation location = CollisionLocation::FRONT;
};

struct SimVehicle {
  int64_t id = 0;
  int lane = 0;
  double x = 0.0;  // center, m
  double y = 0.0;
  double v = 0.0;
  double a = 0.0;
  double length = 5.0;
  double width = 1.8;
  double desired_speed = 15.0;
  double reaction_time_s = 1.7;
  bool equipped_draw = false;  // penetration draw, independent of method
  bool equipped = false;

  enum class LcPhase { NONE, ATTEMPT, EXECUTE };
  LcPhase lc_phase = LcPhase::NONE;
  int lc_target = -1;
  int lc_source = -1;
  double lc_progress = 0.0;  // 0..1 while executing
  double lc_cooldown_until = 0.0;
  bool attempted_lc = false;
  bool completed_lc = false;
  double first_attempt_t = -1.0;

  std::optional<ScheduledResponse> response;
  double hazard_onset_t = -1.0;  // emergency-braking perception clock

  double spawn_t = 0.0;
  // per-step logs for post-run metrics
  std::vector<double> speed_log;
  std::vector<bool> lead_exists_log;
  std::vector<double> lead_gap_log;
  std::vector<double> lead_v_log;
  int hazard_steps = 0;
  int warnings_received = 0;
};

// Emits the response for one warning; the vehicle must be equipped.
ScheduledResponse apply_warning_response(const SimVehicle& vehicle, const WarningSignal& signal,
                                         double now, RandomStream& rng, const SimConfig& cfg);

struct SimWarningLogEntry {
  double t = 0.0;
  int64_t vehicle = 0;
  CollisionLocation location = CollisionLocation::FRONT;
  bool speed_branch = false;
  double accel_cmd = 0.0;
  int horizon_steps = 0;
};

struct SimCollisionLogEntry {
  double t = 0.0;
  int64_t a = 0;
  int64_t b = 0;
  double overlap_m = 0.0;
};

struct VehicleSummary {
  int64_t id = 0;
  bool equipped_draw = false;
  bool equipped = false;
  bool attempted_lc = false;
  bool completed_lc = false;
  double first_attempt_t = -1.0;
  double spawn_t = 0.0;
  double exit_t = -1.0;  // <0: still on segment at the end
  BehaviorRecord behavior;
  int hazard_steps = 0;
  int warnings_received = 0;
};

struct SimResult {
  int spawned = 0;
  int exited = 0;
  int remaining = 0;
  int throughput_count = 0;
  uint64_t seed = 0;
  std::vector<VehicleSummary> vehicles;
  std::vector<SimWarningLogEntry> warnings;
  std::vector<SimCollisionLogEntry> collisions;
  std::vector<ExitEvent> exits;
};

SimResult run_sim(const SimConfig& cfg, const ModelParams* model = nullptr,
                  const ModelConfig* model_cfg = nullptr);

struct SweepCell {
  double rate = 0.0;
  WarningMethod method = WarningMethod::NONE;
  double mean_throughput = 0.0;
  std::vector<int> per_seed_throughput;
  double drac_p50 = 0.0, drac_p90 = 0.0, drac_p95 = 0.0;
  double decel_p50 = 0.0, decel_p90 = 0.0, decel_p95 = 0.0;
  double jerk_p50 = 0.0, jerk_p90 = 0.0, jerk_p95 = 0.0;
  int lc_vehicle_count = 0;
};

struct SweepTable {
  std::vector<double> rates;
  std::vector<WarningMethod> methods;
  std::vector<uint64_t> seeds;
  std::vector<SweepCell> cells;  // rates x methods, row-major
};

SweepTable sweep_penetration(const SimConfig& base, const std::vector<double>& rates,
                             const std::vector<WarningMethod>& methods,
                             const std::vector<uint64_t>& seeds);

// Nearest-rank quantile of a copy of the values (q in [0,1]).
double quantile(std::vector<double> values, double q);

}  // namespace lcew
