#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lcew/stgcnn.hpp"
#include "lcew/tensor.hpp"

namespace lcew {

struct PredictionErrorReport {
  double ade = 0.0;
  double fde = 0.0;
  double rmse_x = 0.0;
  double rmse_y = 0.0;
  std::vector<double> per_step_ade;  // mean Euclidean error at each horizon step
};

PredictionErrorReport prediction_errors(const Tensor3& pred, const Tensor3& truth);

// Longitudinal state in a lane-aligned frame.
struct LongState {
  double x = 0.0;       // center position, m
  double v = 0.0;       // m/s
  double length = 5.0;  // m
};

// Bumper-to-bumper TTC; nullopt when the pair is not closing. Overlapping
// pair reports TTC 0 with the flag set.
std::optional<double> ttc_pair(const LongState& leader, const LongState& follower,
                               bool* overlap = nullptr);

enum class RiskCategory { DIRECT, INDIRECT_FORWARD, INDIRECT_REAR };

struct RiskRecord {
  double t = 0.0;
  int64_t id_a = 0;
  int64_t id_b = 0;
  double ttc = 0.0;
  RiskCategory category = RiskCategory::DIRECT;
};

struct RoiVehicleState {
  int64_t id = 0;
  int lane = 0;
  double x = 0.0;
  double v = 0.0;
  double length = 5.0;
};

struct RoiSnapshot {
  double t = 0.0;
  int64_t ego_id = 0;
  int ego_lane = 0;
  int target_lane = 0;
  std::vector<RoiVehicleState> vehicles;  // includes ego
};

struct RiskCounts {
  int direct = 0;
  int indirect_forward = 0;
  int indirect_rear = 0;
  int total() const { return direct + indirect_forward + indirect_rear; }
};

// Screens leader-follower pairs (consecutive per lane, plus ego against its
// immediate target-lane neighbors) for TTC below the threshold, per snapshot.
// Pairs that include the ego are DIRECT; other pairs are INDIRECT_FORWARD
// when both members are ahead of the ego, INDIRECT_REAR otherwise.
std::pair<std::vector<RiskRecord>, RiskCounts> classify_risks(
    const std::vector<RoiSnapshot>& snapshots, double ttc_threshold_s = 5.0);

struct BehaviorRecord {
  int64_t vehicle_id = 0;
  double max_drac = 0.0;   // m/s^2
  double max_decel = 0.0;  // m/s^2, magnitude
  double max_jerk = 0.0;   // m/s^3, magnitude
};

struct SpeedSeries {
  double dt = 0.1;
  std::vector<double> v;  // m/s
};

// Per-step leader context aligned with the speed series; gap is
// bumper-to-bumper. Entries with has_leader false are skipped for DRAC.
struct LeaderSeries {
  std::vector<bool> has_leader;
  std::vector<double> gap;
  std::vector<double> leader_v;
};

double drac(double follower_v, double leader_v, double gap);

BehaviorRecord behavior_metrics(int64_t vehicle_id, const SpeedSeries& speed,
                                const LeaderSeries* leader = nullptr);

struct ExitEvent {
  double t = 0.0;
  int64_t vehicle_id = 0;
};

// Vehicles crossing the downstream boundary inside (window_start, window_end].
int throughput(const std::vector<ExitEvent>& exits, double window_start_s,
               double window_end_s);

}  // namespace lcew
