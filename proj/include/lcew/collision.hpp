#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "lcew/core.hpp"
#include "lcew/stgcnn.hpp"

namespace lcew {

struct OBB {
  Vec2 center;
  double half_length = 0.0;
  double half_width = 0.0;
  double heading = 0.0;  // rad, 0 = lane direction

  std::array<Vec2, 4> corners() const;
};

struct ObbState {
  Vec2 pos;
  double speed = 0.0;  // m/s, >= 0
  double heading = 0.0;
};

// Footprint box; when rear_role is set the box is stretched forward along its
// heading by speed * thw_buffer so the trailing vehicle keeps a reaction gap.
OBB build_obb(const ObbState& state, double length, double width, bool rear_role,
              double thw_buffer_s = 0.6);

// Four-axis separating-axis test: lane-parallel, lane-perpendicular, the
// cutting vehicle's heading and its perpendicular. Strict overlap on all four
// axes is required; touching boxes do not collide.
bool sat_collide(const OBB& a, const OBB& b, double lane_heading = 0.0);

struct CollisionEvent {
  int64_t id_a = 0;
  int64_t id_b = 0;
  int step = 0;        // index into the prediction horizon, 0-based
  Vec2 location_hint;  // midpoint of the pair's predicted centers
};

struct VehicleDims {
  double length = 5.0;
  double width = 1.8;
};

struct DetectParams {
  double thw_buffer_s = 0.6;
  double min_heading_disp_m = 0.05;  // below this, reuse the previous heading
  double lane_heading = 0.0;
};

// All unordered pairs, every predicted step; first colliding step per pair.
std::vector<CollisionEvent> detect_collisions(const Prediction& pred, const Scene& scene,
                                              const std::vector<VehicleDims>& dims,
                                              const DetectParams& params = {});

enum class CollisionLocation { FRONT, REAR };

struct WarningSignal {
  int horizon_steps = 0;
  CollisionLocation location = CollisionLocation::FRONT;
  CollisionEvent first_event;
};

// Earliest event wins (tie: closer to ego longitudinally). FRONT when the
// event midpoint lies ahead of the ego's predicted position at that step.
std::optional<WarningSignal> issue_warning(const std::vector<CollisionEvent>& events,
                                           const Prediction& pred, int ego_index,
                                           double lane_heading = 0.0);

}  // namespace lcew
