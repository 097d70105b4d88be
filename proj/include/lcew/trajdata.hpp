#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lcew/core.hpp"
#include "lcew/tensor.hpp"

namespace lcew {

struct TrajectoryPoint {
  double t = 0.0;   // s
  double x = 0.0;   // longitudinal, m
  double y = 0.0;   // lateral, m
  double vx = 0.0;  // m/s
  double vy = 0.0;  // m/s
};

struct VehicleTrack {
  int64_t id = 0;
  double length = 5.0;  // m, >= 1.0
  double width = 1.8;   // m, >= 0.5
  std::string agent_type = "car";
  std::vector<TrajectoryPoint> points;  // sorted by time, 0.1 s apart

  double start_time() const { return points.front().t; }
  double end_time() const { return points.back().t; }
  bool covers(double t0, double t1) const;
  // Index of the sample at wall time t, or nullopt if t is not on this
  // track's 10 Hz grid.
  std::optional<int> index_at(double t) const;
  std::optional<TrajectoryPoint> state_at(double t) const;
};

// Lane center polylines; lane boundaries (markers) run midway between
// adjacent centers. Parsed from a small text config:
//   lane <index> width <w> center x1,y1 x2,y2 ...
struct LaneGeometry {
  struct Lane {
    int index = 0;
    double width = 3.5;
    std::vector<Vec2> center;  // x strictly increasing
  };
  std::vector<Lane> lanes;

  static LaneGeometry parse_file(const std::string& path);
  static LaneGeometry parse_string(const std::string& text);

  const Lane* lane(int index) const;
  double center_y(int lane_index, double x) const;
  // Index of the lane whose center is laterally nearest at x.
  int lane_index_at(double x, double y) const;
  // Lateral position of the marker separating two laterally adjacent lanes.
  double marker_y(int lane_a, int lane_b, double x) const;
  // Lanes sorted by center y at x (used to find lateral neighbors).
  std::vector<int> lanes_by_lateral_order(double x) const;
};

struct LCEvent {
  int64_t ego_id = 0;
  double start_t = 0.0;
  double cross_t = 0.0;  // lane-marker crossing time, interpolated
  double end_t = 0.0;
  int source_lane = 0;
  int target_lane = 0;
};

struct ExtractDiagnostics {
  int crossings_seen = 0;
  int truncated = 0;    // stability or onset window ran past the recording
  int unsustained = 0;  // lateral-motion onset shorter than the threshold
  int overlapped = 0;   // crossing inside a previously accepted event
};

// Thresholds delimiting a lane-change maneuver around a marker crossing.
struct LcExtractParams {
  double onset_lateral_speed = 0.2;    // m/s toward the target lane
  double onset_sustain_s = 0.5;
  double settle_offset = 0.3;          // m from target-lane center
  double settle_sustain_s = 1.0;
};

struct RoiParams {
  double thw_limit_s = 5.0;        // forward detection bound
  double rear_range_m = 250.0;     // rear sensor bound
  double stopped_lookahead_m = 10.0;  // forward window when ego speed is 0
};

struct Scene {
  int ego_index = 0;
  std::vector<int64_t> vehicle_ids;
  Tensor3 history;  // T x 2 x N, absolute positions
  Tensor3 future;   // F x 2 x N
  double t0 = 0.0;  // wall time of the first history step
  std::vector<std::array<double, 2>> dims;  // length,width per vehicle

  int num_vehicles() const { return static_cast<int>(vehicle_ids.size()); }
  int history_steps() const { return history.d0(); }
  int future_steps() const { return future.d0(); }
  Vec2 history_pos(int t, int n) const { return {history.at(t, 0, n), history.at(t, 1, n)}; }
  Vec2 future_pos(int f, int n) const { return {future.at(f, 0, n), future.at(f, 1, n)}; }
  Vec2 last_observed(int n) const { return history_pos(history.d0() - 1, n); }
};

// CSV schema: track_id,frame_id,timestamp_ms,agent_type,x,y,vx,vy,psi_rad,length,width
// vx,vy,psi_rad are optional; velocities are filled by central differences
// when the columns are missing.
std::vector<VehicleTrack> parse_trajectory_file(const std::string& path);
std::vector<VehicleTrack> parse_trajectory_stream(std::istream& in, const std::string& name);

std::vector<LCEvent> extract_lc_events(const std::vector<VehicleTrack>& tracks,
                                       const LaneGeometry& lanes,
                                       ExtractDiagnostics* diag = nullptr,
                                       const LcExtractParams& params = {});

// Vehicles in the ego's current and target lanes whose forward THW or rear
// range puts them inside the LC region of interest at time t. Ego included.
std::vector<int64_t> build_roi(const std::vector<VehicleTrack>& tracks,
                               const LaneGeometry& lanes, int64_t ego_id,
                               double t, int target_lane,
                               const RoiParams& params = {});

std::vector<Scene> make_scene_windows(const LCEvent& event,
                                      const std::vector<VehicleTrack>& tracks,
                                      const LaneGeometry& lanes, int history_steps,
                                      int future_steps, int stride,
                                      const RoiParams& params = {});

}  // namespace lcew
