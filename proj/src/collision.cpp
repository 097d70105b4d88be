#include <algorithm>
#include <cmath>
#include <tuple>

#include "lcew/collision.hpp"

namespace lcew {

std::array<Vec2, 4> OBB::corners() const {
  const double c = std::cos(heading), s = std::sin(heading);
  const Vec2 ex{c * half_length, s * half_length};
  const Vec2 ey{-s * half_width, c * half_width};
  return {Vec2{center.x + ex.x + ey.x, center.y + ex.y + ey.y},
          Vec2{center.x + ex.x - ey.x, center.y + ex.y - ey.y},
          Vec2{center.x - ex.x - ey.x, center.y - ex.y - ey.y},
          Vec2{center.x - ex.x + ey.x, center.y - ex.y + ey.y}};
}

OBB build_obb(const ObbState& state, double length, double width, bool rear_role,
              double thw_buffer_s) {
  if (length <= 0.0 || width <= 0.0) throw std::invalid_argument("build_obb: nonpositive dims");
  if (state.speed < 0.0) throw std::invalid_argument("build_obb: negative speed");
  OBB box;
  box.heading = wrap_angle(state.heading);
  box.half_width = 0.5 * width;
  const double extension = rear_role ? state.speed * thw_buffer_s : 0.0;
  box.half_length = 0.5 * (length + extension);
  // Extension grows the box forward: rear face stays put, center shifts.
  const Vec2 dir{std::cos(box.heading), std::sin(box.heading)};
  box.center = state.pos + dir * (0.5 * extension);
  return box;
}

namespace {

struct Interval {
  double lo, hi;
};

Interval project(const OBB& box, const Vec2& axis) {
  const auto pts = box.corners();
  double lo = pts[0].dot(axis), hi = lo;
  for (int i = 1; i < 4; ++i) {
    const double p = pts[i].dot(axis);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  return {lo, hi};
}

bool strictly_overlaps(const Interval& a, const Interval& b) {
  return a.hi > b.lo && b.hi > a.lo;
}

// The box whose heading deviates more from the lane direction supplies the
// third and fourth axes. Ties break on the full box description so that the
// choice does not depend on argument order.
const OBB& cutting_box(const OBB& a, const OBB& b, double lane_heading) {
  const double da = std::abs(wrap_angle(a.heading - lane_heading));
  const double db = std::abs(wrap_angle(b.heading - lane_heading));
  if (da != db) return da > db ? a : b;
  const auto key = [](const OBB& o) {
    return std::make_tuple(o.heading, o.center.x, o.center.y, o.half_length, o.half_width);
  };
  return key(a) >= key(b) ? a : b;
}

}  // namespace

bool sat_collide(const OBB& a, const OBB& b, double lane_heading) {
  const OBB& cut = cutting_box(a, b, lane_heading);
  const double lc = std::cos(lane_heading), ls = std::sin(lane_heading);
  const double cc = std::cos(cut.heading), cs = std::sin(cut.heading);
  const Vec2 axes[4] = {{lc, ls}, {-ls, lc}, {cc, cs}, {-cs, cc}};
  for (const Vec2& axis : axes) {
    if (!strictly_overlaps(project(a, axis), project(b, axis))) return false;
  }
  return true;
}

std::vector<CollisionEvent> detect_collisions(const Prediction& pred, const Scene& scene,
                                              const std::vector<VehicleDims>& dims,
                                              const DetectParams& params) {
  const int n = pred.num_vehicles();
  const int f_steps = pred.steps();
  if (n != scene.num_vehicles()) throw std::invalid_argument("detect_collisions: prediction/scene N mismatch");
  if (static_cast<int>(dims.size()) != n) throw std::invalid_argument("detect_collisions: dims size != N");

  const Vec2 lane_dir{std::cos(params.lane_heading), std::sin(params.lane_heading)};

  // Headings and speeds from consecutive predicted displacements.
  std::vector<std::vector<double>> heading(f_steps, std::vector<double>(n));
  std::vector<std::vector<double>> speed(f_steps, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    double prev = params.lane_heading;
    for (int f = 0; f < f_steps; ++f) {
      const Vec2 from = f == 0 ? scene.last_observed(i) : pred.pos(f - 1, i);
      const Vec2 d = pred.pos(f, i) - from;
      const double dist = d.norm();
      if (dist >= params.min_heading_disp_m) prev = std::atan2(d.y, d.x);
      heading[f][i] = prev;
      speed[f][i] = dist / kSampleDt;
    }
  }

  std::vector<CollisionEvent> events;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int f = 0; f < f_steps; ++f) {
        const Vec2 pi = pred.pos(f, i);
        const Vec2 pj = pred.pos(f, j);
        // Longitudinally trailing vehicle of the pair plays the rear role.
        const double si = pi.dot(lane_dir), sj = pj.dot(lane_dir);
        bool i_rear;
        if (si != sj) {
          i_rear = si < sj;
        } else if (pi.y != pj.y) {
          i_rear = pi.y < pj.y;
        } else {
          i_rear = scene.vehicle_ids[i] < scene.vehicle_ids[j];
        }
        const OBB a = build_obb({pi, speed[f][i], heading[f][i]}, dims[i].length,
                                dims[i].width, i_rear, params.thw_buffer_s);
        const OBB b = build_obb({pj, speed[f][j], heading[f][j]}, dims[j].length,
                                dims[j].width, !i_rear, params.thw_buffer_s);
        if (sat_collide(a, b, params.lane_heading)) {
          CollisionEvent ev;
          ev.id_a = scene.vehicle_ids[i];
          ev.id_b = scene.vehicle_ids[j];
          ev.step = f;
          ev.location_hint = (pi + pj) * 0.5;
          events.push_back(ev);
          break;  // first colliding step for this pair
        }
      }
    }
  }
  return events;
}

std::optional<WarningSignal> issue_warning(const std::vector<CollisionEvent>& events,
                                           const Prediction& pred, int ego_index,
                                           double lane_heading) {
  if (events.empty()) return std::nullopt;
  if (ego_index < 0 || ego_index >= pred.num_vehicles()) {
    throw std::invalid_argument("issue_warning: ego index out of range");
  }
  const Vec2 lane_dir{std::cos(lane_heading), std::sin(lane_heading)};

  const CollisionEvent* best = nullptr;
  double best_dist = 0.0;
  for (const auto& ev : events) {
    const double ego_s = pred.pos(ev.step, ego_index).dot(lane_dir);
    const double dist = std::abs(ev.location_hint.dot(lane_dir) - ego_s);
    if (!best || ev.step < best->step || (ev.step == best->step && dist < best_dist)) {
      best = &ev;
      best_dist = dist;
    }
  }

  WarningSignal sig;
  sig.horizon_steps = pred.steps();
  sig.first_event = *best;
  const double ego_s = pred.pos(best->step, ego_index).dot(lane_dir);
  sig.location = best->location_hint.dot(lane_dir) > ego_s ? CollisionLocation::FRONT
                                                           : CollisionLocation::REAR;
  return sig;
}

}  // namespace lcew
