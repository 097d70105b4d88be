#include <algorithm>
#include <cmath>
#include <set>

#include "lcew/safety_metrics.hpp"

namespace lcew {

PredictionErrorReport prediction_errors(const Tensor3& pred, const Tensor3& truth) {
  if (!pred.same_shape(truth)) throw std::invalid_argument("prediction_errors: shape mismatch");
  const int f_steps = pred.d0();
  const int n = pred.d2();
  if (pred.d1() != 2) throw std::invalid_argument("prediction_errors: expected 2 coordinates");

  PredictionErrorReport r;
  r.per_step_ade.assign(f_steps, 0.0);
  double sq_x = 0.0, sq_y = 0.0;
  for (int f = 0; f < f_steps; ++f) {
    for (int i = 0; i < n; ++i) {
      const double ex = pred.at(f, 0, i) - truth.at(f, 0, i);
      const double ey = pred.at(f, 1, i) - truth.at(f, 1, i);
      const double e = std::hypot(ex, ey);
      r.ade += e;
      r.per_step_ade[f] += e;
      sq_x += ex * ex;
      sq_y += ey * ey;
      if (f == f_steps - 1) r.fde += e;
    }
  }
  const double count = static_cast<double>(f_steps) * n;
  r.ade /= count;
  r.fde /= n;
  r.rmse_x = std::sqrt(sq_x / count);
  r.rmse_y = std::sqrt(sq_y / count);
  for (double& v : r.per_step_ade) v /= n;
  return r;
}

std::optional<double> ttc_pair(const LongState& leader, const LongState& follower,
                               bool* overlap) {
  if (overlap) *overlap = false;
  const double gap = (leader.x - 0.5 * leader.length) - (follower.x + 0.5 * follower.length);
  if (gap < 0.0) {
    if (overlap) *overlap = true;
    return 0.0;
  }
  const double closing = follower.v - leader.v;
  if (closing <= 0.0) return std::nullopt;
  return gap / closing;
}

std::pair<std::vector<RiskRecord>, RiskCounts> classify_risks(
    const std::vector<RoiSnapshot>& snapshots, double ttc_threshold_s) {
  std::vector<RiskRecord> records;
  RiskCounts counts;

  for (const auto& snap : snapshots) {
    const RoiVehicleState* ego = nullptr;
    for (const auto& v : snap.vehicles)
      if (v.id == snap.ego_id) ego = &v;
    if (!ego) throw std::invalid_argument("classify_risks: ego missing from snapshot");

    // Candidate leader-follower pairs: consecutive vehicles per lane plus the
    // ego against its immediate target-lane neighbors.
    std::set<std::pair<int64_t, int64_t>> seen;
    std::vector<std::pair<const RoiVehicleState*, const RoiVehicleState*>> pairs;  // leader, follower
    auto add_pair = [&](const RoiVehicleState* lead, const RoiVehicleState* follow) {
      const auto key = std::minmax(lead->id, follow->id);
      if (seen.insert({key.first, key.second}).second) pairs.push_back({lead, follow});
    };

    for (int lane : {snap.ego_lane, snap.target_lane}) {
      std::vector<const RoiVehicleState*> in_lane;
      for (const auto& v : snap.vehicles)
        if (v.lane == lane) in_lane.push_back(&v);
      std::sort(in_lane.begin(), in_lane.end(),
                [](const RoiVehicleState* a, const RoiVehicleState* b) {
                  return a->x != b->x ? a->x < b->x : a->id < b->id;
                });
      for (size_t i = 0; i + 1 < in_lane.size(); ++i) add_pair(in_lane[i + 1], in_lane[i]);
      if (lane == snap.target_lane && ego->lane != snap.target_lane) {
        const RoiVehicleState* lead = nullptr;
        const RoiVehicleState* lag = nullptr;
        for (const auto* v : in_lane) {
          if (v->x >= ego->x) {
            if (!lead || v->x < lead->x) lead = v;
          } else if (!lag || v->x > lag->x) {
            lag = v;
          }
        }
        if (lead) add_pair(lead, ego);
        if (lag) add_pair(ego, lag);
      }
      if (lane == snap.target_lane) break;  // ego_lane == target_lane handled once
    }

    for (const auto& [lead, follow] : pairs) {
      const auto ttc = ttc_pair({lead->x, lead->v, lead->length},
                                {follow->x, follow->v, follow->length});
      if (!ttc || *ttc >= ttc_threshold_s) continue;
      RiskRecord rec;
      rec.t = snap.t;
      rec.id_a = lead->id;
      rec.id_b = follow->id;
      rec.ttc = *ttc;
      const bool has_ego = lead->id == snap.ego_id || follow->id == snap.ego_id;
      if (has_ego) {
        rec.category = RiskCategory::DIRECT;
        ++counts.direct;
      } else if (lead->x > ego->x && follow->x > ego->x) {
        rec.category = RiskCategory::INDIRECT_FORWARD;
        ++counts.indirect_forward;
      } else {
        rec.category = RiskCategory::INDIRECT_REAR;
        ++counts.indirect_rear;
      }
      records.push_back(rec);
    }
  }
  return {records, counts};
}

double drac(double follower_v, double leader_v, double gap) {
  const double closing = follower_v - leader_v;
  if (closing <= 0.0 || gap <= 0.0) return 0.0;
  return closing * closing / (2.0 * gap);
}

BehaviorRecord behavior_metrics(int64_t vehicle_id, const SpeedSeries& speed,
                                const LeaderSeries* leader) {
  const int n = static_cast<int>(speed.v.size());
  if (n < 3) throw DataError("behavior_metrics: need at least 3 samples for derivatives");
  const double dt = speed.dt;

  auto derive = [dt](const std::vector<double>& s) {
    const int m = static_cast<int>(s.size());
    std::vector<double> d(m);
    for (int i = 0; i < m; ++i) {
      const int lo = std::max(0, i - 1);
      const int hi = std::min(m - 1, i + 1);
      d[i] = (s[hi] - s[lo]) / (dt * (hi - lo));
    }
    return d;
  };

  const auto accel = derive(speed.v);
  const auto jerk = derive(accel);

  BehaviorRecord rec;
  rec.vehicle_id = vehicle_id;
  for (int i = 0; i < n; ++i) {
    rec.max_decel = std::max(rec.max_decel, -accel[i]);
    rec.max_jerk = std::max(rec.max_jerk, std::abs(jerk[i]));
  }
  rec.max_decel = std::max(rec.max_decel, 0.0);

  if (leader) {
    const size_t m = leader->has_leader.size();
    if (leader->gap.size() != m || leader->leader_v.size() != m || m != speed.v.size()) {
      throw std::invalid_argument("behavior_metrics: leader series misaligned");
    }
    for (size_t i = 0; i < m; ++i) {
      if (!leader->has_leader[i]) continue;
      rec.max_drac = std::max(rec.max_drac, drac(speed.v[i], leader->leader_v[i], leader->gap[i]));
    }
  }
  return rec;
}

int throughput(const std::vector<ExitEvent>& exits, double window_start_s,
               double window_end_s) {
  int count = 0;
  for (const auto& e : exits) {
    if (e.t > window_start_s && e.t <= window_end_s) ++count;
  }
  return count;
}

}  // namespace lcew
