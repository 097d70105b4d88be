#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>

#include "lcew/microsim.hpp"

namespace lcew {

std::string method_name(WarningMethod m) {
  switch (m) {
    case WarningMethod::NONE: return "none";
    case WarningMethod::TTC: return "ttc";
    case WarningMethod::LCEW: return "lcew";
  }
  return "?";
}

WarningMethod method_from_name(const std::string& name) {
  if (name == "none") return WarningMethod::NONE;
  if (name == "ttc") return WarningMethod::TTC;
  if (name == "lcew") return WarningMethod::LCEW;
  throw std::invalid_argument("unknown warning method '" + name + "' (expected none|ttc|lcew)");
}

void SimConfig::validate() const {
  if (penetration < 0.0 || penetration > 1.0) throw std::invalid_argument("SimConfig: penetration must be in [0,1]");
  if (warning_horizon_s <= 0.0) throw std::invalid_argument("SimConfig: warning_horizon_s must be positive");
  if (dt <= 0.0) throw std::invalid_argument("SimConfig: dt must be positive");
  if (segment_length <= 0.0) throw std::invalid_argument("SimConfig: segment_length must be positive");
  if (merge_x <= 0.0 || merge_x >= segment_length) throw std::invalid_argument("SimConfig: merge_x must lie inside the segment");
  if (warmup_s < 0.0 || measurement_s <= 0.0) throw std::invalid_argument("SimConfig: bad warmup/measurement");
  if (mainline_demand_vph < 0.0 || ramp_demand_vph < 0.0) throw std::invalid_argument("SimConfig: negative demand");
  if (use_trained_model && model_path.empty()) throw std::invalid_argument("SimConfig: use_trained_model needs model_path");
}

double idm_accel(const IdmParams& p, double v, double v_desired, bool has_leader,
                 double gap, double leader_v, bool* overlap) {
  if (overlap) *overlap = false;
  const double free_term = 1.0 - std::pow(std::max(v, 0.0) / std::max(v_desired, 0.1), p.delta);
  double a;
  if (!has_leader) {
    a = p.a_max * free_term;
  } else if (gap <= 0.0) {
    if (overlap) *overlap = true;
    return -p.b_max;
  } else {
    const double dv = v - leader_v;
    const double s_star = p.min_gap +
        std::max(0.0, v * p.headway_s + v * dv / (2.0 * std::sqrt(p.a_max * p.b_comf)));
    a = p.a_max * (free_term - (s_star / gap) * (s_star / gap));
  }
  return std::clamp(a, -p.b_max, p.a_max);
}

bool lc_gaps_acceptable(const LcParams& p, double v_ego, const LcNeighborGaps& gaps) {
  if (gaps.lead_exists && gaps.lead_gap < p.min_gap + p.lead_time_gap_s * v_ego) return false;
  if (gaps.lag_exists && gaps.lag_gap < p.min_gap + p.lag_time_gap_s * gaps.lag_v) return false;
  return true;
}

ScheduledResponse apply_warning_response(const SimVehicle& vehicle, const WarningSignal& signal,
                                         double now, RandomStream& rng, const SimConfig& cfg) {
  if (!vehicle.equipped) {
    throw std::invalid_argument("apply_warning_response: vehicle is not equipped");
  }
  ScheduledResponse resp;
  resp.location = signal.location;
  resp.activate_t = now + vehicle.reaction_time_s;
  if (rng.bernoulli(0.5)) {
    resp.speed_branch = true;
    if (signal.location == CollisionLocation::FRONT) {
      const auto& m = cfg.decel_response;
      resp.accel_cmd = -rng.truncated_normal(m.mean, m.sd, m.lo, m.hi);
    } else {
      const auto& m = cfg.accel_response;
      resp.accel_cmd = rng.truncated_normal(m.mean, m.sd, m.lo, m.hi);
    }
    resp.end_t = resp.activate_t + cfg.response_duration_s;
  } else {
    // Shortened-reaction pathway: no speed override; hazard responses already
    // run at the equipped 1.3 s latency. The window still holds off the LC.
    resp.speed_branch = false;
    resp.accel_cmd = 0.0;
    resp.end_t = resp.activate_t;
  }
  return resp;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const int n = static_cast<int>(values.size());
  int idx = static_cast<int>(std::ceil(q * n)) - 1;
  idx = std::clamp(idx, 0, n - 1);
  return values[idx];
}

namespace {

constexpr int kLaneCount = 3;  // lane 0 = ramp continuation, 1..2 = mainline

struct PendingArrival {
  int entry_lane;
  double desired_speed;
  bool equipped_draw;
};

class Simulation {
 public:
  Simulation(const SimConfig& cfg, const ModelParams* model, const ModelConfig* model_cfg)
      : cfg_(cfg),
        model_(model),
        model_cfg_(model_cfg),
        arrival_ramp_(derive_seed(cfg.seed, 10)),
        arrival_main1_(derive_seed(cfg.seed, 11)),
        arrival_main2_(derive_seed(cfg.seed, 12)),
        driver_rng_(derive_seed(cfg.seed, 20)),
        response_rng_(derive_seed(cfg.seed, 30)) {
    cfg.validate();
    if (cfg.use_trained_model && (!model_ || !model_cfg_)) {
      throw std::invalid_argument("run_sim: config requests a trained model but none was supplied");
    }
    next_arrival_[0] = cfg_.ramp_demand_vph > 0.0
        ? arrival_ramp_.exponential(cfg_.ramp_demand_vph / 3600.0) : 1e18;
    const double per_lane = 0.5 * cfg_.mainline_demand_vph;
    next_arrival_[1] = per_lane > 0.0 ? arrival_main1_.exponential(per_lane / 3600.0) : 1e18;
    next_arrival_[2] = per_lane > 0.0 ? arrival_main2_.exponential(per_lane / 3600.0) : 1e18;
  }

  SimResult run() {
    const int steps = static_cast<int>(std::round(cfg_.total_duration_s() / cfg_.dt));
    for (int k = 0; k < steps; ++k) {
      now_ = k * cfg_.dt;
      step();
    }
    return finish();
  }

 private:
  double lane_center(int lane) const { return lane * cfg_.lane_width; }
  bool lane_exists(int lane, double x) const {
    if (lane < 0 || lane >= kLaneCount) return false;
    return lane != 0 || x >= cfg_.merge_x - 1e-9;
  }
  double entry_x(int lane) const { return lane == 0 ? cfg_.merge_x : 0.0; }

  static double rear(const SimVehicle& v) { return v.x - 0.5 * v.length; }
  static double front(const SimVehicle& v) { return v.x + 0.5 * v.length; }
  static double gap_between(const SimVehicle& follower, const SimVehicle& leader) {
    return rear(leader) - front(follower);
  }

  // Lanes the vehicle currently occupies for leader/follower interaction.
  std::vector<int> lanes_of(const SimVehicle& v) const {
    if (v.lc_phase == SimVehicle::LcPhase::EXECUTE) return {v.lc_source, v.lc_target};
    return {v.lane};
  }

  void rebuild_lane_index() {
    for (auto& l : lane_members_) l.clear();
    for (size_t i = 0; i < active_.size(); ++i) {
      for (int lane : lanes_of(active_[i])) lane_members_[lane].push_back(i);
    }
    for (auto& members : lane_members_) {
      std::sort(members.begin(), members.end(), [&](size_t a, size_t b) {
        return active_[a].x != active_[b].x ? active_[a].x < active_[b].x
                                            : active_[a].id < active_[b].id;
      });
    }
  }

  const SimVehicle* leader_in_lane(int lane, double x, int64_t self_id) const {
    const SimVehicle* best = nullptr;
    for (size_t idx : lane_members_[lane]) {
      const SimVehicle& v = active_[idx];
      if (v.id == self_id) continue;
      if (v.x > x || (v.x == x && v.id > self_id)) {
        if (!best || v.x < best->x) best = &v;
        break;  // members sorted by x
      }
    }
    return best;
  }

  const SimVehicle* follower_in_lane(int lane, double x, int64_t self_id) const {
    const SimVehicle* best = nullptr;
    for (size_t idx : lane_members_[lane]) {
      const SimVehicle& v = active_[idx];
      if (v.id == self_id) continue;
      if (v.x < x || (v.x == x && v.id < self_id)) best = &v;
      else break;
    }
    return best;
  }

  // Effective leader: smallest front gap across the occupied lanes.
  const SimVehicle* effective_leader(const SimVehicle& v) const {
    const SimVehicle* best = nullptr;
    for (int lane : lanes_of(v)) {
      const SimVehicle* l = leader_in_lane(lane, v.x, v.id);
      if (l && (!best || l->x < best->x)) best = l;
    }
    return best;
  }

  void step() {
    spawn_arrivals();
    rebuild_lane_index();
    update_lane_changes_and_warnings();
    resolve_accelerations();
    integrate();
    handle_exits();
    detect_overlaps();
  }

  void spawn_arrivals() {
    // Arrival events fire from per-source streams in fixed lane order; driver
    // draws happen at arrival time so the population is identical across
    // warning methods under one seed.
    for (int lane = 0; lane < kLaneCount; ++lane) {
      RandomStream& stream = lane == 0 ? arrival_ramp_ : (lane == 1 ? arrival_main1_ : arrival_main2_);
      const double rate = lane == 0 ? cfg_.ramp_demand_vph / 3600.0
                                    : 0.5 * cfg_.mainline_demand_vph / 3600.0;
      while (rate > 0.0 && next_arrival_[lane] <= now_) {
        PendingArrival p;
        p.entry_lane = lane;
        p.desired_speed = driver_rng_.truncated_normal(cfg_.desired_speed_mean, cfg_.desired_speed_sd,
                                                       cfg_.desired_speed_lo, cfg_.desired_speed_hi);
        p.equipped_draw = driver_rng_.bernoulli(cfg_.penetration);
        pending_.push_back(p);
        next_arrival_[lane] += stream.exponential(rate);
      }
    }
    // Insert queued arrivals whose entry area is clear.
    for (auto it = pending_.begin(); it != pending_.end();) {
      if (entry_clear(it->entry_lane)) {
        insert_vehicle(*it);
        it = pending_.erase(it);
      } else {
        ++it;
      }
    }
  }

  bool entry_clear(int lane) const {
    const double ex = entry_x(lane);
    for (const auto& v : active_) {
      bool in_lane = false;
      for (int l : lanes_of(v))
        if (l == lane) in_lane = true;
      if (!in_lane) continue;
      if (front(v) > ex - 1.0 && rear(v) < ex + cfg_.spawn_clear_m) return false;
    }
    return true;
  }

  void insert_vehicle(const PendingArrival& p) {
    SimVehicle v;
    v.id = next_id_++;
    v.lane = p.entry_lane;
    v.x = entry_x(p.entry_lane);
    v.y = lane_center(p.entry_lane);
    v.desired_speed = p.desired_speed;
    const double cap = p.entry_lane == 0 ? cfg_.ramp_entry_speed : cfg_.mainline_entry_speed;
    v.v = std::min(p.desired_speed, cap);
    v.length = cfg_.vehicle_length;
    v.width = cfg_.vehicle_width;
    v.equipped_draw = p.equipped_draw;
    v.equipped = p.equipped_draw && cfg_.method != WarningMethod::NONE;
    v.reaction_time_s = v.equipped ? cfg_.reaction_equipped_s : cfg_.reaction_unequipped_s;
    v.spawn_t = now_;
    active_.push_back(std::move(v));
    ++spawned_;
  }

  void update_lane_changes_and_warnings() {
    for (auto& v : active_) {
      if (v.lc_phase == SimVehicle::LcPhase::EXECUTE) {
        maybe_run_warning(v);
        continue;  // lateral progress advances in integrate()
      }

      if (now_ < v.lc_cooldown_until) {
        v.lc_phase = SimVehicle::LcPhase::NONE;
        v.lc_target = -1;
        continue;
      }

      // Candidate target by incentive (acceleration gain).
      const SimVehicle* cur_lead = effective_leader(v);
      const double a_cur = idm_of(v, cur_lead);
      int best_target = -1;
      double best_gain = cfg_.lc.incentive_threshold;
      for (int target : {v.lane - 1, v.lane + 1}) {
        if (!lane_exists(target, v.x)) continue;
        const SimVehicle* tgt_lead = leader_in_lane(target, v.x, v.id);
        const double a_tgt = idm_of(v, tgt_lead);
        const double gain = a_tgt - a_cur;
        if (gain > best_gain) {
          best_gain = gain;
          best_target = target;
        }
      }

      if (best_target < 0) {
        v.lc_phase = SimVehicle::LcPhase::NONE;
        v.lc_target = -1;
        continue;
      }

      v.lc_phase = SimVehicle::LcPhase::ATTEMPT;
      v.lc_target = best_target;
      if (!v.attempted_lc) {
        v.attempted_lc = true;
        v.first_attempt_t = now_;
      }

      maybe_run_warning(v);

      // Initiation holds while a warning response is pending or running.
      if (v.response && now_ < v.response->end_t) continue;

      LcNeighborGaps gaps;
      if (const SimVehicle* lead = leader_in_lane(best_target, v.x, v.id)) {
        gaps.lead_exists = true;
        gaps.lead_gap = gap_between(v, *lead);
        gaps.lead_v = lead->v;
      }
      if (const SimVehicle* lag = follower_in_lane(best_target, v.x, v.id)) {
        gaps.lag_exists = true;
        gaps.lag_gap = gap_between(*lag, v);
        gaps.lag_v = lag->v;
      }
      if (lc_gaps_acceptable(cfg_.lc, v.v, gaps)) {
        v.lc_phase = SimVehicle::LcPhase::EXECUTE;
        v.lc_source = v.lane;
        v.lc_progress = 0.0;
      }
    }
  }

  double idm_of(const SimVehicle& v, const SimVehicle* leader, double v_desired = -1.0) const {
    const double vd = v_desired > 0.0 ? v_desired : v.desired_speed;
    if (!leader) return idm_accel(cfg_.idm, v.v, vd, false, 0.0, 0.0);
    return idm_accel(cfg_.idm, v.v, vd, true, gap_between(v, *leader), leader->v);
  }

  void maybe_run_warning(SimVehicle& v) {
    if (cfg_.method == WarningMethod::NONE || !v.equipped) return;
    if (v.lc_target < 0) return;
    if (v.response && now_ < v.response->end_t) return;  // one active response

    std::optional<WarningSignal> signal;
    if (cfg_.method == WarningMethod::TTC) {
      signal = ttc_warning(v);
    } else {
      signal = lcew_warning(v);
    }
    if (!signal) return;

    const ScheduledResponse resp = apply_warning_response(v, *signal, now_, response_rng_, cfg_);
    v.response = resp;
    ++v.warnings_received;
    SimWarningLogEntry log;
    log.t = now_;
    log.vehicle = v.id;
    log.location = signal->location;
    log.speed_branch = resp.speed_branch;
    log.accel_cmd = resp.accel_cmd;
    log.horizon_steps = signal->horizon_steps;
    warnings_.push_back(log);
  }

  std::optional<WarningSignal> ttc_warning(const SimVehicle& v) const {
    std::optional<double> worst;
    CollisionLocation loc = CollisionLocation::FRONT;
    if (const SimVehicle* lead = leader_in_lane(v.lc_target, v.x, v.id)) {
      const auto ttc = ttc_pair({lead->x, lead->v, lead->length}, {v.x, v.v, v.length});
      if (ttc && *ttc < cfg_.ttc_warning_threshold_s) {
        worst = ttc;
        loc = CollisionLocation::FRONT;
      }
    }
    if (const SimVehicle* lag = follower_in_lane(v.lc_target, v.x, v.id)) {
      const auto ttc = ttc_pair({v.x, v.v, v.length}, {lag->x, lag->v, lag->length});
      if (ttc && *ttc < cfg_.ttc_warning_threshold_s && (!worst || *ttc < *worst)) {
        worst = ttc;
        loc = CollisionLocation::REAR;
      }
    }
    if (!worst) return std::nullopt;
    WarningSignal sig;
    sig.horizon_steps = static_cast<int>(std::round(cfg_.warning_horizon_s / cfg_.dt));
    sig.location = loc;
    sig.first_event.step = std::min(sig.horizon_steps - 1,
                                    static_cast<int>(std::round(*worst / cfg_.dt)));
    sig.first_event.id_a = v.id;
    return sig;
  }

  // Full pipeline: ROI membership, trajectory prediction over the warning
  // horizon, pairwise OBB detection, warning synthesis.
  std::optional<WarningSignal> lcew_warning(const SimVehicle& ego) const {
    const int f_steps = static_cast<int>(std::round(cfg_.warning_horizon_s / cfg_.dt));
    std::vector<const SimVehicle*> members;
    members.push_back(&ego);
    std::vector<int> roi_lanes{ego.lane};
    if (ego.lc_target != ego.lane) roi_lanes.push_back(ego.lc_target);
    for (int lane : roi_lanes) {
      for (size_t idx : lane_members_[lane]) {
        const SimVehicle& v = active_[idx];
        if (v.id == ego.id) continue;
        bool counted = false;
        for (const auto* m : members) counted = counted || m->id == v.id;
        if (counted) continue;
        if (v.x >= ego.x) {
          const double fg = gap_between(ego, v);
          if (ego.v <= 1e-9 ? fg <= 10.0 : fg / ego.v <= 5.0) members.push_back(&v);
        } else if (ego.x - v.x <= 250.0) {
          members.push_back(&v);
        }
      }
    }
    if (members.size() < 2) return std::nullopt;
    std::sort(members.begin(), members.end(),
              [](const SimVehicle* a, const SimVehicle* b) { return a->id < b->id; });

    const int n = static_cast<int>(members.size());
    int ego_idx = 0;
    Scene stub;
    stub.history = Tensor3(1, 2, n);
    stub.future = Tensor3(1, 2, n);
    std::vector<VehicleDims> dims(n);
    Prediction pred;
    pred.values = Tensor3(f_steps, 2, n);
    for (int i = 0; i < n; ++i) {
      const SimVehicle& m = *members[i];
      if (m.id == ego.id) ego_idx = i;
      stub.vehicle_ids.push_back(m.id);
      stub.history.at(0, 0, i) = m.x;
      stub.history.at(0, 1, i) = m.y;
      stub.dims.push_back({m.length, m.width});
      dims[i] = {m.length, m.width};
      const auto vel = predicted_velocity(m, m.id == ego.id);
      for (int f = 0; f < f_steps; ++f) {
        pred.values.at(f, 0, i) = m.x + vel.x * (f + 1) * cfg_.dt;
        pred.values.at(f, 1, i) = m.y + vel.y * (f + 1) * cfg_.dt;
      }
    }

    DetectParams dp;
    dp.thw_buffer_s = cfg_.thw_buffer_s;
    const auto events = detect_collisions(pred, stub, dims, dp);
    return issue_warning(events, pred, ego_idx);
  }

  // Constant-velocity projection; the ego's intended lateral motion is folded
  // in so an imminent maneuver is screened before it starts.
  Vec2 predicted_velocity(const SimVehicle& v, bool is_ego) const {
    double vy = 0.0;
    if (v.lc_phase == SimVehicle::LcPhase::EXECUTE) {
      const double dy = lane_center(v.lc_target) - lane_center(v.lc_source);
      vy = dy * 0.5 * M_PI * std::sin(M_PI * std::min(v.lc_progress, 1.0)) / cfg_.lc.duration_s;
    } else if (is_ego && v.lc_phase == SimVehicle::LcPhase::ATTEMPT) {
      vy = (lane_center(v.lc_target) - v.y) / cfg_.lc.duration_s;
    }
    return {v.v, vy};
  }

  void resolve_accelerations() {
    accel_.assign(active_.size(), 0.0);
    for (size_t i = 0; i < active_.size(); ++i) {
      SimVehicle& v = active_[i];
      const SimVehicle* leader = effective_leader(v);
      bool overlap = false;
      double a = leader ? idm_accel(cfg_.idm, v.v, v.desired_speed, true,
                                    gap_between(v, *leader), leader->v, &overlap)
                        : idm_accel(cfg_.idm, v.v, v.desired_speed, false, 0.0, 0.0);

      // Emergency braking beyond the comfortable rate engages only after the
      // driver's perception-reaction time since the hazard appeared.
      if (a < -cfg_.idm.b_comf && !overlap) {
        if (v.hazard_onset_t < 0.0) v.hazard_onset_t = now_;
        if (now_ - v.hazard_onset_t < v.reaction_time_s) a = -cfg_.idm.b_comf;
      } else if (a >= -cfg_.idm.b_comf) {
        v.hazard_onset_t = -1.0;
      }

      if (v.response && v.response->speed_branch && now_ >= v.response->activate_t &&
          now_ < v.response->end_t) {
        if (v.response->accel_cmd < 0.0) {
          a = std::min(a, v.response->accel_cmd);
        } else {
          // Accelerate as commanded but never into the leader.
          const double guard = idm_of(v, leader, cfg_.speed_cap);
          a = std::min(std::max(a, v.response->accel_cmd), std::max(guard, a));
        }
      }

      accel_[i] = std::clamp(a, -cfg_.idm.b_max, cfg_.idm.a_max);

      // Per-step logs, taken at the step start so all series stay aligned.
      v.speed_log.push_back(v.v);
      if (leader) {
        const double gap = gap_between(v, *leader);
        v.lead_exists_log.push_back(true);
        v.lead_gap_log.push_back(gap);
        v.lead_v_log.push_back(leader->v);
        const double closing = v.v - leader->v;
        if (gap < 0.0 || (closing > 0.0 && gap / closing < 5.0)) ++v.hazard_steps;
      } else {
        v.lead_exists_log.push_back(false);
        v.lead_gap_log.push_back(0.0);
        v.lead_v_log.push_back(0.0);
      }
    }
  }

  void integrate() {
    for (size_t i = 0; i < active_.size(); ++i) {
      SimVehicle& v = active_[i];
      v.a = accel_[i];
      v.v = std::clamp(v.v + v.a * cfg_.dt, 0.0, cfg_.speed_cap);
      v.x += v.v * cfg_.dt;
      if (v.lc_phase == SimVehicle::LcPhase::EXECUTE) {
        v.lc_progress += cfg_.dt / cfg_.lc.duration_s;
        const double y0 = lane_center(v.lc_source);
        const double y1 = lane_center(v.lc_target);
        if (v.lc_progress >= 1.0) {
          v.lane = v.lc_target;
          v.y = y1;
          v.lc_phase = SimVehicle::LcPhase::NONE;
          v.lc_target = -1;
          v.lc_progress = 0.0;
          v.completed_lc = true;
          v.lc_cooldown_until = now_ + cfg_.lc.cooldown_s;
        } else {
          v.y = y0 + (y1 - y0) * 0.5 * (1.0 - std::cos(M_PI * v.lc_progress));
        }
      } else {
        v.y = lane_center(v.lane);
      }
      if (v.response && now_ >= v.response->end_t) v.response.reset();
    }
  }

  void handle_exits() {
    for (auto it = active_.begin(); it != active_.end();) {
      if (it->x > cfg_.segment_length) {
        exits_.push_back({now_, it->id});
        finished_.push_back(summarize(*it, now_));
        ++exited_;
        it = active_.erase(it);
      } else {
        ++it;
      }
    }
  }

  void detect_overlaps() {
    rebuild_lane_index();
    std::set<std::pair<int64_t, int64_t>> overlapping_now;
    for (int lane = 0; lane < kLaneCount; ++lane) {
      const auto& members = lane_members_[lane];
      for (size_t k = 0; k + 1 < members.size(); ++k) {
        const SimVehicle& f = active_[members[k]];
        const SimVehicle& l = active_[members[k + 1]];
        const double overlap = front(f) - rear(l);
        if (overlap > cfg_.overlap_tolerance_m) {
          const auto key = std::minmax(f.id, l.id);
          overlapping_now.insert({key.first, key.second});
          if (!overlapping_.count({key.first, key.second})) {
            collisions_.push_back({now_, key.first, key.second, overlap});
          }
        }
      }
    }
    overlapping_ = std::move(overlapping_now);
  }

  VehicleSummary summarize(const SimVehicle& v, double exit_t) const {
    VehicleSummary s;
    s.id = v.id;
    s.equipped_draw = v.equipped_draw;
    s.equipped = v.equipped;
    s.attempted_lc = v.attempted_lc;
    s.completed_lc = v.completed_lc;
    s.first_attempt_t = v.first_attempt_t;
    s.spawn_t = v.spawn_t;
    s.exit_t = exit_t;
    s.hazard_steps = v.hazard_steps;
    s.warnings_received = v.warnings_received;
    if (v.speed_log.size() >= 3) {
      SpeedSeries speed{cfg_.dt, v.speed_log};
      LeaderSeries leader;
      leader.has_leader.assign(v.lead_exists_log.begin(), v.lead_exists_log.end());
      leader.gap = v.lead_gap_log;
      leader.leader_v = v.lead_v_log;
      s.behavior = behavior_metrics(v.id, speed, &leader);
    } else {
      s.behavior.vehicle_id = v.id;
    }
    return s;
  }

  SimResult finish() {
    SimResult res;
    res.spawned = spawned_;
    res.exited = exited_;
    res.remaining = static_cast<int>(active_.size());
    res.seed = cfg_.seed;
    res.throughput_count = throughput(exits_, cfg_.warmup_s, cfg_.total_duration_s());
    res.exits = std::move(exits_);
    res.warnings = std::move(warnings_);
    res.collisions = std::move(collisions_);
    res.vehicles = std::move(finished_);
    for (const auto& v : active_) res.vehicles.push_back(summarize(v, -1.0));
    std::sort(res.vehicles.begin(), res.vehicles.end(),
              [](const VehicleSummary& a, const VehicleSummary& b) { return a.id < b.id; });
    return res;
  }

  const SimConfig& cfg_;
  const ModelParams* model_;
  const ModelConfig* model_cfg_;
  RandomStream arrival_ramp_, arrival_main1_, arrival_main2_;
  RandomStream driver_rng_, response_rng_;
  double next_arrival_[kLaneCount] = {1e18, 1e18, 1e18};
  std::deque<PendingArrival> pending_;
  std::vector<SimVehicle> active_;
  std::vector<size_t> lane_members_[kLaneCount];
  std::vector<double> accel_;
  std::vector<VehicleSummary> finished_;
  std::vector<SimWarningLogEntry> warnings_;
  std::vector<SimCollisionLogEntry> collisions_;
  std::vector<ExitEvent> exits_;
  std::set<std::pair<int64_t, int64_t>> overlapping_;
  double now_ = 0.0;
  int64_t next_id_ = 1;
  int spawned_ = 0;
  int exited_ = 0;
};

}  // namespace

SimResult run_sim(const SimConfig& cfg, const ModelParams* model, const ModelConfig* model_cfg) {
  Simulation sim(cfg, model, model_cfg);
  return sim.run();
}

SweepTable sweep_penetration(const SimConfig& base, const std::vector<double>& rates,
                             const std::vector<WarningMethod>& methods,
                             const std::vector<uint64_t>& seeds) {
  if (rates.empty() || methods.empty() || seeds.empty()) {
    throw std::invalid_argument("sweep_penetration: empty sweep axis");
  }
  SweepTable table;
  table.rates = rates;
  table.methods = methods;
  table.seeds = seeds;
  for (double rate : rates) {
    for (WarningMethod method : methods) {
      SweepCell cell;
      cell.rate = rate;
      cell.method = method;
      std::vector<double> dracs, decels, jerks;
      for (uint64_t seed : seeds) {
        SimConfig cfg = base;
        cfg.penetration = rate;
        cfg.method = method;
        cfg.seed = seed;
        SimResult res;
        try {
          res = run_sim(cfg);
        } catch (const std::exception& e) {
          throw std::runtime_error("sweep cell failed (rate=" + std::to_string(rate) +
                                   ", method=" + method_name(method) +
                                   ", seed=" + std::to_string(seed) + "): " + e.what());
        }
        cell.per_seed_throughput.push_back(res.throughput_count);
        for (const auto& v : res.vehicles) {
          if (!v.attempted_lc) continue;
          ++cell.lc_vehicle_count;
          dracs.push_back(v.behavior.max_drac);
          decels.push_back(v.behavior.max_decel);
          jerks.push_back(v.behavior.max_jerk);
        }
      }
      double sum = 0.0;
      for (int tp : cell.per_seed_throughput) sum += tp;
      cell.mean_throughput = sum / static_cast<double>(cell.per_seed_throughput.size());
      cell.drac_p50 = quantile(dracs, 0.50);
      cell.drac_p90 = quantile(dracs, 0.90);
      cell.drac_p95 = quantile(dracs, 0.95);
      cell.decel_p50 = quantile(decels, 0.50);
      cell.decel_p90 = quantile(decels, 0.90);
      cell.decel_p95 = quantile(decels, 0.95);
      cell.jerk_p50 = quantile(jerks, 0.50);
      cell.jerk_p90 = quantile(jerks, 0.90);
      cell.jerk_p95 = quantile(jerks, 0.95);
      table.cells.push_back(std::move(cell));
    }
  }
  return table;
}

}  // namespace lcew
