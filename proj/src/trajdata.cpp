#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "lcew/trajdata.hpp"

namespace lcew {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& col, int lineno) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(lineno) + ": bad value '" + s +
                    "' in column " + col);
  }
}

int64_t parse_int(const std::string& s, const std::string& col, int lineno) {
  try {
    size_t pos = 0;
    const int64_t v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(lineno) + ": bad value '" + s +
                    "' in column " + col);
  }
}

}  // namespace

bool VehicleTrack::covers(double t0, double t1) const {
  return start_time() <= t0 + 1e-9 && end_time() >= t1 - 1e-9;
}

std::optional<int> VehicleTrack::index_at(double t) const {
  if (points.empty()) return std::nullopt;
  const double k = std::round((t - points.front().t) / kSampleDt);
  const int ki = static_cast<int>(k);
  if (ki < 0 || ki >= static_cast<int>(points.size())) return std::nullopt;
  if (std::abs(points.front().t + ki * kSampleDt - t) > 1e-6) return std::nullopt;
  return ki;
}

std::optional<TrajectoryPoint> VehicleTrack::state_at(double t) const {
  const auto idx = index_at(t);
  if (!idx) return std::nullopt;
  return points[*idx];
}

std::vector<VehicleTrack> parse_trajectory_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("trajectory file not found: " + path);
  return parse_trajectory_stream(in, path);
}

std::vector<VehicleTrack> parse_trajectory_stream(std::istream& in,
                                                  const std::string& name) {
  std::string header;
  if (!std::getline(in, header)) throw SchemaError(name + ": empty file, missing header");
  const auto cols = split_csv(header);
  std::map<std::string, int> col_idx;
  for (size_t i = 0; i < cols.size(); ++i) col_idx[cols[i]] = static_cast<int>(i);

  const char* required[] = {"track_id", "frame_id", "timestamp_ms",
                            "agent_type", "x", "y", "length", "width"};
  for (const char* c : required) {
    if (!col_idx.count(c)) throw SchemaError(name + ": missing required column '" + std::string(c) + "'");
  }
  const bool has_velocity = col_idx.count("vx") && col_idx.count("vy");

  auto field = [&](const std::vector<std::string>& row, const char* col,
                   int lineno) -> const std::string& {
    const int idx = col_idx.at(col);
    if (idx >= static_cast<int>(row.size())) {
      throw DataError(name + " line " + std::to_string(lineno) +
                      ": too few fields");
    }
    return row[idx];
  };

  std::map<int64_t, VehicleTrack> by_id;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto row = split_csv(line);
    const int64_t id = parse_int(field(row, "track_id", lineno), "track_id", lineno);
    auto& track = by_id[id];
    if (track.points.empty()) {
      track.id = id;
      track.agent_type = field(row, "agent_type", lineno);
      track.length = parse_double(field(row, "length", lineno), "length", lineno);
      track.width = parse_double(field(row, "width", lineno), "width", lineno);
    }
    TrajectoryPoint p;
    p.t = static_cast<double>(parse_int(field(row, "timestamp_ms", lineno), "timestamp_ms", lineno)) / 1000.0;
    p.x = parse_double(field(row, "x", lineno), "x", lineno);
    p.y = parse_double(field(row, "y", lineno), "y", lineno);
    if (has_velocity) {
      p.vx = parse_double(field(row, "vx", lineno), "vx", lineno);
      p.vy = parse_double(field(row, "vy", lineno), "vy", lineno);
    }
    track.points.push_back(p);
  }

  std::vector<VehicleTrack> tracks;
  tracks.reserve(by_id.size());
  for (auto& [id, track] : by_id) {
    auto& pts = track.points;
    std::sort(pts.begin(), pts.end(),
              [](const TrajectoryPoint& a, const TrajectoryPoint& b) { return a.t < b.t; });
    for (size_t i = 1; i < pts.size(); ++i) {
      if (pts[i].t <= pts[i - 1].t) {
        throw DataError(name + ": non-monotone timestamps in track " + std::to_string(id));
      }
      if (std::abs(pts[i].t - pts[i - 1].t - kSampleDt) > 1e-6) {
        throw DataError(name + ": track " + std::to_string(id) +
                        " breaks the constant 0.1 s sampling interval");
      }
    }
    if (pts.size() < 2) {
      throw DataError(name + ": track " + std::to_string(id) + " has fewer than 2 points");
    }
    if (track.length < 1.0 || track.width < 0.5) {
      throw DataError(name + ": track " + std::to_string(id) + " has implausible dimensions");
    }
    if (!has_velocity) {
      const int n = static_cast<int>(pts.size());
      std::vector<double> vx(n), vy(n);
      for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - 1);
        const int hi = std::min(n - 1, i + 1);
        const double dt = pts[hi].t - pts[lo].t;
        vx[i] = (pts[hi].x - pts[lo].x) / dt;
        vy[i] = (pts[hi].y - pts[lo].y) / dt;
      }
      for (int i = 0; i < n; ++i) {
        pts[i].vx = vx[i];
        pts[i].vy = vy[i];
      }
    }
    tracks.push_back(std::move(track));
  }
  return tracks;
}

std::vector<LCEvent> extract_lc_events(const std::vector<VehicleTrack>& tracks,
                                       const LaneGeometry& lanes,
                                       ExtractDiagnostics* diag,
                                       const LcExtractParams& params) {
  ExtractDiagnostics local;
  ExtractDiagnostics& d = diag ? *diag : local;
  std::vector<LCEvent> events;

  for (const auto& track : tracks) {
    const auto& pts = track.points;
    const int n = static_cast<int>(pts.size());
    if (n < 2) continue;
    std::vector<int> lane_of(n);
    for (int i = 0; i < n; ++i) lane_of[i] = lanes.lane_index_at(pts[i].x, pts[i].y);

    double last_event_end = -std::numeric_limits<double>::infinity();
    for (int k = 0; k + 1 < n; ++k) {
      if (lane_of[k + 1] == lane_of[k]) continue;
      ++d.crossings_seen;
      const int source = lane_of[k];
      const int target = lane_of[k + 1];

      // Interpolated marker-crossing time between samples k and k+1.
      const double m0 = lanes.marker_y(source, target, pts[k].x);
      const double m1 = lanes.marker_y(source, target, pts[k + 1].x);
      const double s0 = pts[k].y - m0;
      const double s1 = pts[k + 1].y - m1;
      double frac = 0.5;
      if (s0 != s1) frac = std::clamp(s0 / (s0 - s1), 0.0, 1.0);
      const double cross_t = pts[k].t + frac * kSampleDt;

      if (pts[k].t <= last_event_end) {
        ++d.overlapped;
        continue;
      }

      // Onset: the contiguous run of lateral motion toward the target lane
      // that leads into the crossing must last at least onset_sustain_s.
      const double toward =
          lanes.center_y(target, pts[k].x) > lanes.center_y(source, pts[k].x) ? 1.0 : -1.0;
      int a = k;
      while (a >= 0 && toward * pts[a].vy >= params.onset_lateral_speed) --a;
      ++a;  // first sample of the run
      if (a > k || toward * pts[k].vy < params.onset_lateral_speed) {
        ++d.unsustained;
        continue;
      }
      if (cross_t - pts[a].t < params.onset_sustain_s) {
        ++d.unsustained;
        continue;
      }
      if (a == 0) {
        ++d.truncated;  // indication may predate the recording
        continue;
      }

      // Settling: first sustained residence within settle_offset of the
      // target-lane center.
      const int sustain_steps = static_cast<int>(std::round(params.settle_sustain_s / kSampleDt));
      int settle_start = -1;
      int run = 0;
      for (int i = k + 1; i < n; ++i) {
        const double off = std::abs(pts[i].y - lanes.center_y(target, pts[i].x));
        if (off < params.settle_offset) {
          if (run == 0) settle_start = i;
          ++run;
          if (run > sustain_steps) break;
        } else {
          run = 0;
          settle_start = -1;
        }
      }
      if (settle_start < 0 || run <= sustain_steps) {
        ++d.truncated;  // never settles inside the recording
        continue;
      }

      LCEvent ev;
      ev.ego_id = track.id;
      ev.start_t = pts[a].t;
      ev.cross_t = cross_t;
      ev.end_t = pts[settle_start].t + params.settle_sustain_s;
      ev.source_lane = source;
      ev.target_lane = target;
      events.push_back(ev);
      last_event_end = ev.end_t;
    }
  }
  return events;
}

std::vector<int64_t> build_roi(const std::vector<VehicleTrack>& tracks,
                               const LaneGeometry& lanes, int64_t ego_id,
                               double t, int target_lane, const RoiParams& params) {
  const VehicleTrack* ego = nullptr;
  for (const auto& tr : tracks)
    if (tr.id == ego_id) ego = &tr;
  if (!ego) throw std::invalid_argument("build_roi: unknown ego id");
  const auto ego_state = ego->state_at(t);
  if (!ego_state) throw std::invalid_argument("build_roi: ego not present at t");

  const double ego_speed = std::max(0.0, ego_state->vx);
  const int ego_lane = lanes.lane_index_at(ego_state->x, ego_state->y);
  const double ego_front = ego_state->x + 0.5 * ego->length;

  std::vector<int64_t> ids;
  ids.push_back(ego_id);
  for (const auto& tr : tracks) {
    if (tr.id == ego_id) continue;
    const auto st = tr.state_at(t);
    if (!st) continue;
    const int lane = lanes.lane_index_at(st->x, st->y);
    if (lane != ego_lane && lane != target_lane) continue;
    if (st->x >= ego_state->x) {
      const double front_gap = (st->x - 0.5 * tr.length) - ego_front;
      if (ego_speed <= 1e-9) {
        if (front_gap <= params.stopped_lookahead_m) ids.push_back(tr.id);
      } else if (front_gap / ego_speed <= params.thw_limit_s) {
        ids.push_back(tr.id);
      }
    } else {
      if (ego_state->x - st->x <= params.rear_range_m) ids.push_back(tr.id);
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<Scene> make_scene_windows(const LCEvent& event,
                                      const std::vector<VehicleTrack>& tracks,
                                      const LaneGeometry& lanes, int history_steps,
                                      int future_steps, int stride,
                                      const RoiParams& params) {
  if (history_steps < 5) throw std::invalid_argument("make_scene_windows: T must be >= 5");
  if (future_steps < 1) throw std::invalid_argument("make_scene_windows: F must be >= 1");
  if (stride < 1) throw std::invalid_argument("make_scene_windows: stride must be >= 1");

  const VehicleTrack* ego = nullptr;
  for (const auto& tr : tracks)
    if (tr.id == event.ego_id) ego = &tr;
  if (!ego) throw std::invalid_argument("make_scene_windows: ego track missing");

  // Ego samples inside the event span.
  int i0 = -1, i1 = -1;
  for (int i = 0; i < static_cast<int>(ego->points.size()); ++i) {
    const double t = ego->points[i].t;
    if (i0 < 0 && t >= event.start_t - 1e-9) i0 = i;
    if (t <= event.end_t + 1e-9) i1 = i;
  }
  if (i0 < 0 || i1 < i0) return {};
  const int steps = i1 - i0 + 1;

  std::vector<Scene> scenes;
  for (int last = history_steps - 1; last + future_steps <= steps - 1; last += stride) {
    const double t_last = ego->points[i0 + last].t;
    const double t_first = t_last - (history_steps - 1) * kSampleDt;
    const double t_end = t_last + future_steps * kSampleDt;

    const auto roi = build_roi(tracks, lanes, event.ego_id, t_last, event.target_lane, params);

    std::vector<const VehicleTrack*> members;
    for (int64_t id : roi) {
      for (const auto& tr : tracks) {
        if (tr.id == id && tr.covers(t_first, t_end) && tr.index_at(t_first)) {
          members.push_back(&tr);
          break;
        }
      }
    }
    if (static_cast<int>(members.size()) < 2) continue;

    Scene scene;
    scene.t0 = t_first;
    scene.history = Tensor3(history_steps, 2, static_cast<int>(members.size()));
    scene.future = Tensor3(future_steps, 2, static_cast<int>(members.size()));
    for (int n = 0; n < static_cast<int>(members.size()); ++n) {
      const auto& tr = *members[n];
      scene.vehicle_ids.push_back(tr.id);
      scene.dims.push_back({tr.length, tr.width});
      if (tr.id == event.ego_id) scene.ego_index = n;
      const int base = *tr.index_at(t_first);
      for (int s = 0; s < history_steps + future_steps; ++s) {
        const auto& p = tr.points[base + s];
        if (s < history_steps) {
          scene.history.at(s, 0, n) = p.x;
          scene.history.at(s, 1, n) = p.y;
        } else {
          scene.future.at(s - history_steps, 0, n) = p.x;
          scene.future.at(s - history_steps, 1, n) = p.y;
        }
      }
    }
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

}  // namespace lcew
