#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "lcew/trajdata.hpp"

namespace lcew {

LaneGeometry LaneGeometry::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("lane geometry file not found: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

LaneGeometry LaneGeometry::parse_string(const std::string& text) {
  LaneGeometry geo;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    if (word != "lane") {
      throw SchemaError("lane geometry line " + std::to_string(lineno) +
                        ": expected 'lane', got '" + word + "'");
    }
    Lane lane;
    std::string kw;
    if (!(ls >> lane.index >> kw) || kw != "width" || !(ls >> lane.width)) {
      throw SchemaError("lane geometry line " + std::to_string(lineno) +
                        ": expected 'lane <idx> width <w> center ...'");
    }
    if (!(ls >> kw) || kw != "center") {
      throw SchemaError("lane geometry line " + std::to_string(lineno) +
                        ": missing 'center' polyline");
    }
    std::string pt;
    while (ls >> pt) {
      const auto comma = pt.find(',');
      if (comma == std::string::npos) {
        throw SchemaError("lane geometry line " + std::to_string(lineno) +
                          ": bad point '" + pt + "'");
      }
      Vec2 p{std::stod(pt.substr(0, comma)), std::stod(pt.substr(comma + 1))};
      if (!lane.center.empty() && p.x <= lane.center.back().x) {
        throw SchemaError("lane geometry line " + std::to_string(lineno) +
                          ": center x must be strictly increasing");
      }
      lane.center.push_back(p);
    }
    if (lane.center.size() < 2) {
      throw SchemaError("lane geometry line " + std::to_string(lineno) +
                        ": polyline needs at least 2 points");
    }
    if (lane.width <= 0.0) {
      throw SchemaError("lane geometry line " + std::to_string(lineno) +
                        ": nonpositive width");
    }
    geo.lanes.push_back(std::move(lane));
  }
  if (geo.lanes.empty()) throw SchemaError("lane geometry: no lanes defined");
  return geo;
}

const LaneGeometry::Lane* LaneGeometry::lane(int index) const {
  for (const auto& l : lanes)
    if (l.index == index) return &l;
  return nullptr;
}

double LaneGeometry::center_y(int lane_index, double x) const {
  const Lane* l = lane(lane_index);
  if (!l) throw std::invalid_argument("unknown lane index " + std::to_string(lane_index));
  const auto& c = l->center;
  if (x <= c.front().x) return c.front().y;
  if (x >= c.back().x) return c.back().y;
  for (size_t i = 1; i < c.size(); ++i) {
    if (x <= c[i].x) {
      const double f = (x - c[i - 1].x) / (c[i].x - c[i - 1].x);
      return c[i - 1].y + f * (c[i].y - c[i - 1].y);
    }
  }
  return c.back().y;
}

int LaneGeometry::lane_index_at(double x, double y) const {
  int best = lanes.front().index;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& l : lanes) {
    const double d = std::abs(y - center_y(l.index, x));
    if (d < best_d) {
      best_d = d;
      best = l.index;
    }
  }
  return best;
}

double LaneGeometry::marker_y(int lane_a, int lane_b, double x) const {
  return 0.5 * (center_y(lane_a, x) + center_y(lane_b, x));
}

std::vector<int> LaneGeometry::lanes_by_lateral_order(double x) const {
  std::vector<int> idx;
  idx.reserve(lanes.size());
  for (const auto& l : lanes) idx.push_back(l.index);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return center_y(a, x) < center_y(b, x);
  });
  return idx;
}

}  // namespace lcew
