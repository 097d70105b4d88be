#include <algorithm>
#include <cmath>
#include <limits>

#include "lcew/oracles.hpp"

namespace lcew::oracles {

namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Clips polygon poly against the half-plane left of edge (e0, e1).
std::vector<Vec2> clip_against_edge(const std::vector<Vec2>& poly, const Vec2& e0,
                                    const Vec2& e1) {
  std::vector<Vec2> out;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& cur = poly[i];
    const Vec2& nxt = poly[(i + 1) % n];
    const double dc = cross(e0, e1, cur);
    const double dn = cross(e0, e1, nxt);
    if (dc >= 0.0) out.push_back(cur);
    if ((dc > 0.0 && dn < 0.0) || (dc < 0.0 && dn > 0.0)) {
      const double t = dc / (dc - dn);
      out.push_back({cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)});
    }
  }
  return out;
}

double polygon_area(const std::vector<Vec2>& poly) {
  double acc = 0.0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    acc += a.x * b.y - b.x * a.y;
  }
  return 0.5 * std::abs(acc);
}

// Counter-clockwise corner order regardless of the box heading.
std::vector<Vec2> ccw_corners(const OBB& box) {
  const auto corners = box.corners();
  std::vector<Vec2> pts(corners.begin(), corners.end());
  double signed_area = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) {
    const Vec2& a = pts[i];
    const Vec2& b = pts[(i + 1) % pts.size()];
    signed_area += a.x * b.y - b.x * a.y;
  }
  if (signed_area < 0.0) std::reverse(pts.begin(), pts.end());
  return pts;
}

}  // namespace

double convex_intersection_area(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  std::vector<Vec2> poly = a;
  for (size_t i = 0; i < b.size() && !poly.empty(); ++i) {
    poly = clip_against_edge(poly, b[i], b[(i + 1) % b.size()]);
  }
  if (poly.size() < 3) return 0.0;
  return polygon_area(poly);
}

bool obb_overlap_exact(const OBB& a, const OBB& b) {
  return convex_intersection_area(ccw_corners(a), ccw_corners(b)) > 1e-15;
}

double min_axis_overlap_abs(const OBB& a, const OBB& b, double lane_heading) {
  const double da = std::abs(wrap_angle(a.heading - lane_heading));
  const double db = std::abs(wrap_angle(b.heading - lane_heading));
  const double cut = da >= db ? a.heading : b.heading;
  const Vec2 axes[4] = {{std::cos(lane_heading), std::sin(lane_heading)},
                        {-std::sin(lane_heading), std::cos(lane_heading)},
                        {std::cos(cut), std::sin(cut)},
                        {-std::sin(cut), std::cos(cut)}};
  double best = std::numeric_limits<double>::infinity();
  for (const Vec2& axis : axes) {
    auto project = [&axis](const OBB& box) {
      const auto pts = box.corners();
      double lo = pts[0].dot(axis), hi = lo;
      for (int i = 1; i < 4; ++i) {
        const double p = pts[i].dot(axis);
        lo = std::min(lo, p);
        hi = std::max(hi, p);
      }
      return std::pair<double, double>{lo, hi};
    };
    const auto [alo, ahi] = project(a);
    const auto [blo, bhi] = project(b);
    const double depth = std::min(ahi, bhi) - std::max(alo, blo);
    best = std::min(best, std::abs(depth));
  }
  return best;
}

double gaussian_mi_analytic(double rho) { return -0.5 * std::log(1.0 - rho * rho); }

double finite_difference(const std::function<double()>& eval, double* param, double h) {
  const double saved = *param;
  *param = saved + h;
  const double up = eval();
  *param = saved - h;
  const double down = eval();
  *param = saved;
  return (up - down) / (2.0 * h);
}

std::vector<double> symmetric_eigenvalues(const Mat& m) {
  const int n = m.rows();
  Mat a = m;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
    if (off < 1e-24) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a.at(p, q)) < 1e-18) continue;
        const double theta = 0.5 * std::atan2(2.0 * a.at(p, q), a.at(q, q) - a.at(p, p));
        const double c = std::cos(theta), s = std::sin(theta);
        for (int k = 0; k < n; ++k) {
          const double akp = a.at(k, p), akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a.at(p, k), aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = a.at(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

LoopMetrics loop_metrics(const Tensor3& pred, const Tensor3& truth) {
  const int f_steps = pred.d0();
  const int n = pred.d2();
  double ade = 0.0, fde = 0.0, sx = 0.0, sy = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int f = 0; f < f_steps; ++f) {
      const double ex = pred.at(f, 0, i) - truth.at(f, 0, i);
      const double ey = pred.at(f, 1, i) - truth.at(f, 1, i);
      ade += std::sqrt(ex * ex + ey * ey);
      sx += ex * ex;
      sy += ey * ey;
    }
    const double ex = pred.at(f_steps - 1, 0, i) - truth.at(f_steps - 1, 0, i);
    const double ey = pred.at(f_steps - 1, 1, i) - truth.at(f_steps - 1, 1, i);
    fde += std::sqrt(ex * ex + ey * ey);
  }
  LoopMetrics out;
  out.ade = ade / (f_steps * n);
  out.fde = fde / n;
  out.rmse_x = std::sqrt(sx / (f_steps * n));
  out.rmse_y = std::sqrt(sy / (f_steps * n));
  return out;
}

}  // namespace lcew::oracles
