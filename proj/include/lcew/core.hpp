#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace lcew {

// Trajectory recordings and the simulator both run at 10 Hz.
inline constexpr double kSampleDt = 0.1;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
};

// Normalizes an angle into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  if (a > M_PI) a -= 2.0 * M_PI;
  return a;
}

// Input file does not follow the documented column layout.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input file parses but the contents violate a data invariant.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace lcew
