#pragma once

#include <cmath>
#include <cstdint>

namespace ranloop {

inline constexpr double kPrbBandwidthHz = 180e3;
inline constexpr int kResourceElementsPerPrb = 12;
inline constexpr double kTtiSeconds = 1e-3;
inline constexpr double kThermalNoiseDbmPerHz = -174.0;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

struct Vec2 {
  double x{0.0};
  double y{0.0};
  bool operator==(const Vec2&) const = default;
};

inline double distance_m(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace ranloop
