#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>

#include "streetsim/rng.hpp"
#include "streetsim/types.hpp"

namespace streetsim {

// ---------------------------------------------------------------------------
// Weather

/// Night is a first-class condition, not only a derived one, so schedules can
/// request it explicitly; a daytime draw whose sun sits below the horizon is
/// still forced to night.
enum class Weather { Clear = 0, Rain = 1, Snow = 2, Dust = 3, Heatwave = 4, Night = 5 };

inline constexpr int kWeatherCount = 6;

const char* to_string(Weather w);

/// Parses a weather name; "fog" is accepted as an alias for dust (same
/// range-limiting behaviour). Throws std::invalid_argument on anything else.
Weather parse_weather(const std::string& name);

// ---------------------------------------------------------------------------
// Sun model

/// Solar elevation in degrees: 90 * sin(pi*(t-6)/12). Positive only for
/// t in (6, 18); continuous across the midnight wrap.
double sun_elevation_deg(double time_of_day);

/// Unit light direction (pointing from the sun toward the ground) for a time
/// of day in hours; the azimuth sweeps east to west over daylight hours.
Vec3 sun_direction(double time_of_day);

// ---------------------------------------------------------------------------
// Visibility proxy

inline constexpr double kUnlimitedVisibility = std::numeric_limits<double>::infinity();

/// Per-weather sensing range in meters; infinity = unlimited.
struct VisibilityConfig {
  std::array<double, kWeatherCount> limit_m{kUnlimitedVisibility, 300.0, 200.0,
                                            150.0, kUnlimitedVisibility, 250.0};
  bool culling = false;  // apply the limit to annotations (off by default)
};

double visibility_limit(Weather w, const VisibilityConfig& cfg);

// ---------------------------------------------------------------------------
// Sampling

struct EnvironmentState {
  double time_of_day = 12.0;  // hours in [0, 24)
  Weather weather = Weather::Clear;
  Vec3 sun_dir = Vec3(0.0, 0.0, -1.0);                // unit, world frame
  double visibility_limit_m = kUnlimitedVisibility;   // meters, or infinity
};

struct EnvironmentSchedule {
  enum class Mode { Fixed = 0, PerFrameRandom = 1, Cyclic = 2 };

  Mode mode = Mode::PerFrameRandom;
  std::array<double, kWeatherCount> weights{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  double time_lo = 0.0;   // sampled window, hours
  double time_hi = 24.0;
  double fixed_time = 12.0;          // fixed mode only
  Weather fixed_weather = Weather::Clear;
  uint64_t cursor = 0;               // cyclic mode position; advanced per draw
  VisibilityConfig visibility;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Draws the next environment. Weather is chosen first (by weights, by the
/// cyclic rotation, or fixed), then time of day is drawn uniformly from the
/// part of [time_lo, time_hi) matching that weather — night-time hours for
/// night, daylight hours otherwise — so weights translate directly into
/// condition frequencies. A draw whose sun still ends up below the horizon is
/// forced to night.
EnvironmentState next_environment(Rng& rng, EnvironmentSchedule& schedule);

}  // namespace streetsim
