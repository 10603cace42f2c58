#include "streetsim/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace streetsim {

namespace {

constexpr double kPi = 3.14159265358979323846;

// A sampling window is at most two disjoint segments of the configured range
// (night hours wrap around noon's complement: before 6:00 and after 18:00).
struct TimeWindow {
  double a_lo = 0.0, a_hi = 0.0;
  double b_lo = 0.0, b_hi = 0.0;

  double length() const { return (a_hi - a_lo) + (b_hi - b_lo); }

  double at(double f) const {  // f in [0, 1)
    const double s = f * length();
    const double len_a = a_hi - a_lo;
    return s < len_a ? a_lo + s : b_lo + (s - len_a);
  }
};

TimeWindow window_for(Weather w, double lo, double hi) {
  TimeWindow win;
  if (w == Weather::Night) {
    win.a_lo = lo;
    win.a_hi = std::min(hi, 6.0);
    win.b_lo = std::max(lo, 18.0);
    win.b_hi = hi;
  } else {
    win.a_lo = std::max(lo, 6.0);
    win.a_hi = std::min(hi, 18.0);
  }
  win.a_hi = std::max(win.a_hi, win.a_lo);
  win.b_hi = std::max(win.b_hi, win.b_lo);
  if (win.length() <= 0.0) win = TimeWindow{lo, hi, 0.0, 0.0};
  return win;
}

}  // namespace

const char* to_string(Weather w) {
  static const char* names[] = {"clear", "rain", "snow", "dust", "heatwave", "night"};
  return names[static_cast<int>(w)];
}

Weather parse_weather(const std::string& name) {
  for (int i = 0; i < kWeatherCount; ++i)
    if (name == to_string(static_cast<Weather>(i))) return static_cast<Weather>(i);
  if (name == "fog") return Weather::Dust;  // same range-limiting behaviour
  throw std::invalid_argument("unknown weather: " + name);
}

double sun_elevation_deg(double time_of_day) {
  return 90.0 * std::sin(kPi * (time_of_day - 6.0) / 12.0);
}

Vec3 sun_direction(double time_of_day) {
  const double e = sun_elevation_deg(time_of_day) * kPi / 180.0;
  const double a = kPi * (time_of_day - 6.0) / 12.0;
  // Light travels from the sun toward the ground; unit by construction.
  return {-std::cos(e) * std::cos(a), std::cos(e) * std::sin(a), -std::sin(e)};
}

double visibility_limit(Weather w, const VisibilityConfig& cfg) {
  return cfg.limit_m[static_cast<size_t>(w)];
}

void EnvironmentSchedule::validate() const {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("environment.weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("environment.weights must not all be zero");
  if (!(time_lo >= 0.0 && time_lo < time_hi && time_hi <= 24.0))
    throw std::invalid_argument("environment.time_range must satisfy 0 <= lo < hi <= 24");
  if (!(fixed_time >= 0.0 && fixed_time < 24.0))
    throw std::invalid_argument("environment.fixed_time must be in [0, 24)");
  for (double v : visibility.limit_m)
    if (!(v > 0.0)) throw std::invalid_argument("environment.visibility limits must be > 0");
}

EnvironmentState next_environment(Rng& rng, EnvironmentSchedule& schedule) {
  schedule.validate();

  Weather weather = schedule.fixed_weather;
  double t = schedule.fixed_time;
  switch (schedule.mode) {
    case EnvironmentSchedule::Mode::Fixed:
      break;
    case EnvironmentSchedule::Mode::PerFrameRandom: {
      double total = 0.0;
      for (double w : schedule.weights) total += w;
      double x = rng.uniform() * total;
      int wi = 0;
      for (; wi < kWeatherCount - 1; ++wi) {
        x -= schedule.weights[static_cast<size_t>(wi)];
        if (x < 0.0) break;
      }
      weather = static_cast<Weather>(wi);
      t = window_for(weather, schedule.time_lo, schedule.time_hi).at(rng.uniform());
      break;
    }
    case EnvironmentSchedule::Mode::Cyclic: {
      // Rotate through the weathers with non-zero weight; sweep the matching
      // time window in eight even steps per full rotation.
      int enabled[kWeatherCount];
      int n = 0;
      for (int i = 0; i < kWeatherCount; ++i)
        if (schedule.weights[static_cast<size_t>(i)] > 0.0) enabled[n++] = i;
      weather = static_cast<Weather>(enabled[schedule.cursor % static_cast<uint64_t>(n)]);
      const uint64_t sweep = schedule.cursor / static_cast<uint64_t>(n);
      t = window_for(weather, schedule.time_lo, schedule.time_hi)
              .at((static_cast<double>(sweep % 8) + 0.5) / 8.0);
      ++schedule.cursor;
      break;
    }
  }

  if (sun_elevation_deg(t) <= 0.0) weather = Weather::Night;

  EnvironmentState env;
  env.time_of_day = t;
  env.weather = weather;
  env.sun_dir = sun_direction(t);
  env.visibility_limit_m = visibility_limit(weather, schedule.visibility);
  return env;
}

}  // namespace streetsim
