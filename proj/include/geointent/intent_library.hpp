#pragma once

#include "geointent/env_model.hpp"
#include "geointent/rng.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace geointent {

struct MotionParams {
  double speed_min = 5.0;   // m/s
  double speed_max = 15.0;  // m/s
  double sample_rate = 10.0;  // Hz
  double epsilon = 2.0;       // waypoint-pass tolerance, m
  double delta_m = 0.05;

  void validate() const;
};

/// Critical region ordered set: region names in visiting order.
struct Cros {
  std::vector<std::string> regions;
  double delta_w = 0.0;

  friend bool operator==(const Cros&, const Cros&) = default;
};

struct Intent {
  std::string id;
  std::vector<Cros> cros_alternatives;
  MotionParams motion;
  /// When false every alternative must have the same length.
  bool variable_length = false;

  std::size_t index_set_size() const {
    return cros_alternatives.empty() ? 0 : cros_alternatives.front().regions.size();
  }
};

/// Named critical regions (the set DR, including the geofence under "G")
/// plus the intents defined over them.
struct IntentLibrary {
  std::map<std::string, Region> regions;
  std::vector<Intent> intents;

  const Intent& intent(const std::string& id) const;
  const Region& region(const std::string& name) const;
  bool has_intent(const std::string& id) const;
  std::vector<std::string> intent_ids() const;

  IntentLibrary scaled(double factor) const;
  /// Keeps only the listed intents, in the listed order.
  IntentLibrary subset(const std::vector<std::string>& ids) const;
};

namespace intents {
inline const std::string kDirectAttack = "direct_attack";
inline const std::string kSurveillance = "surveillance";
inline const std::string kCriminalHarmful = "criminal_harmful";
inline const std::string kHarmless = "harmless";
}  // namespace intents

/// The four-intent library over the bounded 2D environment. Region boxes
/// D1..D4 are implementation defaults; the geofence is registered as "G".
/// `harmless_legs` sets how many D1<->D2 legs a Harmless flight makes.
IntentLibrary builtin_library_2d(int harmless_legs = 3);
/// Same topology with altitude bands, over Environment::default_3d().
IntentLibrary builtin_library_3d(int harmless_legs = 3);

struct WaypointSequence {
  std::string intent;
  std::size_t cros_index = 0;
  std::vector<std::string> region_names;
  std::vector<Position> waypoints;
};

/// Picks a CROS alternative uniformly, then one waypoint uniformly inside
/// each of its regions. Throws std::invalid_argument if a region is not
/// inside the environment bounds.
WaypointSequence sample_waypoints(const IntentLibrary& lib, const Intent& intent,
                                  const Environment& env, Rng& rng);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_intent(const Intent& intent, const IntentLibrary& lib,
                                 const Environment& env);
ValidationReport validate_library(const IntentLibrary& lib, const Environment& env);

/// True iff each waypoint is approached closer than `epsilon` at sample
/// times that strictly increase with the waypoint index.
bool check_well_defined(const Trajectory& traj, const WaypointSequence& wps, double epsilon);

void to_json(nlohmann::json& j, const MotionParams& m);
void from_json(const nlohmann::json& j, MotionParams& m);
void to_json(nlohmann::json& j, const Intent& i);
void from_json(const nlohmann::json& j, Intent& i);
void to_json(nlohmann::json& j, const IntentLibrary& lib);
void from_json(const nlohmann::json& j, IntentLibrary& lib);

}  // namespace geointent
