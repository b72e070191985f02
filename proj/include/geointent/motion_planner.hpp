#pragma once

#include "geointent/env_model.hpp"
#include "geointent/intent_library.hpp"
#include "geointent/rng.hpp"

#include <json.hpp>

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace geointent {

struct PlannerParams {
  double step_size = 3.0;       // m
  double rewire_radius = 8.0;   // m
  double goal_bias = 0.1;
  int max_iterations = 5000;
  double goal_tolerance = 1.0;  // m
  /// Iterations spent improving the tree after the goal is first reached.
  /// Negative means "keep refining until max_iterations".
  int refine_iterations = 1500;

  void validate() const;
};

struct Path {
  std::vector<Position> vertices;
  double total_length = 0.0;

  static Path from_vertices(std::vector<Position> vertices);
  std::size_t size() const { return vertices.size(); }
};

/// Raised when the tree never reaches the goal.
class PlanningFailure : public std::runtime_error {
 public:
  PlanningFailure(const std::string& what, int iterations, int leg = -1)
      : std::runtime_error(what), iterations_(iterations), leg_(leg) {}
  int iterations() const { return iterations_; }
  /// Zero-based leg index when raised from chain_waypoints, -1 otherwise.
  int leg() const { return leg_; }

 private:
  int iterations_;
  int leg_;
};

/// RRT* with goal biasing and rewiring inside a fixed radius. Throws
/// std::invalid_argument when start/goal are outside the bounds or inside an
/// obstacle, PlanningFailure when no path is found.
Path plan_path(const Position& start, const Position& goal, const Environment& env,
               const PlannerParams& params, Rng& rng);

/// Concatenates plan_path legs between consecutive waypoints. A failure on
/// leg n is rethrown with leg() == n.
Path chain_waypoints(const WaypointSequence& wps, const Environment& env,
                     const PlannerParams& params, Rng& rng);

struct TimedPositions {
  double dt = 0.1;
  std::vector<double> t;
  std::vector<Position> positions;
  /// Arc-length coordinate of each sample along the source polyline.
  std::vector<double> arc_length;

  std::size_t size() const { return positions.size(); }
};

/// Constant-speed arc-length sampling at uniform dt. The last sample is the
/// path end; a path shorter than `min_samples` samples is padded with its end.
TimedPositions time_parameterize(const Path& path, double speed, double sample_rate,
                                 std::size_t min_samples = 1);

/// Point at arc length s along the polyline (clamped to [0, total_length]).
Position point_at_arc_length(const Path& path, double s);

void write_path_csv(std::ostream& os, const Path& path);

void to_json(nlohmann::json& j, const PlannerParams& p);
void from_json(const nlohmann::json& j, PlannerParams& p);

}  // namespace geointent
