#include "geointent/motion_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace geointent {

void PlannerParams::validate() const {
  if (!(step_size > 0.0)) throw std::invalid_argument("planner: step_size must be > 0");
  if (!(rewire_radius > 0.0)) throw std::invalid_argument("planner: rewire_radius must be > 0");
  if (!(goal_bias >= 0.0 && goal_bias <= 1.0)) {
    throw std::invalid_argument("planner: goal_bias must be in [0,1]");
  }
  if (max_iterations < 1) throw std::invalid_argument("planner: max_iterations must be >= 1");
  if (!(goal_tolerance > 0.0)) throw std::invalid_argument("planner: goal_tolerance must be > 0");
}

Path Path::from_vertices(std::vector<Position> vertices) {
  Path p;
  p.vertices = std::move(vertices);
  for (std::size_t i = 1; i < p.vertices.size(); ++i) {
    p.total_length += (p.vertices[i] - p.vertices[i - 1]).norm();
  }
  return p;
}

namespace {

class Tree {
 public:
  Tree(int dim, std::size_t reserve) : dim_(dim) {
    coords_.reserve(reserve * dim);
    parent_.reserve(reserve);
    cost_.reserve(reserve);
    children_.reserve(reserve);
  }

  int add(const Position& p, int parent, double cost) {
    coords_.insert(coords_.end(), p.data(), p.data() + dim_);
    parent_.push_back(parent);
    cost_.push_back(cost);
    children_.emplace_back();
    if (parent >= 0) children_[parent].push_back(size() - 1);
    return size() - 1;
  }

  int size() const { return static_cast<int>(parent_.size()); }
  Eigen::Map<const Eigen::VectorXd> at(int i) const { return {coords_.data() + i * dim_, dim_}; }

  double dist2(int i, const Position& p) const {
    double s = 0.0;
    const double* c = coords_.data() + i * dim_;
    for (int d = 0; d < dim_; ++d) {
      const double e = c[d] - p[d];
      s += e * e;
    }
    return s;
  }

  int nearest(const Position& p) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < size(); ++i) {
      const double d = dist2(i, p);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  }

  std::vector<int> near(const Position& p, double radius) const {
    std::vector<int> out;
    const double r2 = radius * radius;
    for (int i = 0; i < size(); ++i) {
      if (dist2(i, p) <= r2) out.push_back(i);
    }
    return out;
  }

  void reparent(int node, int new_parent, double new_cost) {
    auto& siblings = children_[parent_[node]];
    siblings.erase(std::find(siblings.begin(), siblings.end(), node));
    parent_[node] = new_parent;
    children_[new_parent].push_back(node);
    const double delta = new_cost - cost_[node];
    std::vector<int> stack{node};
    while (!stack.empty()) {
      const int n = stack.back();
      stack.pop_back();
      cost_[n] += delta;
      for (int c : children_[n]) stack.push_back(c);
    }
  }

  int parent(int i) const { return parent_[i]; }
  double cost(int i) const { return cost_[i]; }

 private:
  int dim_;
  std::vector<double> coords_;
  std::vector<int> parent_;
  std::vector<double> cost_;
  std::vector<std::vector<int>> children_;
};

void check_free(const Position& p, const Environment& env, const char* what) {
  if (p.size() != env.dim) {
    throw std::invalid_argument(std::string(what) + " dimensionality does not match environment");
  }
  if (!contains(env.bounds, p)) throw std::invalid_argument(std::string(what) + " is outside bounds");
  if (env.in_obstacle(p)) throw std::invalid_argument(std::string(what) + " is inside an obstacle");
}

}  // namespace

Path plan_path(const Position& start, const Position& goal, const Environment& env,
               const PlannerParams& params, Rng& rng) {
  params.validate();
  check_free(start, env, "start");
  check_free(goal, env, "goal");

  if (start == goal) return Path::from_vertices({start});

  const int dim = env.dim;
  Tree tree(dim, static_cast<std::size_t>(params.max_iterations) + 1);
  tree.add(start, -1, 0.0);

  std::vector<int> goal_nodes;
  if ((start - goal).norm() <= params.goal_tolerance) goal_nodes.push_back(0);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int first_solution_iter = goal_nodes.empty() ? -1 : 0;
  int iter = 0;
  Position sample(dim);
  for (; iter < params.max_iterations; ++iter) {
    if (first_solution_iter >= 0 && params.refine_iterations >= 0 &&
        iter - first_solution_iter >= params.refine_iterations) {
      break;
    }
    if (unit(rng) < params.goal_bias) {
      sample = goal;
    } else {
      for (int d = 0; d < dim; ++d) sample[d] = uniform(rng, env.bounds.lo()[d], env.bounds.hi()[d]);
    }

    const int nearest = tree.nearest(sample);
    const Position from = tree.at(nearest);
    const Position delta = sample - from;
    const double len = delta.norm();
    if (len == 0.0) continue;
    const Position node = len <= params.step_size ? sample : Position(from + delta * (params.step_size / len));
    if (env.in_obstacle(node) || segment_collides(from, node, env)) continue;

    // Choose the cheapest collision-free parent among the neighbours.
    std::vector<int> neighbours = tree.near(node, params.rewire_radius);
    int best_parent = nearest;
    double best_cost = tree.cost(nearest) + (node - from).norm();
    for (int n : neighbours) {
      if (n == nearest) continue;
      const Position np = tree.at(n);
      const double c = tree.cost(n) + (node - np).norm();
      if (c < best_cost && !segment_collides(np, node, env)) {
        best_cost = c;
        best_parent = n;
      }
    }
    const int id = tree.add(node, best_parent, best_cost);

    for (int n : neighbours) {
      if (n == best_parent) continue;
      const Position np = tree.at(n);
      const double c = best_cost + (np - node).norm();
      if (c < tree.cost(n) && !segment_collides(node, np, env)) tree.reparent(n, id, c);
    }

    if ((node - goal).norm() <= params.goal_tolerance) {
      goal_nodes.push_back(id);
      if (first_solution_iter < 0) first_solution_iter = iter;
    }
  }

  if (goal_nodes.empty()) {
    throw PlanningFailure("no path found after " + std::to_string(iter) + " iterations", iter);
  }

  int best = goal_nodes.front();
  double best_total = std::numeric_limits<double>::infinity();
  for (int g : goal_nodes) {
    const double total = tree.cost(g) + (Position(tree.at(g)) - goal).norm();
    if (total < best_total) {
      best_total = total;
      best = g;
    }
  }

  std::vector<Position> verts;
  for (int n = best; n >= 0; n = tree.parent(n)) verts.emplace_back(tree.at(n));
  std::reverse(verts.begin(), verts.end());
  if (verts.back() != goal && !segment_collides(verts.back(), goal, env)) verts.push_back(goal);
  return Path::from_vertices(std::move(verts));
}

Path chain_waypoints(const WaypointSequence& wps, const Environment& env,
                     const PlannerParams& params, Rng& rng) {
  if (wps.waypoints.empty()) throw std::invalid_argument("chain_waypoints: no waypoints");
  if (wps.waypoints.size() == 1) return plan_path(wps.waypoints[0], wps.waypoints[0], env, params, rng);

  std::vector<Position> verts;
  for (std::size_t leg = 0; leg + 1 < wps.waypoints.size(); ++leg) {
    Path p;
    try {
      p = plan_path(wps.waypoints[leg], wps.waypoints[leg + 1], env, params, rng);
    } catch (const PlanningFailure& e) {
      throw PlanningFailure("leg " + std::to_string(leg) + ": " + e.what(), e.iterations(),
                            static_cast<int>(leg));
    }
    const std::size_t skip = verts.empty() ? 0 : 1;
    verts.insert(verts.end(), p.vertices.begin() + static_cast<std::ptrdiff_t>(skip), p.vertices.end());
  }
  return Path::from_vertices(std::move(verts));
}

Position point_at_arc_length(const Path& path, double s) {
  if (path.vertices.empty()) throw std::invalid_argument("point_at_arc_length: empty path");
  if (s <= 0.0) return path.vertices.front();
  double acc = 0.0;
  for (std::size_t i = 1; i < path.vertices.size(); ++i) {
    const double seg = (path.vertices[i] - path.vertices[i - 1]).norm();
    if (seg > 0.0 && acc + seg >= s) {
      const double u = (s - acc) / seg;
      return path.vertices[i - 1] + u * (path.vertices[i] - path.vertices[i - 1]);
    }
    acc += seg;
  }
  return path.vertices.back();
}

TimedPositions time_parameterize(const Path& path, double speed, double sample_rate,
                                 std::size_t min_samples) {
  if (path.vertices.empty()) throw std::invalid_argument("time_parameterize: empty path");
  if (!(speed > 0.0)) throw std::invalid_argument("time_parameterize: speed must be > 0");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("time_parameterize: sample_rate must be > 0");

  TimedPositions out;
  out.dt = 1.0 / sample_rate;
  const double spacing = speed * out.dt;
  const double length = path.total_length;
  // Guard against a spurious extra step from floating-point round-off.
  const auto steps = static_cast<std::size_t>(std::ceil(length / spacing - 1e-9));

  // Walk the polyline once, advancing the segment cursor monotonically.
  std::size_t seg = 1;
  double seg_start = 0.0;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double s = i == steps ? length : std::min(static_cast<double>(i) * spacing, length);
    Position p;
    if (path.vertices.size() == 1 || length == 0.0) {
      p = path.vertices.front();
    } else if (i == steps) {
      p = path.vertices.back();
    } else {
      while (seg < path.vertices.size()) {
        const double len = (path.vertices[seg] - path.vertices[seg - 1]).norm();
        if (seg_start + len >= s && len > 0.0) {
          const double u = (s - seg_start) / len;
          p = path.vertices[seg - 1] + u * (path.vertices[seg] - path.vertices[seg - 1]);
          break;
        }
        seg_start += len;
        ++seg;
      }
      if (seg >= path.vertices.size()) p = path.vertices.back();
    }
    out.t.push_back(static_cast<double>(i) * out.dt);
    out.positions.push_back(std::move(p));
    out.arc_length.push_back(s);
  }
  while (out.positions.size() < min_samples) {
    out.t.push_back(static_cast<double>(out.t.size()) * out.dt);
    out.positions.push_back(out.positions.back());
    out.arc_length.push_back(out.arc_length.back());
  }
  return out;
}

void write_path_csv(std::ostream& os, const Path& path) {
  const int dim = path.vertices.empty() ? 2 : static_cast<int>(path.vertices.front().size());
  os << "index,x,y" << (dim == 3 ? ",z" : "") << '\n';
  os.precision(17);
  for (std::size_t i = 0; i < path.vertices.size(); ++i) {
    os << i;
    for (int d = 0; d < dim; ++d) os << ',' << path.vertices[i][d];
    os << '\n';
  }
}

void to_json(nlohmann::json& j, const PlannerParams& p) {
  j = nlohmann::json{{"step_size", p.step_size},           {"rewire_radius", p.rewire_radius},
                     {"goal_bias", p.goal_bias},           {"max_iterations", p.max_iterations},
                     {"goal_tolerance", p.goal_tolerance}, {"refine_iterations", p.refine_iterations}};
}

void from_json(const nlohmann::json& j, PlannerParams& p) {
  PlannerParams d;
  p.step_size = j.value("step_size", d.step_size);
  p.rewire_radius = j.value("rewire_radius", d.rewire_radius);
  p.goal_bias = j.value("goal_bias", d.goal_bias);
  p.max_iterations = j.value("max_iterations", d.max_iterations);
  p.goal_tolerance = j.value("goal_tolerance", d.goal_tolerance);
  p.refine_iterations = j.value("refine_iterations", d.refine_iterations);
  p.validate();
}

}  // namespace geointent
