#include "geointent/intent_library.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace geointent {

void MotionParams::validate() const {
  if (!(0.0 < speed_min && speed_min < speed_max)) {
    throw std::invalid_argument("motion params: need 0 < speed_min < speed_max");
  }
  if (!(sample_rate > 0.0)) throw std::invalid_argument("motion params: sample_rate must be > 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("motion params: epsilon must be > 0");
}

const Intent& IntentLibrary::intent(const std::string& id) const {
  for (const auto& i : intents) {
    if (i.id == id) return i;
  }
  throw std::out_of_range("unknown intent '" + id + "'");
}

const Region& IntentLibrary::region(const std::string& name) const {
  auto it = regions.find(name);
  if (it == regions.end()) throw std::out_of_range("unknown region '" + name + "'");
  return it->second;
}

bool IntentLibrary::has_intent(const std::string& id) const {
  return std::any_of(intents.begin(), intents.end(), [&](const Intent& i) { return i.id == id; });
}

std::vector<std::string> IntentLibrary::intent_ids() const {
  std::vector<std::string> ids;
  for (const auto& i : intents) ids.push_back(i.id);
  return ids;
}

IntentLibrary IntentLibrary::scaled(double factor) const {
  IntentLibrary lib = *this;
  for (auto& [name, r] : lib.regions) r = r.scaled(factor);
  return lib;
}

IntentLibrary IntentLibrary::subset(const std::vector<std::string>& ids) const {
  IntentLibrary lib;
  lib.regions = regions;
  for (const auto& id : ids) lib.intents.push_back(intent(id));
  return lib;
}

namespace {

std::vector<Cros> harmless_alternatives(int legs) {
  if (legs < 1) throw std::invalid_argument("harmless_legs must be >= 1");
  Cros a;
  Cros b;
  for (int n = 0; n <= legs; ++n) {
    a.regions.push_back(n % 2 == 0 ? "D1" : "D2");
    b.regions.push_back(n % 2 == 0 ? "D2" : "D1");
  }
  return {a, b};
}

std::vector<Intent> builtin_intents(int harmless_legs) {
  auto motion = [](double lo, double hi) {
    MotionParams m;
    m.speed_min = lo;
    m.speed_max = hi;
    return m;
  };
  std::vector<Intent> out;
  out.push_back({intents::kDirectAttack,
                 {Cros{{"D1", "D2", "G"}}, Cros{{"D4", "D3", "G"}}},
                 motion(15.0, 25.0)});
  out.push_back({intents::kHarmless, harmless_alternatives(harmless_legs), motion(5.0, 12.0)});
  out.push_back({intents::kSurveillance,
                 {Cros{{"D1", "D3", "D2"}}, Cros{{"D2", "D3", "D1"}}},
                 motion(5.0, 15.0)});
  out.push_back({intents::kCriminalHarmful,
                 {Cros{{"D1", "D2", "D1"}}, Cros{{"D4", "D3", "D4"}}, Cros{{"D1", "D2", "D4"}},
                  Cros{{"D4", "D3", "D1"}}},
                 motion(10.0, 20.0)});
  return out;
}

}  // namespace

IntentLibrary builtin_library_2d(int harmless_legs) {
  IntentLibrary lib;
  lib.regions = {
      {"D1", Region::box2(40, 60, 40, 60)},
      {"D2", Region::box2(55, 70, 75, 100)},
      {"D3", Region::box2(75, 100, 55, 70)},
      {"D4", Region::box2(40, 60, 5, 25)},
      {"G", Environment::example_2d().geofence},
  };
  lib.intents = builtin_intents(harmless_legs);
  return lib;
}

IntentLibrary builtin_library_3d(int harmless_legs) {
  IntentLibrary lib;
  lib.regions = {
      {"D1", Region::box3(40, 60, 40, 60, 5, 25)},
      {"D2", Region::box3(55, 70, 75, 100, 10, 30)},
      {"D3", Region::box3(75, 100, 55, 70, 10, 30)},
      {"D4", Region::box3(40, 60, 5, 25, 5, 25)},
      {"G", Environment::default_3d().geofence},
  };
  lib.intents = builtin_intents(harmless_legs);
  return lib;
}

WaypointSequence sample_waypoints(const IntentLibrary& lib, const Intent& intent,
                                  const Environment& env, Rng& rng) {
  if (intent.cros_alternatives.empty()) {
    throw std::invalid_argument("intent '" + intent.id + "' has no CROS alternatives");
  }
  std::uniform_int_distribution<std::size_t> pick(0, intent.cros_alternatives.size() - 1);
  WaypointSequence wps;
  wps.intent = intent.id;
  wps.cros_index = pick(rng);
  const Cros& cros = intent.cros_alternatives[wps.cros_index];
  for (const auto& name : cros.regions) {
    const Region& r = lib.region(name);
    if (r.dim() != env.dim || !env.bounds.encloses(r)) {
      throw std::invalid_argument("region '" + name + "' is outside the environment");
    }
    Position p(r.dim());
    for (int d = 0; d < r.dim(); ++d) p[d] = uniform(rng, r.lo()[d], r.hi()[d]);
    wps.region_names.push_back(name);
    wps.waypoints.push_back(std::move(p));
  }
  return wps;
}

ValidationReport validate_intent(const Intent& intent, const IntentLibrary& lib,
                                 const Environment& env) {
  ValidationReport rep;
  auto fail = [&](std::string msg) { rep.violations.push_back(intent.id + ": " + std::move(msg)); };

  try {
    intent.motion.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (intent.cros_alternatives.empty()) {
    fail("no CROS alternatives");
    return rep;
  }

  std::set<std::string> used;
  for (std::size_t c = 0; c < intent.cros_alternatives.size(); ++c) {
    const Cros& cros = intent.cros_alternatives[c];
    const std::string tag = "CROS " + std::to_string(c);
    if (cros.regions.empty()) fail(tag + " is empty");
    if (cros.regions.size() > lib.regions.size()) {
      fail(tag + " is longer than the region set");
    }
    if (!intent.variable_length && cros.regions.size() != intent.index_set_size()) {
      fail(tag + " length differs from the index set size");
    }
    if (!(0.0 <= cros.delta_w && cros.delta_w < 1.0)) fail(tag + " delta_w outside [0,1)");
    for (const auto& name : cros.regions) {
      if (!lib.regions.count(name)) {
        fail(tag + " references unknown region '" + name + "'");
      } else {
        used.insert(name);
      }
    }
  }

  std::vector<std::string> names(used.begin(), used.end());
  for (std::size_t a = 0; a < names.size(); ++a) {
    const Region& ra = lib.region(names[a]);
    if (ra.dim() != env.dim) {
      fail("region '" + names[a] + "' dimensionality differs from the environment");
      continue;
    }
    if (!env.bounds.encloses(ra)) fail("region '" + names[a] + "' is not inside the bounds");
    for (std::size_t o = 0; o < env.obstacles.size(); ++o) {
      if (ra.overlaps(env.obstacles[o])) {
        fail("region '" + names[a] + "' overlaps obstacle " + std::to_string(o));
      }
    }
    for (std::size_t b = a + 1; b < names.size(); ++b) {
      const Region& rb = lib.region(names[b]);
      if (rb.dim() == ra.dim() && ra.overlaps(rb)) {
        fail("regions '" + names[a] + "' and '" + names[b] + "' are not disjoint");
      }
    }
  }
  return rep;
}

ValidationReport validate_library(const IntentLibrary& lib, const Environment& env) {
  ValidationReport rep;
  for (const auto& i : lib.intents) {
    auto r = validate_intent(i, lib, env);
    rep.violations.insert(rep.violations.end(), r.violations.begin(), r.violations.end());
  }
  return rep;
}

bool check_well_defined(const Trajectory& traj, const WaypointSequence& wps, double epsilon) {
  if (traj.empty()) return wps.waypoints.empty();
  // Earliest admissible sample per waypoint; greedy is optimal for the
  // existence of a strictly increasing assignment.
  std::size_t next = 0;
  for (const auto& wp : wps.waypoints) {
    bool found = false;
    for (std::size_t k = next; k < traj.size(); ++k) {
      const Eigen::Vector3d p = traj.states[k].position();
      if ((p.head(wp.size()) - wp).norm() < epsilon) {
        next = k + 1;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

void to_json(nlohmann::json& j, const MotionParams& m) {
  j = nlohmann::json{{"speed_range", {m.speed_min, m.speed_max}},
                     {"sample_rate", m.sample_rate},
                     {"epsilon", m.epsilon},
                     {"delta_m", m.delta_m}};
}

void from_json(const nlohmann::json& j, MotionParams& m) {
  const auto sr = j.at("speed_range").get<std::vector<double>>();
  if (sr.size() != 2) throw std::invalid_argument("speed_range must have two entries");
  m.speed_min = sr[0];
  m.speed_max = sr[1];
  m.sample_rate = j.value("sample_rate", 10.0);
  m.epsilon = j.value("epsilon", 2.0);
  m.delta_m = j.value("delta_m", 0.05);
  m.validate();
}

void to_json(nlohmann::json& j, const Intent& i) {
  nlohmann::json cros = nlohmann::json::array();
  for (const auto& c : i.cros_alternatives) {
    cros.push_back({{"regions", c.regions}, {"delta_w", c.delta_w}});
  }
  j = nlohmann::json{{"id", i.id}, {"cros", cros}, {"motion", i.motion}};
  if (i.variable_length) j["variable_length"] = true;
}

void from_json(const nlohmann::json& j, Intent& i) {
  i.id = j.at("id").get<std::string>();
  i.cros_alternatives.clear();
  for (const auto& c : j.at("cros")) {
    i.cros_alternatives.push_back(
        Cros{c.at("regions").get<std::vector<std::string>>(), c.value("delta_w", 0.0)});
  }
  i.motion = j.at("motion").get<MotionParams>();
  i.variable_length = j.value("variable_length", false);
}

void to_json(nlohmann::json& j, const IntentLibrary& lib) {
  nlohmann::json regions = nlohmann::json::object();
  for (const auto& [name, r] : lib.regions) regions[name] = r;
  j = nlohmann::json{{"regions", regions}, {"intents", lib.intents}};
}

void from_json(const nlohmann::json& j, IntentLibrary& lib) {
  lib.regions.clear();
  for (const auto& [name, r] : j.at("regions").items()) lib.regions.emplace(name, r.get<Region>());
  lib.intents = j.at("intents").get<std::vector<Intent>>();
  if (j.contains("scale")) lib = lib.scaled(j.at("scale").get<double>());
}

}  // namespace geointent
