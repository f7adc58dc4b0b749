#include "mugen/continuous_domains.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace mugen {

using nlohmann::json;

CurlingDomain::CurlingDomain(curling::SheetConfig sheet, curling::Encoding encoding)
    : sheet_(std::move(sheet)), encoding_(encoding) {
  sheet_.validate();
  if (encoding_.rows == 0 || encoding_.cols == 0) throw std::invalid_argument("encoding resolution must be non-zero");
}

json CurlingDomain::sample_state(Rng& rng) const { return to_json(curling::sample_hammer_state(rng, sheet_)); }

ContinuousInstance CurlingDomain::instance(const json& state) const {
  curling::CurlingState s = curling_state_from_json(state);
  curling::validate_state(s, sheet_);
  ContinuousInstance inst;
  inst.features = curling::encode_state(s, sheet_, encoding_);
  inst.reward = [s = std::move(s), sheet = sheet_](const ContinuousAction& a) {
    return static_cast<double>(curling::score(curling::simulate_shot(s, a, sheet), sheet));
  };
  return inst;
}

json CurlingDomain::config() const {
  return {{"id", "curling"}, {"sheet", sheet_to_json(sheet_)}, {"encoding", {encoding_.rows, encoding_.cols}}};
}

BumpDomain::BumpDomain(Params p) : params_(std::move(p)) {
  if (params_.centers.empty()) throw std::invalid_argument("bump domain needs at least one centre");
  if (!(params_.width > 0.0)) throw std::invalid_argument("bump width must be positive");
  if (params_.height_min < 0.0 || params_.height_min > 1.0) throw std::invalid_argument("height_min must be in [0,1]");
}

double BumpDomain::surface(const Params& p, const std::vector<double>& heights, const ContinuousAction& a) {
  double best = 0.0;
  for (std::size_t k = 0; k < p.centers.size(); ++k) {
    const double dv = a.velocity - p.centers[k][0];
    const double da = a.angle - p.centers[k][1];
    best = std::max(best, heights[k] * std::exp(-(dv * dv + da * da) / (2.0 * p.width * p.width)));
  }
  return best;
}

json BumpDomain::sample_state(Rng& rng) const {
  std::vector<double> heights(params_.centers.size(), 1.0);
  if (params_.random_heights) {
    std::uniform_real_distribution<double> u(params_.height_min, 1.0);
    for (double& h : heights) h = u(rng);
  }
  return {{"heights", heights}};
}

ContinuousInstance BumpDomain::instance(const json& state) const {
  std::vector<double> heights = state.at("heights").get<std::vector<double>>();
  if (heights.size() != params_.centers.size()) throw ArtifactError("bump state has the wrong number of heights");
  ContinuousInstance inst;
  inst.features = params_.random_heights ? heights : std::vector<double>{1.0};
  inst.reward = [p = params_, heights](const ContinuousAction& a) { return surface(p, heights, a); };
  return inst;
}

json BumpDomain::config() const {
  json centers = json::array();
  for (const auto& c : params_.centers) centers.push_back({c[0], c[1]});
  return {{"id", "synthetic_bump"},
          {"centers", centers},
          {"width", params_.width},
          {"random_heights", params_.random_heights},
          {"height_min", params_.height_min}};
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

}  // namespace

std::unique_ptr<ContinuousDomain> make_continuous_domain(const json& env) {
  try {
    if (!env.is_object() || !env.contains("id")) throw ConfigError("env: missing required key 'id'");
    const std::string id = env.at("id").get<std::string>();
    if (id == "curling") {
      reject_unknown(env, {"id", "sheet", "encoding"}, "env");
      curling::SheetConfig sheet = env.contains("sheet") ? sheet_from_json(env.at("sheet")) : curling::SheetConfig{};
      curling::Encoding enc;
      if (env.contains("encoding")) {
        const auto& e = env.at("encoding");
        enc.rows = e.at(0).get<std::size_t>();
        enc.cols = e.at(1).get<std::size_t>();
      }
      return std::make_unique<CurlingDomain>(sheet, enc);
    }
    if (id == "synthetic_bump") {
      reject_unknown(env, {"id", "centers", "width", "random_heights", "height_min"}, "env");
      BumpDomain::Params p;
      if (env.contains("centers")) {
        p.centers.clear();
        for (const auto& c : env.at("centers")) p.centers.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
      }
      p.width = env.value("width", p.width);
      p.random_heights = env.value("random_heights", p.random_heights);
      p.height_min = env.value("height_min", p.height_min);
      return std::make_unique<BumpDomain>(p);
    }
    throw ConfigError("env: unknown continuous environment '" + id + "'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("env: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("env: ") + e.what());
  }
}

json to_json(const curling::CurlingState& s) {
  json stones = json::array();
  for (const auto& st : s.stones) {
    stones.push_back({{"team", st.team == curling::Team::Hammer ? "hammer" : "opponent"}, {"x", st.x}, {"y", st.y}});
  }
  return stones;
}

curling::CurlingState curling_state_from_json(const json& j) {
  try {
    curling::CurlingState s;
    for (const auto& st : j) {
      const std::string team = st.at("team").get<std::string>();
      if (team != "hammer" && team != "opponent") throw ArtifactError("unknown team '" + team + "'");
      s.stones.push_back({st.at("x").get<double>(), st.at("y").get<double>(),
                          team == "hammer" ? curling::Team::Hammer : curling::Team::Opponent});
    }
    return s;
  } catch (const json::exception& e) {
    throw ArtifactError(std::string("malformed curling state: ") + e.what());
  }
}

json to_json(const location::GridState& g) { return {{"n", g.n}, {"values", g.values}}; }

location::GridState grid_state_from_json(const json& j) {
  try {
    location::GridState g{j.at("n").get<std::size_t>(), j.at("values").get<std::vector<double>>()};
    g.validate();
    return g;
  } catch (const json::exception& e) {
    throw ArtifactError(std::string("malformed grid state: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ArtifactError(std::string("invalid grid state: ") + e.what());
  }
}

json sheet_to_json(const curling::SheetConfig& c) {
  return {{"length", c.length},
          {"width", c.width},
          {"tee_y", c.tee_y},
          {"hog_to_tee", c.hog_to_tee},
          {"ring_radii", c.ring_radii},
          {"stone_radius", c.stone_radius},
          {"friction", c.friction},
          {"curl", c.curl},
          {"restitution", c.restitution},
          {"timestep", c.timestep},
          {"stop_speed", c.stop_speed},
          {"max_time", c.max_time},
          {"speed_min", c.speed_min},
          {"speed_max", c.speed_max},
          {"angle_max", c.angle_max},
          {"min_stones_per_team", c.min_stones_per_team},
          {"max_stones_per_team", c.max_stones_per_team},
          {"guard_depth", c.guard_depth},
          {"max_stones", c.max_stones}};
}

curling::SheetConfig sheet_from_json(const json& j) {
  curling::SheetConfig c;
  const json defaults = sheet_to_json(c);
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!defaults.contains(it.key())) throw ConfigError("sheet: unknown key '" + it.key() + "'");
  }
  c.length = j.value("length", c.length);
  c.width = j.value("width", c.width);
  c.tee_y = j.value("tee_y", c.tee_y);
  c.hog_to_tee = j.value("hog_to_tee", c.hog_to_tee);
  if (j.contains("ring_radii")) c.ring_radii = j.at("ring_radii").get<std::array<double, 4>>();
  c.stone_radius = j.value("stone_radius", c.stone_radius);
  c.friction = j.value("friction", c.friction);
  c.curl = j.value("curl", c.curl);
  c.restitution = j.value("restitution", c.restitution);
  c.timestep = j.value("timestep", c.timestep);
  c.stop_speed = j.value("stop_speed", c.stop_speed);
  c.max_time = j.value("max_time", c.max_time);
  c.speed_min = j.value("speed_min", c.speed_min);
  c.speed_max = j.value("speed_max", c.speed_max);
  c.angle_max = j.value("angle_max", c.angle_max);
  c.min_stones_per_team = j.value("min_stones_per_team", c.min_stones_per_team);
  c.max_stones_per_team = j.value("max_stones_per_team", c.max_stones_per_team);
  c.guard_depth = j.value("guard_depth", c.guard_depth);
  c.max_stones = j.value("max_stones", c.max_stones);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("sheet: ") + e.what());
  }
  return c;
}

std::vector<double> location_features(const location::GridState& g) {
  std::vector<double> f(g.values);
  const double scale = static_cast<double>(g.cells());
  for (double& v : f) v *= scale;
  return f;
}

}  // namespace mugen
