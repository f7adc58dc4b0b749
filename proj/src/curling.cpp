#include "mugen/curling.hpp"

#include <algorithm>
#include <complex>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mugen::curling {

void SheetConfig::validate() const {
  const bool positive = length > 0 && width > 0 && tee_y > 0 && hog_to_tee > 0 && stone_radius > 0 &&
                        friction > 0 && curl >= 0 && restitution > 0 && timestep > 0 && stop_speed > 0 &&
                        max_time > 0 && guard_depth >= 0 && angle_max >= 0;
  if (!positive) throw std::invalid_argument("sheet config constants must be positive");
  if (timestep > 0.01) throw std::invalid_argument("sheet timestep must be <= 0.01 s");
  if (speed_min < 0 || speed_max < speed_min) throw std::invalid_argument("invalid launch speed range");
  for (std::size_t i = 0; i < ring_radii.size(); ++i) {
    if (!(ring_radii[i] > 0) || (i > 0 && ring_radii[i] <= ring_radii[i - 1])) {
      throw std::invalid_argument("ring radii must be positive and increasing");
    }
  }
  if (tee_y + house_radius() > length) throw std::invalid_argument("house extends past the back boundary");
  if (min_stones_per_team > max_stones_per_team || 2 * max_stones_per_team + 1 > max_stones) {
    throw std::invalid_argument("invalid stone count range");
  }
}

Launch map_action(const ContinuousAction& action, const SheetConfig& cfg) {
  Launch l;
  l.speed = cfg.speed_min + action.velocity * (cfg.speed_max - cfg.speed_min);
  // Centred form keeps angle and 1 - angle exact negations of each other.
  l.heading = (action.angle - 0.5) * (2.0 * cfg.angle_max);
  return l;
}

namespace {

bool out_of_bounds(double x, double y, const SheetConfig& cfg) {
  return std::abs(x) > 0.5 * cfg.width || y < 0.0 || y > cfg.length;
}

constexpr double kContactSlop = 1e-9;

}  // namespace

void validate_state(const CurlingState& state, const SheetConfig& cfg) {
  if (state.stones.size() > cfg.max_stones) {
    throw std::invalid_argument("state has " + std::to_string(state.stones.size()) + " stones");
  }
  const double diameter = 2.0 * cfg.stone_radius;
  for (std::size_t i = 0; i < state.stones.size(); ++i) {
    const Stone& a = state.stones[i];
    if (!std::isfinite(a.x) || !std::isfinite(a.y) || out_of_bounds(a.x, a.y, cfg)) {
      throw std::invalid_argument("stone " + std::to_string(i) + " is outside the sheet");
    }
    for (std::size_t j = i + 1; j < state.stones.size(); ++j) {
      const Stone& b = state.stones[j];
      if (std::hypot(a.x - b.x, a.y - b.y) < diameter - 1e-6) {
        throw std::invalid_argument("stones " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
      }
    }
  }
}

Simulator::Simulator(const CurlingState& state, const SheetConfig& cfg) : cfg_(cfg) {
  bodies_.reserve(state.stones.size() + 1);
  for (const Stone& s : state.stones) bodies_.push_back({s.x, s.y, 0.0, 0.0, s.team, false, 1});
  curl_cos_ = std::cos(cfg_.curl * cfg_.timestep);
  curl_sin_ = std::sin(cfg_.curl * cfg_.timestep);
  refresh_movers();
  refresh_clearance();
}

void Simulator::launch(const ContinuousAction& action) {
  const Launch l = map_action(action, cfg_);
  Body b{0.0, 0.0, l.speed * std::sin(l.heading), l.speed * std::cos(l.heading), Team::Hammer, true,
         action.turn};
  if (l.speed < cfg_.stop_speed) b.vx = b.vy = 0.0;
  bodies_.push_back(b);
  refresh_movers();
  refresh_clearance();
}

bool Simulator::moving() const { return !movers_.empty(); }

double Simulator::kinetic_energy() const {
  double e = 0.0;
  for (const Body& b : bodies_) e += 0.5 * (b.vx * b.vx + b.vy * b.vy);
  return e;
}

void Simulator::refresh_movers() {
  movers_.clear();
  for (std::size_t i = 0; i < bodies_.size(); ++i) {
    if (bodies_[i].vx != 0.0 || bodies_[i].vy != 0.0) movers_.push_back(i);
  }
}

void Simulator::refresh_clearance() {
  const double diameter = 2.0 * cfg_.stone_radius;
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i : movers_) {
    for (std::size_t j = 0; j < bodies_.size(); ++j) {
      if (j == i) continue;
      const double d = std::hypot(bodies_[i].x - bodies_[j].x, bodies_[i].y - bodies_[j].y);
      gap = std::min(gap, d - diameter);
    }
  }
  clearance_ = gap;
}

bool Simulator::resolve_contacts() {
  const double diameter = 2.0 * cfg_.stone_radius;
  bool impulse = false;
  for (int pass = 0; pass < 8; ++pass) {
    bool any = false;
    for (std::size_t i = 0; i < bodies_.size(); ++i) {
      for (std::size_t j = i + 1; j < bodies_.size(); ++j) {
        Body& a = bodies_[i];
        Body& b = bodies_[j];
        const double dx = b.x - a.x;
        const double dy = b.y - a.y;
        const double d = std::sqrt(dx * dx + dy * dy);
        if (d >= diameter) continue;
        any = true;
        double nx = 0.0, ny = 1.0;
        if (d > 0.0) {
          nx = dx / d;
          ny = dy / d;
        }
        const double vrel = (b.vx - a.vx) * nx + (b.vy - a.vy) * ny;
        if (vrel < 0.0) {
          // Equal masses: the impulse splits evenly between the pair.
          const double j_imp = 0.5 * (1.0 + cfg_.restitution) * vrel;
          a.vx += j_imp * nx;
          a.vy += j_imp * ny;
          b.vx -= j_imp * nx;
          b.vy -= j_imp * ny;
          impulse = true;
        }
        const double push = 0.5 * (diameter - d + kContactSlop);
        a.x -= push * nx;
        a.y -= push * ny;
        b.x += push * nx;
        b.y += push * ny;
      }
    }
    if (!any) break;
  }
  return impulse;
}

void Simulator::remove_out_of_bounds() {
  std::erase_if(bodies_, [&](const Body& b) { return out_of_bounds(b.x, b.y, cfg_); });
}

bool Simulator::step() {
  const double dt = cfg_.timestep;
  const double dv = cfg_.friction * dt;
  double max_speed = 0.0;
  bool stopped = false;
  for (std::size_t i : movers_) {
    Body& b = bodies_[i];
    if (b.spinning) {
      const double s = b.turn * curl_sin_;
      const double vx = curl_cos_ * b.vx + s * b.vy;
      const double vy = -s * b.vx + curl_cos_ * b.vy;
      b.vx = vx;
      b.vy = vy;
    }
    const double speed = std::sqrt(b.vx * b.vx + b.vy * b.vy);
    const double next = speed - dv;
    if (next < cfg_.stop_speed) {
      b.vx = b.vy = 0.0;
      stopped = true;
      continue;
    }
    const double scale = next / speed;
    b.vx *= scale;
    b.vy *= scale;
    max_speed = std::max(max_speed, next);
  }
  bool left = false;
  for (std::size_t i : movers_) {
    Body& b = bodies_[i];
    b.x += b.vx * dt;
    b.y += b.vy * dt;
    left = left || out_of_bounds(b.x, b.y, cfg_);
  }
  clearance_ -= 2.0 * max_speed * dt;
  bool collided = false;
  if (clearance_ <= 0.0) {
    collided = resolve_contacts();
    if (collided) refresh_movers();
    left = left || std::any_of(bodies_.begin(), bodies_.end(), [&](const Body& b) { return out_of_bounds(b.x, b.y, cfg_); });
  }
  if (left) remove_out_of_bounds();
  if (left || stopped || collided) refresh_movers();
  if (left || stopped || collided || clearance_ <= 0.0) refresh_clearance();
  return collided;
}

std::size_t Simulator::free_flight_steps(double time_left) const {
  if (movers_.size() != 1) return 0;
  const Body& b = bodies_[movers_[0]];
  const double dt = cfg_.timestep;
  const double speed = std::sqrt(b.vx * b.vx + b.vy * b.vy);
  const double reach = speed * dt;
  // Moving up the sheet, y stays increasing while the heading turns by less than its margin to 90 degrees.
  const double low = b.vy > 0.0 ? std::numeric_limits<double>::infinity() : b.y;
  const double room = std::min({clearance_ * 0.5, 0.5 * cfg_.width - std::abs(b.x), cfg_.length - b.y, low});
  const double by_room = room / reach - 1.0;
  const double turn_rate = b.spinning ? std::abs(cfg_.curl * dt) : 0.0;
  const double by_turn = b.vy > 0.0 && turn_rate > 0.0
                             ? (0.5 * std::numbers::pi - std::abs(std::atan2(b.vx, b.vy))) / turn_rate - 1.0
                             : std::numeric_limits<double>::infinity();
  const double by_speed = (speed - cfg_.stop_speed) / (cfg_.friction * dt) - 2.0;
  const double by_time = time_left / dt - 1.0;
  const double k = std::floor(std::min({by_room, by_speed, by_time, by_turn}));
  return k > 0.0 ? static_cast<std::size_t>(k) : 0;
}

void Simulator::advance_free(std::size_t k) {
  using C = std::complex<double>;
  Body& b = bodies_[movers_[0]];
  const double dt = cfg_.timestep;
  const double dv = cfg_.friction * dt;
  // Velocity as vx + i·vy; one step of curl multiplies it by r.
  const C r = b.spinning ? C(curl_cos_, -b.turn * curl_sin_) : C(1.0, 0.0);
  // Binary doubling of pw = r^n, a = sum_{j<=n} r^j, c = sum_{j<=n} j r^j.
  C pw(1.0, 0.0), a(0.0, 0.0), c(0.0, 0.0);
  std::size_t n = 0;
  C bp = r, ba = r, bc = r;
  std::size_t bn = 1;
  for (std::size_t rest = k; rest > 0; rest >>= 1) {
    if (rest & 1) {
      c = c + pw * (bc + static_cast<double>(n) * ba);
      a = a + pw * ba;
      pw = pw * bp;
      n += bn;
    }
    if (rest > 1) {
      bc = bc + bp * (bc + static_cast<double>(bn) * ba);
      ba = ba + bp * ba;
      bp = bp * bp;
      bn *= 2;
    }
  }
  const double s0 = std::sqrt(b.vx * b.vx + b.vy * b.vy);
  const C u(b.vx / s0, b.vy / s0);
  const C disp = dt * (s0 * a - dv * c) * u;
  const C v = (s0 - static_cast<double>(k) * dv) * pw * u;
  b.x += disp.real();
  b.y += disp.imag();
  b.vx = v.real();
  b.vy = v.imag();
  refresh_clearance();
}

void Simulator::run() {
  double t = 0.0;
  while (moving() && t < cfg_.max_time) {
    const std::size_t k = free_flight_steps(cfg_.max_time - t);
    if (k >= kMinJump) {
      advance_free(k);
      t += static_cast<double>(k) * cfg_.timestep;
      continue;
    }
    step();
    t += cfg_.timestep;
  }
  for (Body& b : bodies_) b.vx = b.vy = 0.0;
  movers_.clear();
  resolve_contacts();
  remove_out_of_bounds();
}

CurlingState Simulator::state() const {
  CurlingState s;
  s.stones.reserve(bodies_.size());
  for (const Body& b : bodies_) s.stones.push_back({b.x, b.y, b.team});
  return s;
}

CurlingState simulate_shot(const CurlingState& state, const ContinuousAction& action, const SheetConfig& cfg) {
  if (!action.valid()) throw std::invalid_argument("invalid continuous action");
  if (state.stones.size() >= cfg.max_stones) throw std::invalid_argument("no room for the delivered stone");
  validate_state(state, cfg);
  Simulator sim(state, cfg);
  sim.launch(action);
  sim.run();
  return sim.state();
}

bool in_house(const Stone& s, const SheetConfig& cfg) {
  return std::hypot(s.x, s.y - cfg.tee_y) <= cfg.house_radius() + cfg.stone_radius;
}

int score(const CurlingState& state, const SheetConfig& cfg) {
  double nearest_hammer = std::numeric_limits<double>::infinity();
  double nearest_opp = std::numeric_limits<double>::infinity();
  std::vector<double> hammer, opp;
  for (const Stone& s : state.stones) {
    if (!in_house(s, cfg)) continue;
    const double d = std::hypot(s.x, s.y - cfg.tee_y);
    if (s.team == Team::Hammer) {
      hammer.push_back(d);
      nearest_hammer = std::min(nearest_hammer, d);
    } else {
      opp.push_back(d);
      nearest_opp = std::min(nearest_opp, d);
    }
  }
  if (nearest_hammer < nearest_opp) {
    return static_cast<int>(std::count_if(hammer.begin(), hammer.end(), [&](double d) { return d < nearest_opp; }));
  }
  if (nearest_opp < nearest_hammer) {
    return -static_cast<int>(std::count_if(opp.begin(), opp.end(), [&](double d) { return d < nearest_hammer; }));
  }
  return 0;
}

CurlingState sample_hammer_state(Rng& rng, const SheetConfig& cfg) {
  std::uniform_int_distribution<std::size_t> count(cfg.min_stones_per_team, cfg.max_stones_per_team);
  const std::size_t n_hammer = count(rng);
  const std::size_t n_opp = count(rng);
  const double r = cfg.house_radius();
  std::uniform_real_distribution<double> ux(-r, r);
  std::uniform_real_distribution<double> uy(cfg.tee_y - r - cfg.guard_depth, cfg.tee_y + r);
  const double diameter = 2.0 * cfg.stone_radius;
  CurlingState state;
  auto place = [&](Team team) {
    while (true) {
      const Stone s{ux(rng), uy(rng), team};
      const bool clear = std::none_of(state.stones.begin(), state.stones.end(), [&](const Stone& o) {
        return std::hypot(o.x - s.x, o.y - s.y) < diameter;
      });
      if (clear) {
        state.stones.push_back(s);
        return;
      }
    }
  };
  for (std::size_t i = 0; i < n_hammer; ++i) place(Team::Hammer);
  for (std::size_t i = 0; i < n_opp; ++i) place(Team::Opponent);
  return state;
}

std::vector<double> encode_state(const CurlingState& state, const SheetConfig& cfg, const Encoding& res) {
  if (res.rows == 0 || res.cols == 0) throw std::invalid_argument("encoding resolution must be non-zero");
  const std::size_t plane = res.rows * res.cols;
  std::vector<double> out(3 * plane, 0.0);
  const double y0 = cfg.hog_y();
  const double depth = cfg.length - y0;
  const double x0 = -0.5 * cfg.width;
  const double cell_h = depth / static_cast<double>(res.rows);
  const double cell_w = cfg.width / static_cast<double>(res.cols);
  for (const Stone& s : state.stones) {
    if (s.y < y0 || s.y > cfg.length || std::abs(s.x) > 0.5 * cfg.width) continue;
    std::size_t row = std::min(res.rows - 1, static_cast<std::size_t>((s.y - y0) / cell_h));
    std::size_t col = std::min(res.cols - 1, static_cast<std::size_t>((s.x - x0) / cell_w));
    const std::size_t offset = s.team == Team::Hammer ? 0 : plane;
    out[offset + row * res.cols + col] = 1.0;
  }
  for (std::size_t row = 0; row < res.rows; ++row) {
    for (std::size_t col = 0; col < res.cols; ++col) {
      const double cy = y0 + (static_cast<double>(row) + 0.5) * cell_h;
      const double cx = x0 + (static_cast<double>(col) + 0.5) * cell_w;
      if (std::hypot(cx, cy - cfg.tee_y) <= cfg.house_radius()) out[2 * plane + row * res.cols + col] = 1.0;
    }
  }
  return out;
}

CurlingState mirror(const CurlingState& state) {
  CurlingState m = state;
  for (Stone& s : m.stones) s.x = -s.x;
  return m;
}

CurlingState swap_teams(const CurlingState& state) {
  CurlingState m = state;
  for (Stone& s : m.stones) s.team = s.team == Team::Hammer ? Team::Opponent : Team::Hammer;
  return m;
}

}  // namespace mugen::curling
