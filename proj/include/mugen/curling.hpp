#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "mugen/common.hpp"
#include "mugen/domain.hpp"

namespace mugen::curling {

enum class Team { Hammer, Opponent };

struct Stone {
  double x = 0.0;  // lateral, metres from the centre line
  double y = 0.0;  // along the sheet, metres from the release point
  Team team = Team::Hammer;
  friend bool operator==(const Stone&, const Stone&) = default;
};

struct CurlingState {
  std::vector<Stone> stones;
};

/// Sheet geometry, dynamics constants, action ranges and the hammer-state
/// sampler's parameters. The thrown stone starts at (0, 0) travelling in +y.
struct SheetConfig {
  double length = 30.33;  // release point to back boundary
  double width = 4.75;
  double tee_y = 28.35;
  double hog_to_tee = 6.4;
  std::array<double, 4> ring_radii{0.15, 0.61, 1.22, 1.83};
  double stone_radius = 0.145;
  double friction = 0.0735;  // m/s^2
  double curl = 0.004;       // 1/s; lateral accel = curl * speed
  double restitution = 1.0;
  double timestep = 0.002;
  double stop_speed = 1e-3;
  double max_time = 300.0;
  double speed_min = 1.75;  // m/s at velocity = 0
  double speed_max = 2.35;  // m/s at velocity = 1
  double angle_max = 0.12;  // radians; angle = 0.5 aims straight down the sheet
  // Hammer-state sampler.
  std::size_t min_stones_per_team = 0;
  std::size_t max_stones_per_team = 6;
  double guard_depth = 3.0;  // metres of guard band in front of the house
  std::size_t max_stones = 15;

  double house_radius() const { return ring_radii.back(); }
  double hog_y() const { return tee_y - hog_to_tee; }
  /// Throws std::invalid_argument on non-physical constants.
  void validate() const;
};

/// Launch speed (m/s) and heading (radians from +y, positive toward +x).
struct Launch {
  double speed = 0.0;
  double heading = 0.0;
};
Launch map_action(const ContinuousAction& action, const SheetConfig& cfg);

/// Throws std::invalid_argument for overlapping, out-of-bounds or too many stones.
void validate_state(const CurlingState& state, const SheetConfig& cfg);

/// Fixed-step integrator over moving stones. Exposed so tests can observe
/// individual steps; simulate_shot is the normal entry point.
class Simulator {
 public:
  struct Body {
    double x, y, vx, vy;
    Team team;
    bool spinning;
    int turn;
  };

  Simulator(const CurlingState& state, const SheetConfig& cfg);

  /// Adds the delivered stone at the release point.
  void launch(const ContinuousAction& action);
  /// One symplectic Euler step followed by collision handling and removal.
  /// Returns true when a collision impulse was applied.
  bool step();
  bool moving() const;
  double kinetic_energy() const;
  const std::vector<Body>& bodies() const { return bodies_; }
  CurlingState state() const;
  /// Steps until rest (or max_time), jumping over free-flight stretches.
  void run();

 private:
  bool resolve_contacts();
  void remove_out_of_bounds();
  void refresh_clearance();
  void refresh_movers();
  /// Steps the lone moving stone can take without reaching another stone,
  /// a boundary, the stop speed or the time limit.
  std::size_t free_flight_steps(double time_left) const;
  /// Closed form of k free-flight steps of the lone mover.
  void advance_free(std::size_t k);
  static constexpr std::size_t kMinJump = 8;

  SheetConfig cfg_;
  std::vector<Body> bodies_;
  std::vector<std::size_t> movers_;
  double curl_cos_ = 1.0;
  double curl_sin_ = 0.0;
  double clearance_ = 0.0;  // lower bound on gap between any mover and any other stone
};

/// Deterministic rest state after throwing `action` from `state`.
CurlingState simulate_shot(const CurlingState& state, const ContinuousAction& action,
                           const SheetConfig& cfg);

bool in_house(const Stone& s, const SheetConfig& cfg);

/// Signed hammer-perspective points.
int score(const CurlingState& state, const SheetConfig& cfg);

CurlingState sample_hammer_state(Rng& rng, const SheetConfig& cfg);

struct Encoding {
  std::size_t rows = 50;  // along the sheet
  std::size_t cols = 25;  // across the sheet
};

/// Three planes (hammer occupancy, opponent occupancy, house mask) over the
/// region from the hog line to the back boundary, flattened plane-major then
/// row-major. Size 3·rows·cols.
std::vector<double> encode_state(const CurlingState& state, const SheetConfig& cfg, const Encoding& res);

CurlingState mirror(const CurlingState& state);
CurlingState swap_teams(const CurlingState& state);

}  // namespace mugen::curling
