// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "besselflow/grid.hpp"
#include "besselflow/rng.hpp"

namespace besselflow {

// Discretization of the singular drift (delta-1)/(2 rho).
//   euler_floor:   explicit step, drift evaluated at max(rho, dt^0.75)
//   implicit_drift: rho' solves rho' = rho + dB + c*dt/rho'; the positive
//                   root keeps the path strictly positive for delta > 1
enum class Scheme { euler_floor, implicit_drift };

// free: the path keeps evolving after touching the floor (reflected at 0)
// stopped: the path freezes at 0 from the first floor hit (t ^ tau0)
enum class Mode { free_running, stopped_at_zero };

constexpr double kNeverHit = std::numeric_limits<double>::infinity();

inline double scheme_floor(double dt) { return std::pow(dt, 0.75); }

// One-step state machine shared by every simulation routine. Streams values
// without storing them; callers that need the whole trajectory record nodes
// themselves.
class BesselStepper {
 public:
  BesselStepper(double x0, double delta, Scheme scheme, Mode mode)
      : rho_(x0), delta_(delta), c_(0.5 * (delta - 1.0)), scheme_(scheme),
        mode_(mode) {}

  double value() const { return rho_; }
  void set_value(double v) { rho_ = v; }
  bool absorbed() const { return absorbed_; }
  // Fraction of the last step at which the zero level was crossed (linear
  // interpolation); only meaningful right after the absorbing step.
  double crossing_fraction() const { return crossing_fraction_; }
  long floor_hits() const { return floor_hits_; }

  // Advances by one step of size dt with Brownian increment db.
  // Returns the new value (0 if the path just got absorbed in stopped mode).
  double step(double db, double dt) {
    if (absorbed_) return rho_;
    double next;
    if (scheme_ == Scheme::implicit_drift) {
      const double m = rho_ + db;
      next = 0.5 * (m + std::sqrt(m * m + 4.0 * c_ * dt));
      if (mode_ == Mode::stopped_at_zero && next <= scheme_floor(dt)) {
        crossing_fraction_ = 1.0;
        absorbed_ = true;
        next = 0.0;
      }
    } else {
      const double rho_hat = std::max(rho_, scheme_floor(dt));
      next = rho_ + db + c_ * dt / rho_hat;
      if (next <= 0.0) {
        if (mode_ == Mode::stopped_at_zero) {
          crossing_fraction_ = rho_ / (rho_ - next);
          absorbed_ = true;
          next = 0.0;
        } else {
          ++floor_hits_;
          next = -next;  // reflect
        }
      }
    }
    if (!std::isfinite(next)) nonfinite_ = true;
    rho_ = next;
    return rho_;
  }

  bool nonfinite() const { return nonfinite_; }

 private:
  double rho_;
  double delta_;
  double c_;
  Scheme scheme_;
  Mode mode_;
  bool absorbed_ = false;
  bool nonfinite_ = false;
  double crossing_fraction_ = 0.0;
  long floor_hits_ = 0;
};

struct BesselPath {
  TimeGrid grid;
  std::vector<double> values;  // one per node
  double delta = 0.0;
  double x0 = 0.0;
  Scheme scheme = Scheme::euler_floor;
  Mode mode = Mode::free_running;
  // first node index at which the path is frozen at zero (stopped mode)
  std::optional<std::size_t> absorbed_at;
  // sub-step linear interpolation of the actual crossing time
  std::optional<double> absorption_time;
  long floor_hits = 0;

  double terminal() const { return values.back(); }
};

BesselPath simulate_bessel(double x0, double delta, const NoisePath& noise,
                           Scheme scheme = Scheme::euler_floor,
                           Mode mode = Mode::free_running);

// Coupled flow: every initial condition is driven by the same noise.
// Pathwise ordering in x is enforced node by node (a path dipping below the
// one started lower is lifted onto it and the event counted).
struct FlowBundle {
  std::vector<double> xs;
  std::vector<BesselPath> paths;
  double delta = 0.0;
  long order_violations = 0;
  std::size_t node_count = 0;
};

FlowBundle simulate_flow(const std::vector<double>& xs, double delta,
                         const NoisePath& noise,
                         Scheme scheme = Scheme::euler_floor,
                         Mode mode = Mode::free_running);

struct HittingTime {
  double level = 0.0;
  double time = kNeverHit;
  bool hit() const { return std::isfinite(time); }
};

// First time the path reaches level eps, linearly interpolated between the
// bracketing nodes; +inf sentinel if the grid never crosses.
HittingTime hitting_time(const BesselPath& path, double level);

// One exact draw from the BESQ(delta) transition law at time t started from
// x_sq: t * chi'^2(delta, x_sq/t). Marginal-law oracle only; it cannot be
// coupled to a NoisePath.
double sample_besq(double x_sq, double delta, double t, PathRng& rng);

}  // namespace besselflow
