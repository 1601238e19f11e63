#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "magzoll/curves.hpp"
#include "magzoll/flow.hpp"

namespace magzoll {

struct ActionValue {
  double value = 0.0;
  double kinetic = 0.0;
  /// lambda * flux; enters value with a minus sign.
  double magnetic = 0.0;
  double period_term = 0.0;
};

/// Discrete free-period action: (N / 2 tau) sum |Delta_i|^2_{g(m_i)} - lambda * flux + tau / 2.
/// The magnetic term is skipped when lambda == 0.
ActionValue action(const DiscreteLoop& loop, const MagneticSurface& surface, double lambda);

struct ActionGradient {
  std::vector<Vec2> points;
  double period = 0.0;
  double max_norm() const;
  /// max(N |dA/dp_i|, |dA/dtau|): the sup norm of the L2 gradient density.
  double density_norm() const;
};

/// Exact gradient of the discrete action in the chart coordinates of the lift.
ActionGradient action_gradient(const DiscreteLoop& loop, const MagneticSurface& surface, double lambda);

/// Period minimizing the action for fixed points: sqrt(N sum |Delta_i|^2).
double optimal_period(const DiscreteLoop& loop, const MagneticSurface& surface);

/// Discrete H1 x R distance with points matched by index:
/// sqrt(sum |dp_i|^2 / N + (N / tau) sum |dp_{i+1} - dp_i|^2 + dtau^2).
double loop_space_distance(const DiscreteLoop& a, const DiscreteLoop& b);
/// Largest chart distance from a point of `a` to the polyline `b` (nearest translates).
double chart_distance(const DiscreteLoop& a, const DiscreteLoop& b, const MagneticSurface& surface);

struct WaistOptions {
  /// Bound on ActionGradient::density_norm.
  double grad_tol = 1e-8;
  std::size_t max_iterations = 20000;
  double tau_min = 1e-4;
  /// Radius of the loop-space sphere probed for the stability margin (0 skips probing).
  double probe_radius = 0.05;
  int probe_directions = 64;
  std::uint64_t seed = 1;
};

struct Waist {
  DiscreteLoop loop;
  double action = 0.0;
  double length = 0.0;
  double lambda = 0.0;
  double grad_norm = 0.0;
  std::size_t iterations = 0;
  double stability_margin = 0.0;
  double probe_radius = 0.0;
};

enum class WaistStatus { Converged, Collapse, NotConverged };
std::string_view to_string(WaistStatus status);

struct WaistSearch {
  WaistStatus status = WaistStatus::NotConverged;
  std::optional<Waist> waist;
  std::size_t iterations = 0;
  double grad_norm = 0.0;
  double final_period = 0.0;
};

/// Preconditioned gradient descent with Armijo backtracking; the period is
/// set to its optimum after every step.
WaistSearch find_waist(const MagneticSurface& surface, double lambda, const DiscreteLoop& seed,
                       const WaistOptions& options = {});

struct StabilityProbe {
  /// min over probes of action(probe) - action(center).
  double margin = 0.0;
  double radius = 0.0;
  /// max over probes of |action(probe) - action(center)|.
  double spread = 0.0;
};

/// Samples smooth random directions of the given loop-space norm.
StabilityProbe stability_probe(const DiscreteLoop& loop, const MagneticSurface& surface, double lambda, double radius,
                               int directions, std::uint64_t seed);

/// eps / (4 r theta_sup).
double perturbation_threshold(double eps, double r, double theta_sup);

struct ContinuationOptions {
  int steps = 10;
  /// Chart distance from the seed waist allowed along the path.
  double neighborhood = 0.05;
  WaistOptions descent;
};

struct ContinuationStep {
  double lambda = 0.0;
  double action = 0.0;
  double length = 0.0;
  double grad_norm = 0.0;
  double chart_distance = 0.0;
  double loop_distance = 0.0;
};

struct ContinuationResult {
  std::optional<Waist> waist;
  bool lost = false;
  double lambda_reached = 0.0;
  std::vector<ContinuationStep> trace;
  std::string reason;
};

/// Homotopy continuation from a waist at lambda = 0 to lambda_target.
ContinuationResult continue_waist(const MagneticSurface& surface, const Waist& waist, double lambda_target,
                                  const ContinuationOptions& options = {});

/// Continues in increments of `step` up to lambda_max and reports the largest
/// lambda reached before the waist is lost.
ContinuationResult continuation_threshold(const MagneticSurface& surface, const Waist& waist, double step,
                                          double lambda_max, const ContinuationOptions& options = {});

/// Sup norm of the magnetic primitive over the loop points.
double primitive_sup(const DiscreteLoop& loop, const MagneticSurface& surface);

/// Sasaki distance between the waist's initial state (central-difference
/// tangent at points[0]) and its image after flowing for the waist length.
double reintegrated_closure(const Waist& waist, const MagneticSurface& surface, const FlowOptions& flow = {});

}  // namespace magzoll
