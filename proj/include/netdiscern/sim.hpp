#pragma once

// Output-trajectory simulation and witness validation.
//
// Trajectories of x' = Phi x are sampled on a uniform grid by computing the
// one-step propagator E = exp(Phi dt) once and marching x_(s+1) = E x_s; the
// semigroup property makes this exact up to rounding, with no ODE stepper
// error to budget for.

#include <algorithm>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "netdiscern/model.hpp"
#include "netdiscern/numlin.hpp"

namespace netdiscern {

inline constexpr double kDefaultHorizon = 5.0;
inline constexpr int kDefaultSamples = 201;
inline constexpr double kDefaultSimThreshold = 1e-6;

struct Trajectory {
  Eigen::VectorXd t_grid;   // uniform, t_grid(0) = 0
  Eigen::MatrixXd outputs;  // one column per sample: Psi x(t)
};

inline Trajectory simulate_outputs(const Eigen::MatrixXd& phi,
                                   const Eigen::MatrixXd& psi,
                                   const Eigen::VectorXd& x0, double t_final,
                                   int samples) {
  if (phi.rows() != phi.cols())
    throw std::invalid_argument("simulate_outputs: Phi must be square");
  if (psi.cols() != phi.rows())
    throw std::invalid_argument("simulate_outputs: Psi width mismatch");
  if (x0.size() != phi.rows())
    throw std::invalid_argument("simulate_outputs: initial state size mismatch");
  if (!(t_final > 0.0))
    throw std::invalid_argument("simulate_outputs: horizon must be positive");
  if (samples < 2)
    throw std::invalid_argument("simulate_outputs: need at least two samples");

  const double dt = t_final / (samples - 1);
  const Eigen::MatrixXd step = expm(phi, dt);

  Trajectory out;
  out.t_grid.resize(samples);
  out.outputs.resize(psi.rows(), samples);
  Eigen::VectorXd x = x0;
  for (int s = 0; s < samples; ++s) {
    out.t_grid(s) = s * dt;
    out.outputs.col(s) = psi * x;
    if (s + 1 < samples) x = step * x;
  }
  if (!out.outputs.allFinite())
    throw std::range_error("simulate_outputs: trajectory overflowed");
  return out;
}

struct TrajectoryComparison {
  Eigen::VectorXd t_grid;
  Eigen::MatrixXd outputs_original;
  Eigen::MatrixXd outputs_modified;
  double max_abs_dev = 0.0;
  // Deviation relative to the signal level of the experiment: the larger of
  // the output magnitude actually seen and the magnitude the sensors would
  // read from states of the size reached.  The second term matters when the
  // outputs vanish identically: the trajectories then read back their own
  // rounding noise, and dividing by that noise would condemn every exact
  // witness.
  double max_rel_dev = 0.0;
};

inline TrajectoryComparison compare_pair(const AssembledPair& pair,
                                         const Eigen::VectorXd& x0,
                                         const Eigen::VectorXd& x0_bar,
                                         double t_final = kDefaultHorizon,
                                         int samples = kDefaultSamples) {
  Trajectory orig = simulate_outputs(pair.Phi, pair.Psi, x0, t_final, samples);
  Trajectory mod =
      simulate_outputs(pair.Phi_bar, pair.Psi, x0_bar, t_final, samples);
  const Eigen::MatrixXd eye =
      Eigen::MatrixXd::Identity(pair.Phi.rows(), pair.Phi.cols());
  const double state_scale = std::max(
      simulate_outputs(pair.Phi, eye, x0, t_final, samples)
          .outputs.cwiseAbs()
          .maxCoeff(),
      simulate_outputs(pair.Phi_bar, eye, x0_bar, t_final, samples)
          .outputs.cwiseAbs()
          .maxCoeff());
  // |output entry| <= (max absolute row sum of Psi) * |state entry|.
  const double psi_gain = pair.Psi.cwiseAbs().rowwise().sum().maxCoeff();

  TrajectoryComparison out;
  out.t_grid = std::move(orig.t_grid);
  out.outputs_original = std::move(orig.outputs);
  out.outputs_modified = std::move(mod.outputs);
  out.max_abs_dev =
      (out.outputs_original - out.outputs_modified).cwiseAbs().maxCoeff();
  const double scale =
      std::max({out.outputs_original.cwiseAbs().maxCoeff(),
                out.outputs_modified.cwiseAbs().maxCoeff(),
                psi_gain * state_scale});
  out.max_rel_dev = out.max_abs_dev / std::max(scale, 1.0e-300);
  if (scale == 0.0) out.max_rel_dev = 0.0;
  return out;
}

// A pair of initial states claimed to produce identical outputs under the
// two topologies.
struct WitnessPair {
  Eigen::VectorXd X0;
  Eigen::VectorXd X0_bar;
  double residual = std::numeric_limits<double>::quiet_NaN();
  bool validated = false;
};

namespace detail {

// Width of the combined spectrum along the real axis.  It bounds how fast a
// rounding-level component of an initial vector can outgrow the vector's own
// mode: a contamination seeded at machine epsilon gains at most e^(spread t).
inline double spectral_spread(const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b) {
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (const Eigen::MatrixXd* m : {&a, &b}) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(*m, false);
    if (es.info() != Eigen::Success) return 0.0;  // no cap, full horizon
    hi = std::max(hi, es.eigenvalues().real().maxCoeff());
    lo = std::min(lo, es.eigenvalues().real().minCoeff());
  }
  return hi - lo;
}

}  // namespace detail

inline bool validate_witness(const AssembledPair& pair, WitnessPair& witness,
                             double t_final = kDefaultHorizon,
                             int samples = kDefaultSamples,
                             double threshold = kDefaultSimThreshold) {
  // Any stored vector carries ~epsilon of every mode, and a component seeded
  // at epsilon can outgrow the witness mode like e^(spread t).  Past the
  // horizon where that amplification could reach 1% of the threshold, a
  // failed comparison says nothing about the pair, so the run is clipped
  // there.  Outputs are analytic in t, so agreement on the shorter interval
  // is still equivalent to agreement for all time.
  double horizon = t_final;
  const double spread = detail::spectral_spread(pair.Phi, pair.Phi_bar);
  if (spread > 0.0) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double budget = std::log(0.01 * threshold / eps);
    const double floor = t_final * 1e-3;
    if (budget <= 0.0)
      horizon = floor;
    else if (budget / spread < horizon)
      horizon = std::max(budget / spread, floor);
  }
  TrajectoryComparison cmp =
      compare_pair(pair, witness.X0, witness.X0_bar, horizon, samples);
  witness.residual = cmp.max_rel_dev;
  witness.validated = (cmp.max_rel_dev <= threshold);
  return witness.validated;
}

}  // namespace netdiscern
