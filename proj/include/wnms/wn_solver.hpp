#pragma once

#include <cstdint>
#include <stdexcept>

#include "wnms/model.hpp"
#include "wnms/sensing.hpp"
#include "wnms/trace.hpp"

namespace wnms {

enum class RetractionKind { Polar, QR, Cayley };

// Iterate of the weight-normalized solver: direction X on St(m, r) and
// symmetric magnitude Theta.
struct WnState {
  Matrix X;
  Matrix Theta;
  long t = 0;
};

struct SolverConfig {
  double eta = 0.1;  // X stepsize
  double mu = 2.0;   // Theta stepsize
  long T = 0;        // iteration budget
  RetractionKind retraction = RetractionKind::Polar;
  double theta_init_scale = 1.0;  // Theta_0 = scale * I_r
  std::uint64_t rng_seed = 0;
  long trace_stride = 1;
  double stop_sq_error = -1.0;  // optional early stop on squared recon error; < 0 disables
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(long iteration, double value);
  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

// Euclidean gradient in X: [M*M(X Theta X^T - A)] X Theta, computed as
// M*(M(X Theta X^T) - y) X Theta so it is also defined under noisy labels.
Matrix euclidean_grad_X(const WnState& state, const MeasurementEnsemble& ens,
                        const Observations& obs);

// Projection onto the tangent space at X:
// G = (I - X X^T) Gt + (X/2)(X^T Gt - Gt^T X).
Matrix riemannian_grad_X(const WnState& state, const Matrix& gtilde);

// Move from X along -eta G and map back onto the manifold.
Matrix retract(const Matrix& x, const Matrix& g, double eta, RetractionKind kind);

// Euclidean gradient in Theta at (x_next, theta):
// K = (1/2) X^T [M*(M(X Theta X^T) - y)] X.
Matrix grad_Theta(const Matrix& x_next, const Matrix& theta, const MeasurementEnsemble& ens,
                  const Observations& obs);

// One iteration: Riemannian step in X, then gradient step in Theta evaluated
// at the fresh X.
WnState step(const WnState& state, const MeasurementEnsemble& ens, const Observations& obs,
             const SolverConfig& config);

// X_0 uniform on St(m, r), Theta_0 = theta_init_scale * I_r (|scale| <= 2).
WnState init_random(Index m, Index r, double theta_init_scale, std::uint64_t seed);

// Full solver loop; one trace row per trace_stride iterations plus the final
// state. Aborts with DivergenceError when the objective blows up.
Trace run(const WnState& init, const MeasurementEnsemble& ens, const Observations& obs,
          const SolverConfig& config, const GroundTruth* truth = nullptr);

// Stepsize from the convergence analysis, (r - r_A)^4 / (kappa^2 m^2 r^2 r_A).
// Far smaller than what works in practice; provided for reference only.
double theoretical_eta(Index m, Index r, Index r_A, double kappa);

}  // namespace wnms
