#pragma once

#include <cstdint>

#include "wnms/model.hpp"
#include "wnms/sensing.hpp"
#include "wnms/trace.hpp"

namespace wnms {

// Plain factored gradient descent on (1/4) |M(Y Y^T) - y|^2.
struct GdState {
  Matrix Y;
  long t = 0;
};

struct GdConfig {
  Index r = 0;              // factor rank of Y
  double eta = 0.1;
  long T = 0;
  double init_scale = 0.1;  // Y_0 = init_scale * Z_0, Z_0 i.i.d. N(0,1)
  std::uint64_t rng_seed = 0;
  long trace_stride = 1;
  double stop_sq_error = -1.0;
};

// M*(M(Y Y^T) - y) Y, or (Y Y^T - A) Y in Population mode.
Matrix gd_grad(const GdState& state, const MeasurementEnsemble& ens, const Observations& obs);

// Gradient-descent loop with the same trace format and divergence guard as
// the weight-normalized solver. GD rows carry no Theta or alignment columns.
Trace gd_run(const GdConfig& config, const MeasurementEnsemble& ens, const Observations& obs,
             const GroundTruth* truth = nullptr);

}  // namespace wnms
