#pragma once

#include <limits>
#include <vector>

#include "wnms/matcore.hpp"

namespace wnms {

// One per-iteration diagnostics row. Scalars that do not apply to a run
// (Theta quantities for plain GD, alignment quantities when no ground truth
// was supplied) stay NaN and their vector counterparts stay empty; the CSV
// writer drops those columns. The full factors are stored on the final row
// only, so the ending state can be recovered from a trace.
struct TraceRecord {
  static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

  long t = 0;
  double recon_error = kUnset;     // |X Theta X^T - A|_F  (|Y Y^T - A|_F for GD)
  double sq_recon_error = kUnset;
  double objective = kUnset;
  double grad_norm_X = kUnset;
  double grad_norm_Theta = kUnset;
  double trace_phi = kUnset;       // Tr(Phi Phi^T)
  double align_error = kUnset;     // Tr(I - Phi Phi^T)
  double trace_psi = kUnset;       // Tr(Psi Psi^T)
  Vector phi_singulars;            // sigma_i(Phi Phi^T), i = 1..r_A
  Vector theta_singulars;          // sigma_i(Theta), i = 1..r
  Vector saddle_dists;             // |X Theta X^T - A_rho|_F^2, rho = 0..r_A-1
  Matrix X;                        // final row only
  Matrix Theta;                    // final row only (Y for GD)
};

using Trace = std::vector<TraceRecord>;

}  // namespace wnms
