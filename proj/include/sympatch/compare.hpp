#pragma once

#include "sympatch/harmonic.hpp"
#include "sympatch/transient.hpp"

namespace sympatch {

/// Errors of `test` against `ref`, with `test` interpolated linearly onto the abscissae of
/// `ref` that fall inside its own range. Linf is the largest component error over the peak
/// magnitude of `ref`; L2 is the Euclidean norm of the error over that of `ref`.
struct CompareMetrics {
  double l2_rel = 0.0;
  double linf_rel_peak = 0.0;
  double peak = 0.0;
  int samples = 0;
};

/// Both inputs need strictly increasing abscissae. Throws DomainError when the ranges are disjoint.
CompareMetrics compare_lines(const ProbeLine& ref, const ProbeLine& test);
CompareMetrics compare_series(const ProbeSeries& ref, const ProbeSeries& test);

}  // namespace sympatch
