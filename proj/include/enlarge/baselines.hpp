#pragma once

#include "enlarge/enlarged_density.hpp"
#include "enlarge/reg_types.hpp"

namespace enlarge {

enum class BaselineMethod { L2, L1, Huber, LTS, GemMc };

struct BaselineKind {
  BaselineMethod kind = BaselineMethod::L2;
  double huber_k = 1.345;    // Huber only
  double trim_ratio = 0.0;   // LTS only, in [0, 0.5]
};

/// Reference regression estimators: exact least squares, L1 via smoothed
/// IRLS, Huber with MAD scale, FAST-LTS style trimming with C-steps, and
/// Geman-McClure IRLS.  sigma is set from the method's own residual scale.
RegParams fit_baseline(const RegData& data, const BaselineKind& spec,
                       const FitOptions& opts);

/// Root mean squared prediction error on a test set.
double rmse(const RegParams& params, const RegData& test);

}  // namespace enlarge
