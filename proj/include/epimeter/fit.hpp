#pragma once
#include <vector>

#include "epimeter/scalinglaw.hpp"

namespace epimeter {

// Fit L(N, D) = E + (N0/N)^alpha + (D0/D)^beta to observed (params, tokens, loss)
// samples by Levenberg-Marquardt on log-loss residuals, multi-start for robustness.
// Throws invalid_argument on malformed input, NumericError on a degenerate fit.
ScalingLawParams fit_scaling_law(const std::vector<LossSample>& samples);

}  // namespace epimeter
