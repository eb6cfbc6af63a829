#ifndef SEMCOM_METRICS_HPP
#define SEMCOM_METRICS_HPP

#include <string>

#include "semcom/tensor.hpp"

namespace semcom {

/// Mean squared error over every entry (3WH for images).
double mse(const FeatureTensor& recovered, const FeatureTensor& reference);

/// PSNR in dB on the 0..255 pixel scale: 10 log10(255^2 / MSE). Identical
/// inputs give +infinity.
double psnr(const FeatureTensor& recovered, const FeatureTensor& reference);

/// Formats a double with 9 significant digits; infinities print as "inf".
std::string format_metric(double value);

}  // namespace semcom

#endif
