#include "semcom/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "semcom/errors.hpp"

namespace semcom {

double mse(const FeatureTensor& recovered, const FeatureTensor& reference) {
    if (!recovered.same_shape(reference))
        throw data_error("mse: shape mismatch");
    if (recovered.values.empty()) throw data_error("mse: empty tensors");
    double acc = 0.0;
    for (std::size_t n = 0; n < recovered.values.size(); ++n) {
        const double d = recovered.values[n] - reference.values[n];
        acc += d * d;
    }
    return acc / static_cast<double>(recovered.values.size());
}

double psnr(const FeatureTensor& recovered, const FeatureTensor& reference) {
    const double err = mse(recovered, reference);
    if (err == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / err);
}

std::string format_metric(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

}  // namespace semcom
