#ifndef SEMCOM_QUANTIZER_HPP
#define SEMCOM_QUANTIZER_HPP

#include <utility>

#include "semcom/tensor.hpp"

namespace semcom {

/// Uniform scalar quantization codebook: 2^bits levels equally spaced by
/// delta = (u_max - u_min) / (2^bits - 1), endpoints included exactly.
struct QuantizationCodebook {
    int bits = 0;
    double u_min = 0.0;
    double u_max = 0.0;
    double delta = 0.0;

    int num_levels() const { return 1 << bits; }

    /// k is a 0-based code in [0, 2^bits). Endpoint-exact interpolation so
    /// that level(0) == u_min and level(2^bits - 1) == u_max.
    double level(int k) const {
        const int n = num_levels() - 1;
        return (u_min * (n - k) + u_max * k) / n;
    }
};

/// Builds a codebook; requires u_min < u_max and 1 <= bits <= 16.
QuantizationCodebook make_codebook(double u_min, double u_max, int bits);

/// Element-wise quantization: each value maps to the level whose half-open
/// cell [u_k - delta/2, u_k + delta/2) contains it; out-of-range values
/// clamp to the boundary levels. Returns the quantized tensor and the code
/// tensor. NaN input raises data_error.
std::pair<FeatureTensor, IndexTensor> quantize(const FeatureTensor& y,
                                               const QuantizationCodebook& cb);

/// Element-wise level lookup. Codes at or beyond 2^bits raise data_error.
FeatureTensor dequantize(const IndexTensor& codes, const QuantizationCodebook& cb);

}  // namespace semcom

#endif
