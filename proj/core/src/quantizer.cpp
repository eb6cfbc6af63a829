#include "semcom/quantizer.hpp"

#include <cmath>

#include "semcom/errors.hpp"

namespace semcom {

QuantizationCodebook make_codebook(double u_min, double u_max, int bits) {
    if (!(u_min < u_max))
        throw config_error("make_codebook: u_min must be strictly below u_max");
    if (!std::isfinite(u_min) || !std::isfinite(u_max))
        throw config_error("make_codebook: range must be finite");
    if (bits < 1 || bits > 16)
        throw config_error("make_codebook: bits must be in [1, 16]");
    QuantizationCodebook cb;
    cb.bits = bits;
    cb.u_min = u_min;
    cb.u_max = u_max;
    cb.delta = (u_max - u_min) / ((1 << bits) - 1);
    return cb;
}

std::pair<FeatureTensor, IndexTensor> quantize(const FeatureTensor& y,
                                               const QuantizationCodebook& cb) {
    FeatureTensor out(y.width, y.height, y.channels);
    IndexTensor codes(y.width, y.height, y.channels);
    const int top = cb.num_levels() - 1;
    for (std::size_t n = 0; n < y.values.size(); ++n) {
        const double v = y.values[n];
        if (std::isnan(v)) throw data_error("quantize: NaN feature value");
        // (v - u_min)/delta + 1/2 lands in [k, k+1) exactly when v lies in
        // the half-open cell of level k; floor keeps the lower edge closed.
        double k = std::floor((v - cb.u_min) / cb.delta + 0.5);
        if (k < 0) k = 0;
        if (k > top) k = top;
        const int code = static_cast<int>(k);
        codes.codes[n] = static_cast<std::uint16_t>(code);
        out.values[n] = cb.level(code);
    }
    return {std::move(out), std::move(codes)};
}

FeatureTensor dequantize(const IndexTensor& codes, const QuantizationCodebook& cb) {
    FeatureTensor out(codes.width, codes.height, codes.channels);
    const int n_levels = cb.num_levels();
    for (std::size_t n = 0; n < codes.codes.size(); ++n) {
        const int code = codes.codes[n];
        if (code >= n_levels)
            throw data_error("dequantize: code out of range for codebook");
        out.values[n] = cb.level(code);
    }
    return out;
}

}  // namespace semcom
