#ifndef SEMCOM_ENCODER_HPP
#define SEMCOM_ENCODER_HPP

#include <cstdint>
#include <optional>
#include <variant>

#include "semcom/tensor.hpp"

namespace semcom {

/// Lossless space-to-depth reshape: a W x H x 3 image becomes a
/// (W/block) x (H/block) x (3*block^2) feature tensor.
struct IdentityBlockSpec {
    int block = 1;
};

/// Synthetic feature source y ~ N(mean, Sigma). Covariance is either
/// diagonal (variance, broadcast scalar) or a separable AR(1) grid
/// correlation with unit marginal variance: cov(y_ij, y_i'j') =
/// rho^|i-i'| * rho^|j-j'| per channel, channels independent.
struct GaussianSourceSpec {
    int width = 0;
    int height = 0;
    int channels = 0;
    double mean = 0.0;
    std::optional<double> variance;   // diagonal covariance
    std::optional<double> rho_corr;   // AR(1) correlation, |rho| < 1
};

using EncoderSpec = std::variant<IdentityBlockSpec, GaussianSourceSpec>;

/// Feature extraction. For identity_block the image dims must be divisible
/// by the block size; for gaussian_source the image argument is unused and
/// a fresh sample is drawn from the seed.
FeatureTensor encode(const EncoderSpec& spec, const FeatureTensor& image,
                     std::uint64_t seed);

/// Inverse of encode: exact reshape for identity_block, identity for
/// gaussian_source.
FeatureTensor decode(const EncoderSpec& spec, const FeatureTensor& feature);

/// Feature dims produced by the spec (identity_block needs the image dims).
void feature_dims(const EncoderSpec& spec, int image_w, int image_h,
                  int& w, int& h, int& c);

/// Encoder output for the all-zero image: the constant fill used for erased
/// positions. Zero tensor for identity_block, the mean for gaussian_source.
FeatureTensor zero_image_fill(const EncoderSpec& spec, int w, int h, int c);

void validate(const GaussianSourceSpec& spec);

}  // namespace semcom

#endif
