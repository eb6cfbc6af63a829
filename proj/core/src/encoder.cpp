#include "semcom/encoder.hpp"

#include <cmath>

#include "semcom/errors.hpp"
#include "semcom/rng.hpp"

namespace semcom {

void validate(const GaussianSourceSpec& spec) {
    if (spec.width <= 0 || spec.height <= 0 || spec.channels <= 0)
        throw config_error("gaussian_source: dims must be positive");
    if (spec.variance.has_value() == spec.rho_corr.has_value())
        throw config_error(
            "gaussian_source: exactly one of variance / rho_corr must be set");
    if (spec.variance && *spec.variance < 0.0)
        throw config_error("gaussian_source: variance must be nonnegative");
    if (spec.rho_corr && !(std::abs(*spec.rho_corr) < 1.0))
        throw config_error("gaussian_source: |rho_corr| must be below 1");
}

namespace {

FeatureTensor encode_identity(const IdentityBlockSpec& spec,
                              const FeatureTensor& image) {
    const int b = spec.block;
    if (b < 1) throw config_error("identity_block: block size must be >= 1");
    image.validate("encode");
    if (image.channels != 3)
        throw config_error("identity_block: expects a 3-channel image");
    if (image.width % b != 0 || image.height % b != 0)
        throw config_error("identity_block: image dims not divisible by block");
    FeatureTensor feat(image.width / b, image.height / b, 3 * b * b);
    for (int i = 0; i < feat.width; ++i)
        for (int j = 0; j < feat.height; ++j)
            for (int a = 0; a < b; ++a)
                for (int d = 0; d < b; ++d)
                    for (int ch = 0; ch < 3; ++ch)
                        feat.at(i, j, (a * b + d) * 3 + ch) =
                            image.at(i * b + a, j * b + d, ch);
    return feat;
}

FeatureTensor decode_identity(const IdentityBlockSpec& spec,
                              const FeatureTensor& feat) {
    const int b = spec.block;
    if (feat.channels != 3 * b * b)
        throw config_error("identity_block: feature channels do not match block");
    FeatureTensor image(feat.width * b, feat.height * b, 3);
    for (int i = 0; i < feat.width; ++i)
        for (int j = 0; j < feat.height; ++j)
            for (int a = 0; a < b; ++a)
                for (int d = 0; d < b; ++d)
                    for (int ch = 0; ch < 3; ++ch)
                        image.at(i * b + a, j * b + d, ch) =
                            feat.at(i, j, (a * b + d) * 3 + ch);
    return image;
}

// Exact AR(1) sample: causal filter x_k = rho*x_{k-1} + sqrt(1-rho^2)*z_k
// applied along i then along j realizes the Kronecker covariance
// A_w (x) A_h with unit marginal variance.
FeatureTensor sample_gaussian(const GaussianSourceSpec& spec, std::uint64_t seed) {
    validate(spec);
    Rng rng(seed);
    FeatureTensor y(spec.width, spec.height, spec.channels);
    if (spec.variance) {
        const double s = std::sqrt(*spec.variance);
        for (double& v : y.values) v = spec.mean + s * rng.normal();
        return y;
    }
    const double rho = *spec.rho_corr;
    const double s = std::sqrt(1.0 - rho * rho);
    for (int c = 0; c < spec.channels; ++c) {
        for (int i = 0; i < spec.width; ++i)
            for (int j = 0; j < spec.height; ++j)
                y.at(i, j, c) = rng.normal();
        for (int j = 0; j < spec.height; ++j)
            for (int i = 1; i < spec.width; ++i)
                y.at(i, j, c) = rho * y.at(i - 1, j, c) + s * y.at(i, j, c);
        for (int i = 0; i < spec.width; ++i)
            for (int j = 1; j < spec.height; ++j)
                y.at(i, j, c) = rho * y.at(i, j - 1, c) + s * y.at(i, j, c);
        for (int i = 0; i < spec.width; ++i)
            for (int j = 0; j < spec.height; ++j)
                y.at(i, j, c) += spec.mean;
    }
    return y;
}

}  // namespace

FeatureTensor encode(const EncoderSpec& spec, const FeatureTensor& image,
                     std::uint64_t seed) {
    if (const auto* id = std::get_if<IdentityBlockSpec>(&spec))
        return encode_identity(*id, image);
    return sample_gaussian(std::get<GaussianSourceSpec>(spec), seed);
}

FeatureTensor decode(const EncoderSpec& spec, const FeatureTensor& feature) {
    if (const auto* id = std::get_if<IdentityBlockSpec>(&spec))
        return decode_identity(*id, feature);
    return feature;
}

void feature_dims(const EncoderSpec& spec, int image_w, int image_h,
                  int& w, int& h, int& c) {
    if (const auto* id = std::get_if<IdentityBlockSpec>(&spec)) {
        if (id->block < 1 || image_w % id->block || image_h % id->block)
            throw config_error("identity_block: image dims not divisible by block");
        w = image_w / id->block;
        h = image_h / id->block;
        c = 3 * id->block * id->block;
        return;
    }
    const auto& g = std::get<GaussianSourceSpec>(spec);
    w = g.width;
    h = g.height;
    c = g.channels;
}

FeatureTensor zero_image_fill(const EncoderSpec& spec, int w, int h, int c) {
    if (std::holds_alternative<IdentityBlockSpec>(spec))
        return FeatureTensor::zeros(w, h, c);
    return FeatureTensor::constant(w, h, c, std::get<GaussianSourceSpec>(spec).mean);
}

}  // namespace semcom
