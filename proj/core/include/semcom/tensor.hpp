#ifndef SEMCOM_TENSOR_HPP
#define SEMCOM_TENSOR_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace semcom {

/// One (i, j, c) coordinate of a feature tensor.
struct Position {
    int i = 0;
    int j = 0;
    int c = 0;

    friend bool operator==(const Position&, const Position&) = default;
    friend auto operator<=>(const Position&, const Position&) = default;
};

/// Dense real tensor of shape width x height x channels, stored row-major
/// with i outermost and the channel innermost. Images are tensors with
/// channels == 3 and pixel values on the 0..255 scale.
struct FeatureTensor {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> values;

    FeatureTensor() = default;
    FeatureTensor(int w, int h, int c);

    static FeatureTensor zeros(int w, int h, int c) { return {w, h, c}; }
    static FeatureTensor constant(int w, int h, int c, double value);

    std::size_t size() const { return values.size(); }

    std::size_t flat(int i, int j, int c) const {
        return (static_cast<std::size_t>(i) * height + j) * channels + c;
    }

    double at(int i, int j, int c) const { return values[flat(i, j, c)]; }
    double& at(int i, int j, int c) { return values[flat(i, j, c)]; }

    bool same_shape(const FeatureTensor& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }

    bool all_finite() const;

    /// Throws config_error on non-positive dims, data_error on NaN/Inf.
    void validate(const char* what) const;
};

/// Quantizer level codes, same layout as FeatureTensor. Codes are 0-based:
/// code k selects the (k+1)-th codebook level.
struct IndexTensor {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint16_t> codes;

    IndexTensor() = default;
    IndexTensor(int w, int h, int c);

    std::size_t size() const { return codes.size(); }

    std::size_t flat(int i, int j, int c) const {
        return (static_cast<std::size_t>(i) * height + j) * channels + c;
    }

    std::uint16_t at(int i, int j, int c) const { return codes[flat(i, j, c)]; }
    std::uint16_t& at(int i, int j, int c) { return codes[flat(i, j, c)]; }
};

/// Binary tensor file: three little-endian uint32 dims (width, height,
/// channels) followed by the values as little-endian 64-bit floats in
/// storage order.
void write_tensor(const std::string& path, const FeatureTensor& t);
FeatureTensor read_tensor(const std::string& path);

}  // namespace semcom

#endif
