#include "semcom/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "semcom/errors.hpp"

namespace semcom {

static_assert(std::endian::native == std::endian::little,
              "tensor file I/O assumes a little-endian host");

FeatureTensor::FeatureTensor(int w, int h, int c)
    : width(w), height(h), channels(c),
      values(static_cast<std::size_t>(w) * h * c, 0.0) {}

FeatureTensor FeatureTensor::constant(int w, int h, int c, double value) {
    FeatureTensor t(w, h, c);
    std::fill(t.values.begin(), t.values.end(), value);
    return t;
}

bool FeatureTensor::all_finite() const {
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void FeatureTensor::validate(const char* what) const {
    if (width <= 0 || height <= 0 || channels <= 0)
        throw config_error(std::string(what) + ": tensor dims must be positive");
    if (values.size() != static_cast<std::size_t>(width) * height * channels)
        throw config_error(std::string(what) + ": value count does not match shape");
    if (!all_finite())
        throw data_error(std::string(what) + ": tensor contains NaN or Inf");
}

IndexTensor::IndexTensor(int w, int h, int c)
    : width(w), height(h), channels(c),
      codes(static_cast<std::size_t>(w) * h * c, 0) {}

void write_tensor(const std::string& path, const FeatureTensor& t) {
    t.validate("write_tensor");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("write_tensor: cannot open " + path);
    const std::uint32_t dims[3] = {static_cast<std::uint32_t>(t.width),
                                   static_cast<std::uint32_t>(t.height),
                                   static_cast<std::uint32_t>(t.channels)};
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.write(reinterpret_cast<const char*>(t.values.data()),
              static_cast<std::streamsize>(t.values.size() * sizeof(double)));
    if (!out) throw data_error("write_tensor: short write to " + path);
}

FeatureTensor read_tensor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("read_tensor: cannot open " + path);
    std::uint32_t dims[3];
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (!in) throw data_error("read_tensor: truncated header in " + path);
    if (dims[0] == 0 || dims[1] == 0 || dims[2] == 0)
        throw data_error("read_tensor: zero dimension in " + path);
    // 256M-element cap guards against garbage headers.
    const std::uint64_t count =
        std::uint64_t(dims[0]) * dims[1] * dims[2];
    if (count > (std::uint64_t(1) << 28))
        throw data_error("read_tensor: implausible tensor size in " + path);
    FeatureTensor t(static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                    static_cast<int>(dims[2]));
    in.read(reinterpret_cast<char*>(t.values.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw data_error("read_tensor: truncated values in " + path);
    t.validate("read_tensor");
    return t;
}

}  // namespace semcom
