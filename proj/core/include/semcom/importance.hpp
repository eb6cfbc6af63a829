#ifndef SEMCOM_IMPORTANCE_HPP
#define SEMCOM_IMPORTANCE_HPP

#include <span>
#include <string>
#include <vector>

#include "semcom/packetizer.hpp"
#include "semcom/tensor.hpp"

namespace semcom {

/// Plain 2-D grid, row-major (i outer).
struct Map2D {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    Map2D() = default;
    Map2D(int w, int h) : width(w), height(h),
                          values(static_cast<std::size_t>(w) * h, 0.0) {}

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * height + j]; }
    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * height + j]; }
};

/// Backbone feature maps f (W_f x H_f x C_f) with the classifier weight
/// matrix u, one row of C_f weights per class.
struct BackboneFeatures {
    FeatureTensor f;
    std::vector<std::vector<double>> class_weights;

    int num_classes() const { return static_cast<int>(class_weights.size()); }
    void validate() const;
};

/// Spatial importance in [0, 1] at feature resolution, plus the class that
/// produced it.
struct ImportanceMap {
    Map2D map;
    int class_index = -1;
};

/// Numerically stable softmax (max-subtracted).
std::vector<double> class_probs(std::span<const double> scores);

/// Class activation map: I^k = sum_c u_c^k * f_c.
Map2D cam(const BackboneFeatures& features, int class_index);

/// Class scores S_k = sum_c u_c^k sum_ij f_ijc; argmax of the softmax, ties
/// broken by the lowest index.
int select_class(const BackboneFeatures& features);

/// Min-max normalization to [0, 1] (constant maps become all ones), then
/// nearest-neighbor upsampling to the target grid.
ImportanceMap normalize_and_upsample(const Map2D& raw, int target_w, int target_h,
                                     int class_index = -1);

/// Per-packet weights: mean of the importance map over each patch, flattened
/// in packet transmission order.
std::vector<double> patch_importance(const ImportanceMap& importance,
                                     const PacketLayout& layout);

/// Synthetic importance source: anisotropic Gaussian blob with center
/// (cx, cy) in [0, 1]^2 grid fractions, axis sigmas in grid fractions, and a
/// rotation in radians. Peak value 1 at the center.
Map2D gaussian_blob(int width, int height, double cx, double cy, double sigma_x,
                    double sigma_y, double angle_rad);

/// Class-weight CSV: one row per class, C_f comma-separated values.
std::vector<std::vector<double>> read_class_weights_csv(const std::string& path);

}  // namespace semcom

#endif
