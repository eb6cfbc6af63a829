#include "semcom/importance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "semcom/errors.hpp"

namespace semcom {

void BackboneFeatures::validate() const {
    f.validate("BackboneFeatures");
    if (class_weights.empty())
        throw config_error("BackboneFeatures: need at least one class");
    for (const auto& row : class_weights)
        if (static_cast<int>(row.size()) != f.channels)
            throw config_error("BackboneFeatures: weight row length must equal C_f");
}

std::vector<double> class_probs(std::span<const double> scores) {
    if (scores.empty()) throw config_error("class_probs: empty score vector");
    double top = scores[0];
    for (double s : scores) {
        if (!std::isfinite(s)) throw data_error("class_probs: non-finite score");
        top = std::max(top, s);
    }
    std::vector<double> probs(scores.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < scores.size(); ++k) {
        probs[k] = std::exp(scores[k] - top);
        sum += probs[k];
    }
    for (double& p : probs) p /= sum;
    return probs;
}

Map2D cam(const BackboneFeatures& features, int class_index) {
    features.validate();
    if (class_index < 0 || class_index >= features.num_classes())
        throw config_error("cam: class index out of range");
    const auto& u = features.class_weights[class_index];
    Map2D out(features.f.width, features.f.height);
    for (int i = 0; i < features.f.width; ++i)
        for (int j = 0; j < features.f.height; ++j) {
            double acc = 0.0;
            for (int c = 0; c < features.f.channels; ++c)
                acc += u[c] * features.f.at(i, j, c);
            out.at(i, j) = acc;
        }
    return out;
}

int select_class(const BackboneFeatures& features) {
    features.validate();
    std::vector<double> channel_sum(features.f.channels, 0.0);
    for (int i = 0; i < features.f.width; ++i)
        for (int j = 0; j < features.f.height; ++j)
            for (int c = 0; c < features.f.channels; ++c)
                channel_sum[c] += features.f.at(i, j, c);
    std::vector<double> scores(features.num_classes(), 0.0);
    for (int k = 0; k < features.num_classes(); ++k)
        for (int c = 0; c < features.f.channels; ++c)
            scores[k] += features.class_weights[k][c] * channel_sum[c];
    const auto probs = class_probs(scores);
    int best = 0;
    for (int k = 1; k < static_cast<int>(probs.size()); ++k)
        if (probs[k] > probs[best]) best = k;
    return best;
}

ImportanceMap normalize_and_upsample(const Map2D& raw, int target_w, int target_h,
                                     int class_index) {
    if (raw.width <= 0 || raw.height <= 0)
        throw config_error("normalize_and_upsample: empty source map");
    if (target_w < raw.width || target_h < raw.height)
        throw config_error("normalize_and_upsample: target dims below source dims");
    double lo = raw.values[0], hi = raw.values[0];
    for (double v : raw.values) {
        if (!std::isfinite(v))
            throw data_error("normalize_and_upsample: non-finite map value");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi - lo;
    Map2D norm(raw.width, raw.height);
    for (std::size_t n = 0; n < raw.values.size(); ++n)
        // A constant map carries no ranking signal; degrade to uniform
        // (equal-protection) importance rather than all-zero.
        norm.values[n] = span > 0.0 ? (raw.values[n] - lo) / span : 1.0;

    ImportanceMap out;
    out.class_index = class_index;
    out.map = Map2D(target_w, target_h);
    for (int i = 0; i < target_w; ++i) {
        const int si = static_cast<int>((static_cast<long long>(i) * raw.width) / target_w);
        for (int j = 0; j < target_h; ++j) {
            const int sj =
                static_cast<int>((static_cast<long long>(j) * raw.height) / target_h);
            out.map.at(i, j) = norm.at(si, sj);
        }
    }
    return out;
}

std::vector<double> patch_importance(const ImportanceMap& importance,
                                     const PacketLayout& layout) {
    layout.validate();
    if (importance.map.width != layout.feat_w ||
        importance.map.height != layout.feat_h)
        throw config_error("patch_importance: map dims do not match layout");
    std::vector<double> weights(layout.num_packets(), 0.0);
    const double inv_area = 1.0 / (layout.patch_w * layout.patch_h);
    for (int pi = 0; pi < layout.patches_x(); ++pi)
        for (int pj = 0; pj < layout.patches_y(); ++pj) {
            double acc = 0.0;
            for (int a = 0; a < layout.patch_w; ++a)
                for (int d = 0; d < layout.patch_h; ++d)
                    acc += importance.map.at(pi * layout.patch_w + a,
                                             pj * layout.patch_h + d);
            weights[layout.packet_index(pi, pj)] = acc * inv_area;
        }
    return weights;
}

Map2D gaussian_blob(int width, int height, double cx, double cy, double sigma_x,
                    double sigma_y, double angle_rad) {
    if (width <= 0 || height <= 0)
        throw config_error("gaussian_blob: dims must be positive");
    if (!(sigma_x > 0.0) || !(sigma_y > 0.0))
        throw config_error("gaussian_blob: sigmas must be positive");
    Map2D out(width, height);
    const double ca = std::cos(angle_rad), sa = std::sin(angle_rad);
    for (int i = 0; i < width; ++i)
        for (int j = 0; j < height; ++j) {
            const double dx = (i + 0.5) / width - cx;
            const double dy = (j + 0.5) / height - cy;
            const double ax = (ca * dx + sa * dy) / sigma_x;
            const double ay = (-sa * dx + ca * dy) / sigma_y;
            out.at(i, j) = std::exp(-0.5 * (ax * ax + ay * ay));
        }
    return out;
}

std::vector<std::vector<double>> read_class_weights_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("read_class_weights_csv: cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw data_error("read_class_weights_csv: bad number '" + cell + "'");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw data_error("read_class_weights_csv: ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw data_error("read_class_weights_csv: empty file");
    return rows;
}

}  // namespace semcom
