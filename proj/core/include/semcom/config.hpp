#ifndef SEMCOM_CONFIG_HPP
#define SEMCOM_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semcom/encoder.hpp"
#include "semcom/link.hpp"
#include "semcom/packetizer.hpp"

namespace semcom {

enum class Policy { semantic, equal, waterfill };
enum class BaselineMode { localized, propagating };

const char* to_string(Policy p);
const char* to_string(BaselineMode m);
Policy policy_from_string(const std::string& s);

struct ImportanceConfig {
    enum class Mode { uniform, blob, files };
    Mode mode = Mode::uniform;
    // blob parameters (grid fractions / degrees)
    double center_x = 0.5, center_y = 0.5;
    double sigma_x = 0.25, sigma_y = 0.25;
    double angle_deg = 0.0;
    // file-backed CAM inputs
    std::string features_path;
    std::string weights_path;
};

/// Full experiment description; every field maps 1:1 onto the JSON config.
struct SimConfig {
    EncoderSpec encoder = IdentityBlockSpec{1};
    int image_w = 0, image_h = 0;      // identity_block input dims
    std::string image_path;           // optional tensor file; synthetic if empty

    double u_min = 0.0, u_max = 1.0;
    int bits = 7;

    int patch_w = 4, patch_h = 4;

    int blocklength = 1024;
    std::optional<double> channel_rate_cfg;  // must match K/D when given
    double avg_power = 1.0;
    int subcarriers = 16;
    ChannelModel channel = ChannelModel::awgn;

    std::vector<Policy> policies{Policy::semantic};
    bool impute = true;
    BaselineMode baseline = BaselineMode::localized;

    int schedule_steps = 10;
    double beta_start = 1e-4, beta_end = 0.02, eta = 0.0;
    double prior_mean = 0.0;
    std::optional<double> prior_variance;
    std::optional<double> prior_rho_corr;
    int kappa = 2;

    int trials = 1;
    std::uint64_t seed = 0;
    std::vector<double> snr_db;

    ImportanceConfig importance;

    // --- derived views -----------------------------------------------------
    void feature_shape(int& w, int& h, int& c) const;
    PacketLayout layout() const;
    double channel_rate() const;  // K/D
    LinkParams link_at_snr(double snr_db) const;
    GaussianSourceSpec prior_spec() const;

    /// Cross-module consistency: divisibility, rate match, dims.
    void validate() const;
};

/// Parses a JSON config; unknown keys are rejected with config_error.
SimConfig parse_config(const std::string& json_text);
SimConfig load_config(const std::string& path);

/// Canonical JSON echo of the full configuration (the run manifest body).
std::string manifest_json(const SimConfig& config);

}  // namespace semcom

#endif
