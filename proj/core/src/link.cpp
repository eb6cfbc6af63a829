#include "semcom/link.hpp"

#include <cmath>

#include "semcom/errors.hpp"
#include "semcom/rng.hpp"

namespace semcom {

void LinkParams::validate() const {
    if (blocklength < 1) throw config_error("LinkParams: blocklength must be >= 1");
    if (!(channel_rate > 0.0) || channel_rate > 1.0)
        throw config_error("LinkParams: channel rate must be in (0, 1]");
    if (!(noise_power > 0.0)) throw config_error("LinkParams: noise power must be > 0");
    if (!(avg_power > 0.0)) throw config_error("LinkParams: power budget must be > 0");
    if (subcarriers < 1) throw config_error("LinkParams: subcarriers must be >= 1");
}

ChannelRealization draw_gains(ChannelModel model, int count, std::uint64_t key) {
    ChannelRealization r;
    r.model = model;
    r.gain2.resize(count);
    if (model == ChannelModel::awgn) {
        std::fill(r.gain2.begin(), r.gain2.end(), 1.0);
    } else {
        Rng rng(key);
        for (double& g : r.gain2) g = rng.exponential();
    }
    return r;
}

double snr(double gain2, double power, double noise_power) {
    if (!(noise_power > 0.0)) throw config_error("snr: noise power must be > 0");
    return gain2 * power / noise_power;
}

double capacity(double gamma) { return std::log2(1.0 + gamma); }

double dispersion(double gamma) {
    const double one_plus = 1.0 + gamma;
    return gamma * (2.0 + gamma) / (one_plus * one_plus);
}

double q_function(double x) { return 0.5 * std::erfc(x * 0.70710678118654752440); }

double packet_error_prob(double gamma, int blocklength, double channel_rate) {
    if (gamma <= 0.0) return 1.0;
    const double v = dispersion(gamma);
    const double z = std::sqrt(blocklength / v) *
                     (capacity(gamma) - channel_rate) * 0.69314718055994530942;
    return q_function(z);
}

std::vector<int> sample_losses(const ChannelRealization& realization,
                               std::span<const double> powers,
                               const LinkParams& params, std::uint64_t key) {
    params.validate();
    if (powers.size() != realization.gain2.size())
        throw config_error("sample_losses: powers length does not match gains");
    Rng rng(key);
    std::vector<int> lost;
    for (std::size_t i = 0; i < powers.size(); ++i) {
        const double u = rng.uniform();
        // untransmitted packets (zero power) count as lost
        if (powers[i] <= 0.0) {
            lost.push_back(static_cast<int>(i));
            continue;
        }
        const double rho = packet_error_prob(
            snr(realization.gain2[i], powers[i], params.noise_power),
            params.blocklength, params.channel_rate);
        if (u < rho) lost.push_back(static_cast<int>(i));
    }
    return lost;
}

}  // namespace semcom
