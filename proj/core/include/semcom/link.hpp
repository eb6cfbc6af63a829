#ifndef SEMCOM_LINK_HPP
#define SEMCOM_LINK_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace semcom {

/// Finite-blocklength link parameters.
struct LinkParams {
    int blocklength = 0;       // D, channel uses per packet
    double channel_rate = 0.0; // R_c = K/D, bits per channel use
    double noise_power = 0.0;  // sigma^2
    double avg_power = 0.0;    // P_ave budget per subcarrier
    int subcarriers = 0;       // B

    void validate() const;
};

enum class ChannelModel { awgn, rayleigh };

/// Per-packet power gains |h_i|^2 for one transmission slot. AWGN fixes the
/// gain at 1; Rayleigh draws i.i.d. Exponential(1).
struct ChannelRealization {
    ChannelModel model = ChannelModel::awgn;
    std::vector<double> gain2;
};

ChannelRealization draw_gains(ChannelModel model, int count, std::uint64_t key);

/// Received SNR gamma = |h|^2 P / sigma^2.
double snr(double gain2, double power, double noise_power);

/// Shannon capacity C = log2(1 + gamma).
double capacity(double gamma);

/// Channel dispersion V = gamma (2 + gamma) / (1 + gamma)^2, in [0, 1).
double dispersion(double gamma);

/// Normal-approximation packet error probability
/// rho = Q( sqrt(D / V(gamma)) * (C(gamma) - R_c) * ln 2 ), with rho = 1 at
/// gamma = 0.
double packet_error_prob(double gamma, int blocklength, double channel_rate);

/// Gaussian tail Q(x) = erfc(x / sqrt 2) / 2.
double q_function(double x);

/// Independent Bernoulli loss draw per packet at its analytic error
/// probability. Packets with zero power are always lost. Deterministic in
/// the key; returns ascending packet indices.
std::vector<int> sample_losses(const ChannelRealization& realization,
                               std::span<const double> powers,
                               const LinkParams& params, std::uint64_t key);

}  // namespace semcom

#endif
