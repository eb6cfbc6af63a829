#ifndef SEMCOM_IMPUTER_HPP
#define SEMCOM_IMPUTER_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "semcom/encoder.hpp"
#include "semcom/packetizer.hpp"
#include "semcom/tensor.hpp"

namespace semcom {

/// Spatial erasure masks at feature resolution: raw[i,j] = 1 iff every
/// channel at (i,j) was erased, dilated = raw convolved with an all-ones
/// kappa x kappa kernel (top-left anchored, zero padded). raw <= dilated.
struct ErasureMask {
    int width = 0;
    int height = 0;
    int kernel = 1;
    std::vector<std::uint8_t> raw;      // M-hat
    std::vector<std::uint8_t> dilated;  // M

    std::size_t flat(int i, int j) const {
        return static_cast<std::size_t>(i) * height + j;
    }
    bool raw_at(int i, int j) const { return raw[flat(i, j)] != 0; }
    bool dilated_at(int i, int j) const { return dilated[flat(i, j)] != 0; }
    std::size_t dilated_count() const;
};

ErasureMask build_mask(const ErasureReport& report, int feat_w, int feat_h,
                       int feat_c, int kernel);

/// PBM (P1) ASCII rendering for debugging; rows are the j axis.
std::string mask_to_pbm(const ErasureMask& mask, bool dilated);

/// Diffusion schedule: per-step betas, cumulative alpha_bar (index 0..T,
/// alpha_bar[0] = 1), and the DDIM per-step noise scale sigma.
struct NoiseSchedule {
    int steps = 0;
    std::vector<double> beta;       // beta[t-1] for step t
    std::vector<double> alpha_bar;  // alpha_bar[t], t = 0..T
    std::vector<double> sigma;      // sigma[t-1] for step t

    /// The standard 1000-step linear beta schedule subsampled to T steps:
    /// alpha_bar is taken at base indices round(k*1000/T). eta in [0, 1]
    /// scales the DDIM noise sigma_t = eta * sqrt((1-a_{t-1})/(1-a_t)) *
    /// sqrt(1 - a_t/a_{t-1}); eta = 0 is the deterministic sampler.
    static NoiseSchedule linear_subsampled(int steps, double beta_start = 1e-4,
                                           double beta_end = 0.02,
                                           double eta = 0.0);

    /// Explicit per-step betas (each in (0,1)).
    static NoiseSchedule from_betas(const std::vector<double>& betas,
                                    double eta = 0.0);

    void validate() const;
};

/// Noise predictor abstraction: estimates the noise component of y_t given
/// the step, the distorted feature, and the mask. Deterministic.
class DenoiserInterface {
  public:
    virtual ~DenoiserInterface() = default;
    virtual FeatureTensor predict_noise(const FeatureTensor& y_t, int t,
                                        const FeatureTensor& y_hat,
                                        const ErasureMask& mask) const = 0;
};

/// Closed-form MMSE noise predictor for Gaussian feature priors, the
/// analytic stand-in for a trained conditional noise network: it estimates
/// E[y_0 | y_t, y_hat on the known region, M]. Under a diagonal prior the
/// known region carries no information about other coordinates and the
/// posterior mean is the element-wise conjugate form; under the AR(1) prior
/// the masked coordinates condition on the exact known values through a
/// dense linear-Gaussian solve on the masked block (per-call workspace,
/// desk-scale grids).
class GaussianDenoiser final : public DenoiserInterface {
  public:
    GaussianDenoiser(const GaussianSourceSpec& model, const NoiseSchedule& schedule);
    ~GaussianDenoiser() override;

    FeatureTensor predict_noise(const FeatureTensor& y_t, int t,
                                const FeatureTensor& y_hat,
                                const ErasureMask& mask) const override;

    /// Unconditional posterior mean E[y_0 | y_t] under the prior (no mask
    /// information); the diagonal predict path and tests use it.
    FeatureTensor posterior_mean(const FeatureTensor& y_t, int t) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Writes fill values into the erased positions, leaving the rest untouched.
void init_erased(FeatureTensor& y_hat, const std::vector<Position>& erased,
                 const FeatureTensor& fill);

/// Forward diffusion y_t = sqrt(a_t) y_0 + sqrt(1 - a_t) eps; returns both
/// y_t and the drawn noise.
std::pair<FeatureTensor, FeatureTensor> forward_diffuse(const FeatureTensor& y0,
                                                        int t,
                                                        const NoiseSchedule& schedule,
                                                        std::uint64_t seed);

/// One DDIM update from step t to t-1 given the noise estimate.
FeatureTensor ddim_step(const FeatureTensor& y_t, const FeatureTensor& eps_hat,
                        int t, const NoiseSchedule& schedule, std::uint64_t seed);

/// Replacement-conditioned DDIM imputation: masked (dilated) positions start
/// from standard normal noise and are denoised step by step; known positions
/// are re-noised to the current step after every update and restored exactly
/// at the end. The output equals y_hat bit-exactly wherever raw mask = 0.
FeatureTensor impute(const FeatureTensor& y_hat, const ErasureMask& mask,
                     const DenoiserInterface& denoiser,
                     const NoiseSchedule& schedule, std::uint64_t seed);

}  // namespace semcom

#endif
