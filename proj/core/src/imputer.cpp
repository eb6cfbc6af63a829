#include "semcom/imputer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "semcom/errors.hpp"
#include "semcom/rng.hpp"

namespace semcom {

namespace {
// Sub-stream purposes for the imputation chain.
enum : std::uint64_t { kImputeInit = 1, kImputeRenoise = 2, kImputeIota = 3 };
}  // namespace

std::size_t ErasureMask::dilated_count() const {
    std::size_t n = 0;
    for (std::uint8_t v : dilated) n += v;
    return n;
}

ErasureMask build_mask(const ErasureReport& report, int feat_w, int feat_h,
                       int feat_c, int kernel) {
    if (feat_w <= 0 || feat_h <= 0 || feat_c <= 0)
        throw config_error("build_mask: dims must be positive");
    if (kernel < 1) throw config_error("build_mask: kernel must be >= 1");

    ErasureMask mask;
    mask.width = feat_w;
    mask.height = feat_h;
    mask.kernel = kernel;
    mask.raw.assign(static_cast<std::size_t>(feat_w) * feat_h, 0);
    mask.dilated.assign(mask.raw.size(), 0);

    std::vector<std::uint8_t> flags(
        static_cast<std::size_t>(feat_w) * feat_h * feat_c, 0);
    for (const Position& p : report.erased) {
        if (p.i < 0 || p.i >= feat_w || p.j < 0 || p.j >= feat_h || p.c < 0 ||
            p.c >= feat_c)
            throw data_error("build_mask: erased position out of range");
        flags[(static_cast<std::size_t>(p.i) * feat_h + p.j) * feat_c + p.c] = 1;
    }
    for (int i = 0; i < feat_w; ++i)
        for (int j = 0; j < feat_h; ++j) {
            int count = 0;
            for (int c = 0; c < feat_c; ++c)
                count += flags[(static_cast<std::size_t>(i) * feat_h + j) * feat_c + c];
            if (count == feat_c) mask.raw[mask.flat(i, j)] = 1;
        }

    // Top-left anchored all-ones kernel: a raw mark at (i,j) dilates the
    // block [i, i+kernel) x [j, j+kernel), clipped at the border.
    for (int i = 0; i < feat_w; ++i)
        for (int j = 0; j < feat_h; ++j) {
            if (!mask.raw[mask.flat(i, j)]) continue;
            const int i_end = std::min(feat_w, i + kernel);
            const int j_end = std::min(feat_h, j + kernel);
            for (int a = i; a < i_end; ++a)
                for (int d = j; d < j_end; ++d) mask.dilated[mask.flat(a, d)] = 1;
        }
    return mask;
}

std::string mask_to_pbm(const ErasureMask& mask, bool dilated) {
    const auto& bits = dilated ? mask.dilated : mask.raw;
    std::ostringstream out;
    out << "P1\n" << mask.width << " " << mask.height << "\n";
    for (int j = 0; j < mask.height; ++j) {
        for (int i = 0; i < mask.width; ++i) {
            if (i) out << ' ';
            out << (bits[mask.flat(i, j)] ? 1 : 0);
        }
        out << '\n';
    }
    return out.str();
}

NoiseSchedule NoiseSchedule::linear_subsampled(int steps, double beta_start,
                                               double beta_end, double eta) {
    constexpr int kBase = 1000;
    if (steps < 1 || steps > kBase)
        throw config_error("NoiseSchedule: steps must be in [1, 1000]");
    if (!(beta_start > 0.0) || beta_start >= 1.0 || !(beta_end > 0.0) ||
        beta_end >= 1.0)
        throw config_error("NoiseSchedule: base betas must be in (0, 1)");

    std::vector<double> base_alpha_bar(kBase + 1, 1.0);
    for (int s = 1; s <= kBase; ++s) {
        const double beta =
            beta_start + (beta_end - beta_start) * (s - 1) / (kBase - 1);
        base_alpha_bar[s] = base_alpha_bar[s - 1] * (1.0 - beta);
    }

    // Sub-sequence anchored at base index 1 (DDIM respacing): the last
    // reverse step then denoises from a nearly clean level, which is what
    // keeps replacement conditioning sharp at small T.
    NoiseSchedule sched;
    sched.steps = steps;
    sched.alpha_bar.assign(steps + 1, 1.0);
    sched.beta.assign(steps, 0.0);
    for (int k = 1; k <= steps; ++k) {
        const int s = 1 + static_cast<int>(std::llround(
                              static_cast<double>(k - 1) * kBase / steps));
        sched.alpha_bar[k] = base_alpha_bar[std::min(s, kBase)];
        sched.beta[k - 1] = 1.0 - sched.alpha_bar[k] / sched.alpha_bar[k - 1];
    }

    sched.sigma.assign(steps, 0.0);
    if (eta != 0.0) {
        if (eta < 0.0 || eta > 1.0)
            throw config_error("NoiseSchedule: eta must be in [0, 1]");
        for (int t = 1; t <= steps; ++t) {
            const double a_prev = sched.alpha_bar[t - 1];
            const double a_t = sched.alpha_bar[t];
            sched.sigma[t - 1] =
                eta * std::sqrt((1.0 - a_prev) / (1.0 - a_t)) *
                std::sqrt(1.0 - a_t / a_prev);
        }
    }
    sched.validate();
    return sched;
}

NoiseSchedule NoiseSchedule::from_betas(const std::vector<double>& betas,
                                        double eta) {
    if (betas.empty()) throw config_error("NoiseSchedule: need at least one beta");
    NoiseSchedule sched;
    sched.steps = static_cast<int>(betas.size());
    sched.beta = betas;
    sched.alpha_bar.assign(sched.steps + 1, 1.0);
    for (int t = 1; t <= sched.steps; ++t) {
        if (!(betas[t - 1] > 0.0) || betas[t - 1] >= 1.0)
            throw config_error("NoiseSchedule: betas must be in (0, 1)");
        sched.alpha_bar[t] = sched.alpha_bar[t - 1] * (1.0 - betas[t - 1]);
    }
    sched.sigma.assign(sched.steps, 0.0);
    if (eta != 0.0) {
        if (eta < 0.0 || eta > 1.0)
            throw config_error("NoiseSchedule: eta must be in [0, 1]");
        for (int t = 1; t <= sched.steps; ++t) {
            const double a_prev = sched.alpha_bar[t - 1];
            const double a_t = sched.alpha_bar[t];
            sched.sigma[t - 1] = eta * std::sqrt((1.0 - a_prev) / (1.0 - a_t)) *
                                 std::sqrt(1.0 - a_t / a_prev);
        }
    }
    sched.validate();
    return sched;
}

void NoiseSchedule::validate() const {
    if (steps < 1) throw config_error("NoiseSchedule: no steps");
    if (static_cast<int>(beta.size()) != steps ||
        static_cast<int>(alpha_bar.size()) != steps + 1 ||
        static_cast<int>(sigma.size()) != steps)
        throw config_error("NoiseSchedule: inconsistent array sizes");
    if (alpha_bar[0] != 1.0)
        throw config_error("NoiseSchedule: alpha_bar[0] must be 1");
    for (int t = 1; t <= steps; ++t) {
        if (!(alpha_bar[t] > 0.0) || alpha_bar[t] >= alpha_bar[t - 1])
            throw config_error("NoiseSchedule: alpha_bar must be strictly decreasing");
        const double s = sigma[t - 1];
        if (s < 0.0)
            throw config_error("NoiseSchedule: sigma must be nonnegative");
        if (s * s > 1.0 - alpha_bar[t - 1] + 1e-12)
            throw config_error("NoiseSchedule: sigma_t^2 exceeds 1 - alpha_bar[t-1]");
        // sigma shrinks as the reverse process approaches t = 0
        if (t >= 2 && sigma[t - 1] < sigma[t - 2] - 1e-12)
            throw config_error("NoiseSchedule: sigma must be nondecreasing in t");
    }
}

// ---------------------------------------------------------------------------
// Gaussian MMSE denoiser

struct GaussianDenoiser::Impl {
    GaussianSourceSpec model;
    NoiseSchedule sched;
    // AR(1) case: eigendecompositions of the per-axis correlation matrices
    // (for the unconditional posterior) plus the dense grid covariance (for
    // the conditional solve on the masked block).
    Eigen::MatrixXd u_w, u_h;
    Eigen::VectorXd lam_w, lam_h;
    Eigen::MatrixXd sigma;

    static Eigen::MatrixXd ar1_matrix(int n, double rho) {
        Eigen::MatrixXd a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = std::pow(rho, std::abs(i - j));
        return a;
    }
};

GaussianDenoiser::GaussianDenoiser(const GaussianSourceSpec& model,
                                   const NoiseSchedule& schedule)
    : impl_(std::make_unique<Impl>()) {
    validate(model);
    schedule.validate();
    impl_->model = model;
    impl_->sched = schedule;
    if (model.rho_corr) {
        const long n = static_cast<long>(model.width) * model.height;
        if (n > 4096)
            throw config_error(
                "GaussianDenoiser: AR(1) conditioning is desk-scale (grid "
                "positions must not exceed 4096); use a diagonal prior");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_w(
            Impl::ar1_matrix(model.width, *model.rho_corr));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_h(
            Impl::ar1_matrix(model.height, *model.rho_corr));
        if (es_w.info() != Eigen::Success || es_h.info() != Eigen::Success)
            throw numeric_error("GaussianDenoiser: covariance eigensolve failed");
        impl_->u_w = es_w.eigenvectors();
        impl_->lam_w = es_w.eigenvalues();
        impl_->u_h = es_h.eigenvectors();
        impl_->lam_h = es_h.eigenvalues();
        if (impl_->lam_w.minCoeff() <= 0.0 || impl_->lam_h.minCoeff() <= 0.0)
            throw numeric_error("GaussianDenoiser: covariance not positive definite");
        const double rho = *model.rho_corr;
        impl_->sigma.resize(n, n);
        for (long a = 0; a < n; ++a) {
            const int ai = static_cast<int>(a) / model.height;
            const int aj = static_cast<int>(a) % model.height;
            for (long b = 0; b < n; ++b) {
                const int bi = static_cast<int>(b) / model.height;
                const int bj = static_cast<int>(b) % model.height;
                impl_->sigma(a, b) =
                    std::pow(rho, std::abs(ai - bi) + std::abs(aj - bj));
            }
        }
    }
}

GaussianDenoiser::~GaussianDenoiser() = default;

FeatureTensor GaussianDenoiser::posterior_mean(const FeatureTensor& y_t,
                                               int t) const {
    const auto& model = impl_->model;
    const auto& sched = impl_->sched;
    if (t < 1 || t > sched.steps)
        throw config_error("GaussianDenoiser: step out of range");
    if (y_t.width != model.width || y_t.height != model.height ||
        y_t.channels != model.channels)
        throw config_error("GaussianDenoiser: tensor shape does not match model");
    const double a_t = sched.alpha_bar[t];
    const double sqrt_a = std::sqrt(a_t);
    const double noise_var = 1.0 - a_t;

    FeatureTensor post(y_t.width, y_t.height, y_t.channels);
    if (model.variance) {
        const double v = *model.variance;
        const double denom = a_t * v + noise_var;
        for (std::size_t n = 0; n < y_t.values.size(); ++n)
            post.values[n] =
                (sqrt_a * v * y_t.values[n] + noise_var * model.mean) / denom;
        return post;
    }

    // AR(1): E[y0|yt] = m + sqrt(a) Sigma (a Sigma + (1-a) I)^{-1} (yt - sqrt(a) m)
    // applied per channel through the Kronecker eigenbasis, where Sigma acts
    // as A_w along i and A_h along j.
    const int w = y_t.width, h = y_t.height;
    Eigen::MatrixXd slice(w, h);
    for (int c = 0; c < y_t.channels; ++c) {
        for (int i = 0; i < w; ++i)
            for (int j = 0; j < h; ++j)
                slice(i, j) = y_t.at(i, j, c) - sqrt_a * model.mean;
        Eigen::MatrixXd coef = impl_->u_w.transpose() * slice * impl_->u_h;
        for (int p = 0; p < w; ++p)
            for (int q = 0; q < h; ++q) {
                const double lam = impl_->lam_w(p) * impl_->lam_h(q);
                coef(p, q) *= sqrt_a * lam / (a_t * lam + noise_var);
            }
        slice = impl_->u_w * coef * impl_->u_h.transpose();
        for (int i = 0; i < w; ++i)
            for (int j = 0; j < h; ++j)
                post.at(i, j, c) = model.mean + slice(i, j);
    }
    return post;
}

FeatureTensor GaussianDenoiser::predict_noise(const FeatureTensor& y_t, int t,
                                              const FeatureTensor& y_hat,
                                              const ErasureMask& mask) const {
    if (t < 1 || t > impl_->sched.steps)
        throw config_error("GaussianDenoiser: step out of range");
    const double a_t = impl_->sched.alpha_bar[t];
    const double sqrt_a = std::sqrt(a_t);
    const double inv_sqrt_noise = 1.0 / std::sqrt(1.0 - a_t);

    FeatureTensor post;
    const bool conditional = impl_->model.rho_corr && mask.width == y_t.width &&
                             mask.height == y_t.height &&
                             y_hat.same_shape(y_t) &&
                             mask.dilated_count() > 0;
    if (!conditional) {
        post = posterior_mean(y_t, t);
    } else {
        // Conditional posterior: the masked block sees the exact known
        // values through the Schur-complement prior N(m_c, Sigma_c) and its
        // own noisy observation y_t^A.
        if (y_t.width != impl_->model.width || y_t.height != impl_->model.height ||
            y_t.channels != impl_->model.channels)
            throw config_error("GaussianDenoiser: tensor shape does not match model");
        const double m = impl_->model.mean;
        const int h = y_t.height;
        const int channels = y_t.channels;
        std::vector<int> masked, observed;
        for (int i = 0; i < y_t.width; ++i)
            for (int j = 0; j < h; ++j)
                (mask.dilated_at(i, j) ? masked : observed).push_back(i * h + j);
        const Eigen::Index na = static_cast<Eigen::Index>(masked.size());
        const Eigen::Index no = static_cast<Eigen::Index>(observed.size());

        Eigen::MatrixXd cond_cov;                 // Sigma_c
        Eigen::MatrixXd cond_mean(na, channels);  // m_c per channel
        if (no == 0) {
            cond_cov = impl_->sigma;
            cond_mean.setConstant(m);
        } else {
            Eigen::MatrixXd s_oo(no, no), s_ao(na, no), s_aa(na, na);
            for (Eigen::Index p = 0; p < no; ++p)
                for (Eigen::Index q = 0; q < no; ++q)
                    s_oo(p, q) = impl_->sigma(observed[p], observed[q]);
            for (Eigen::Index r = 0; r < na; ++r) {
                for (Eigen::Index p = 0; p < no; ++p)
                    s_ao(r, p) = impl_->sigma(masked[r], observed[p]);
                for (Eigen::Index q = 0; q < na; ++q)
                    s_aa(r, q) = impl_->sigma(masked[r], masked[q]);
            }
            Eigen::LLT<Eigen::MatrixXd> llt_oo(s_oo);
            if (llt_oo.info() != Eigen::Success)
                throw numeric_error("GaussianDenoiser: singular covariance block");
            Eigen::MatrixXd obs_dev(no, channels);
            for (Eigen::Index p = 0; p < no; ++p)
                for (int c = 0; c < channels; ++c)
                    obs_dev(p, c) = y_hat.values[static_cast<std::size_t>(
                                        observed[p]) * channels + c] - m;
            const Eigen::MatrixXd w = llt_oo.solve(obs_dev);
            cond_mean = (s_ao * w).array() + m;
            cond_cov = s_aa - s_ao * llt_oo.solve(s_ao.transpose());
        }

        Eigen::LLT<Eigen::MatrixXd> llt_post(
            a_t * cond_cov +
            (1.0 - a_t) * Eigen::MatrixXd::Identity(na, na));
        if (llt_post.info() != Eigen::Success)
            throw numeric_error("GaussianDenoiser: singular posterior system");
        Eigen::MatrixXd rhs(na, channels);
        for (Eigen::Index r = 0; r < na; ++r)
            for (int c = 0; c < channels; ++c)
                rhs(r, c) = y_t.values[static_cast<std::size_t>(masked[r]) *
                                       channels + c] -
                            sqrt_a * cond_mean(r, c);
        const Eigen::MatrixXd sol =
            cond_mean + sqrt_a * (cond_cov * llt_post.solve(rhs));

        post = FeatureTensor(y_t.width, y_t.height, y_t.channels);
        for (Eigen::Index p = 0; p < no; ++p)
            for (int c = 0; c < channels; ++c)
                post.values[static_cast<std::size_t>(observed[p]) * channels + c] =
                    y_hat.values[static_cast<std::size_t>(observed[p]) * channels + c];
        for (Eigen::Index r = 0; r < na; ++r)
            for (int c = 0; c < channels; ++c)
                post.values[static_cast<std::size_t>(masked[r]) * channels + c] =
                    sol(r, c);
    }

    FeatureTensor eps(y_t.width, y_t.height, y_t.channels);
    for (std::size_t n = 0; n < eps.values.size(); ++n)
        eps.values[n] =
            (y_t.values[n] - sqrt_a * post.values[n]) * inv_sqrt_noise;
    return eps;
}

// ---------------------------------------------------------------------------

void init_erased(FeatureTensor& y_hat, const std::vector<Position>& erased,
                 const FeatureTensor& fill) {
    if (!y_hat.same_shape(fill))
        throw config_error("init_erased: fill shape does not match tensor");
    for (const Position& p : erased) {
        if (p.i < 0 || p.i >= y_hat.width || p.j < 0 || p.j >= y_hat.height ||
            p.c < 0 || p.c >= y_hat.channels)
            throw data_error("init_erased: position out of range");
        y_hat.at(p.i, p.j, p.c) = fill.at(p.i, p.j, p.c);
    }
}

std::pair<FeatureTensor, FeatureTensor> forward_diffuse(
    const FeatureTensor& y0, int t, const NoiseSchedule& schedule,
    std::uint64_t seed) {
    schedule.validate();
    if (t < 1 || t > schedule.steps)
        throw config_error("forward_diffuse: step out of range");
    Rng rng(seed);
    const double sqrt_a = std::sqrt(schedule.alpha_bar[t]);
    const double sqrt_n = std::sqrt(1.0 - schedule.alpha_bar[t]);
    FeatureTensor noise(y0.width, y0.height, y0.channels);
    FeatureTensor y_t(y0.width, y0.height, y0.channels);
    for (std::size_t n = 0; n < y0.values.size(); ++n) {
        noise.values[n] = rng.normal();
        y_t.values[n] = sqrt_a * y0.values[n] + sqrt_n * noise.values[n];
    }
    return {std::move(y_t), std::move(noise)};
}

FeatureTensor ddim_step(const FeatureTensor& y_t, const FeatureTensor& eps_hat,
                        int t, const NoiseSchedule& schedule, std::uint64_t seed) {
    if (t < 1 || t > schedule.steps)
        throw config_error("ddim_step: step out of range");
    if (!y_t.same_shape(eps_hat))
        throw config_error("ddim_step: noise estimate shape mismatch");
    const double a_t = schedule.alpha_bar[t];
    const double a_prev = schedule.alpha_bar[t - 1];
    const double sig = schedule.sigma[t - 1];
    if (sig * sig > 1.0 - a_prev + 1e-12)
        throw config_error("ddim_step: sigma_t^2 exceeds 1 - alpha_bar[t-1]");
    const double scale = std::sqrt(a_prev / a_t);
    const double c_eps =
        std::sqrt(std::max(0.0, 1.0 - a_prev - sig * sig)) - scale * std::sqrt(1.0 - a_t);
    FeatureTensor out(y_t.width, y_t.height, y_t.channels);
    Rng rng(seed);
    for (std::size_t n = 0; n < y_t.values.size(); ++n) {
        double v = scale * y_t.values[n] + c_eps * eps_hat.values[n];
        if (sig > 0.0) v += sig * rng.normal();
        out.values[n] = v;
    }
    return out;
}

FeatureTensor impute(const FeatureTensor& y_hat, const ErasureMask& mask,
                     const DenoiserInterface& denoiser,
                     const NoiseSchedule& schedule, std::uint64_t seed) {
    schedule.validate();
    y_hat.validate("impute");
    if (mask.width != y_hat.width || mask.height != y_hat.height)
        throw config_error("impute: mask dims do not match tensor");
    if (mask.dilated_count() == 0) return y_hat;

    const int t_top = schedule.steps;
    Rng init_rng(derive_key(seed, kImputeInit));
    FeatureTensor cur(y_hat.width, y_hat.height, y_hat.channels);
    {
        const double sqrt_a = std::sqrt(schedule.alpha_bar[t_top]);
        const double sqrt_n = std::sqrt(1.0 - schedule.alpha_bar[t_top]);
        for (int i = 0; i < cur.width; ++i)
            for (int j = 0; j < cur.height; ++j) {
                const bool masked = mask.dilated_at(i, j);
                for (int c = 0; c < cur.channels; ++c) {
                    const double z = init_rng.normal();
                    cur.at(i, j, c) = masked
                                          ? z
                                          : sqrt_a * y_hat.at(i, j, c) + sqrt_n * z;
                }
            }
    }

    for (int t = t_top; t >= 1; --t) {
        const FeatureTensor eps = denoiser.predict_noise(cur, t, y_hat, mask);
        if (!eps.same_shape(cur))
            throw data_error("impute: denoiser returned mismatched shape");
        cur = ddim_step(cur, eps, t, schedule, derive_key(seed, kImputeIota, t));
        if (t - 1 >= 1) {
            // replacement conditioning: re-noise the known region to t-1
            Rng rng(derive_key(seed, kImputeRenoise, t));
            const double sqrt_a = std::sqrt(schedule.alpha_bar[t - 1]);
            const double sqrt_n = std::sqrt(1.0 - schedule.alpha_bar[t - 1]);
            for (int i = 0; i < cur.width; ++i)
                for (int j = 0; j < cur.height; ++j) {
                    if (mask.dilated_at(i, j)) continue;
                    for (int c = 0; c < cur.channels; ++c)
                        cur.at(i, j, c) =
                            sqrt_a * y_hat.at(i, j, c) + sqrt_n * rng.normal();
                }
        } else {
            // final step: restore every position the raw mask marks as known,
            // including the dilation ring that was regenerated along the way
            for (int i = 0; i < cur.width; ++i)
                for (int j = 0; j < cur.height; ++j) {
                    if (mask.raw_at(i, j)) continue;
                    for (int c = 0; c < cur.channels; ++c)
                        cur.at(i, j, c) = y_hat.at(i, j, c);
                }
        }
    }
    return cur;
}

}  // namespace semcom
