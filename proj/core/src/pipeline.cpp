#include "semcom/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "semcom/errors.hpp"
#include "semcom/importance.hpp"
#include "semcom/link.hpp"
#include "semcom/metrics.hpp"
#include "semcom/power_alloc.hpp"
#include "semcom/rng.hpp"

namespace semcom {

namespace {
// Sub-stream purposes for the trial chain.
enum : std::uint64_t {
    kImageKey = 10,
    kEncodeKey = 11,
    kFadeKey = 12,
    kLossKey = 13,
    kImputeKey = 14,
    kTrialTag = 15,
};
}  // namespace

FeatureTensor synthetic_image(int width, int height, std::uint64_t key) {
    if (width <= 0 || height <= 0)
        throw config_error("synthetic_image: dims must be positive");
    Rng rng(key);
    // Low spatial frequencies keep the pattern smooth so that block losses,
    // not texture, dominate the distortion budget.
    const double f1 = 1.0 + 2.0 * rng.uniform();
    const double f2 = 1.0 + 2.0 * rng.uniform();
    const double p1 = rng.uniform(), p2 = rng.uniform();
    const double cx = 0.3 + 0.4 * rng.uniform();
    const double cy = 0.3 + 0.4 * rng.uniform();
    constexpr double kTau = 6.283185307179586;
    FeatureTensor img(width, height, 3);
    for (int i = 0; i < width; ++i)
        for (int j = 0; j < height; ++j) {
            const double u = (i + 0.5) / width;
            const double v = (j + 0.5) / height;
            const double wave = std::sin(kTau * (f1 * u + p1)) *
                                std::sin(kTau * (f2 * v + p2));
            const double dx = u - cx, dy = v - cy;
            const double bump = std::exp(-(dx * dx + dy * dy) / 0.045);
            for (int c = 0; c < 3; ++c) {
                double val = 120.0 + 38.0 * wave + 52.0 * bump +
                             16.0 * (c - 1) * (u - v);
                img.at(i, j, c) = std::clamp(val, 0.0, 255.0);
            }
        }
    return img;
}

struct TrialRunner::Impl {
    SimConfig cfg;
    PacketLayout layout;
    QuantizationCodebook cb;
    NoiseSchedule schedule;
    std::unique_ptr<GaussianDenoiser> denoiser;
    std::vector<double> weights;  // per packet, transmission order
    FeatureTensor fill;           // encoder output for the all-zero image

    // identity-encoder runs keep a fixed source across trials
    bool fixed_source = false;
    FeatureTensor image;
    FeatureTensor reference;      // what metrics compare against
    std::vector<Packet> packets;  // packetized fixed source

    std::vector<double> importance_weights() const {
        const auto& imp = cfg.importance;
        if (imp.mode == ImportanceConfig::Mode::uniform)
            return std::vector<double>(layout.num_packets(), 1.0);
        if (imp.mode == ImportanceConfig::Mode::blob) {
            ImportanceMap map;
            map.map = gaussian_blob(layout.feat_w, layout.feat_h, imp.center_x,
                                    imp.center_y, imp.sigma_x, imp.sigma_y,
                                    imp.angle_deg * 0.017453292519943295);
            return patch_importance(map, layout);
        }
        BackboneFeatures bb;
        bb.f = read_tensor(imp.features_path);
        bb.class_weights = read_class_weights_csv(imp.weights_path);
        const int k = select_class(bb);
        const ImportanceMap map = normalize_and_upsample(
            cam(bb, k), layout.feat_w, layout.feat_h, k);
        return patch_importance(map, layout);
    }
};

TrialRunner::TrialRunner(const SimConfig& config) : impl_(std::make_unique<Impl>()) {
    config.validate();
    impl_->cfg = config;
    impl_->layout = config.layout();
    impl_->cb = make_codebook(config.u_min, config.u_max, config.bits);
    impl_->schedule = NoiseSchedule::linear_subsampled(
        config.schedule_steps, config.beta_start, config.beta_end, config.eta);
    if (config.impute)
        impl_->denoiser = std::make_unique<GaussianDenoiser>(config.prior_spec(),
                                                             impl_->schedule);
    impl_->weights = impl_->importance_weights();
    impl_->fill = zero_image_fill(config.encoder, impl_->layout.feat_w,
                                  impl_->layout.feat_h, impl_->layout.feat_c);

    if (std::holds_alternative<IdentityBlockSpec>(config.encoder)) {
        impl_->fixed_source = true;
        impl_->image = config.image_path.empty()
                           ? synthetic_image(config.image_w, config.image_h,
                                             derive_key(config.seed, kImageKey))
                           : read_tensor(config.image_path);
        if (impl_->image.width != config.image_w ||
            impl_->image.height != config.image_h || impl_->image.channels != 3)
            throw config_error("TrialRunner: image file dims do not match config");
        impl_->reference = impl_->image;
        const FeatureTensor y = encode(config.encoder, impl_->image, 0);
        auto [yq, codes] = quantize(y, impl_->cb);
        impl_->packets = packetize(codes, impl_->layout);
    }
}

TrialRunner::~TrialRunner() = default;

const std::vector<double>& TrialRunner::packet_weights() const {
    return impl_->weights;
}
const PacketLayout& TrialRunner::layout() const { return impl_->layout; }

TrialResult TrialRunner::run(double snr_db, Policy policy, int trial_index) const {
    const auto t_start = std::chrono::steady_clock::now();
    const Impl& im = *impl_;
    const SimConfig& cfg = im.cfg;
    const LinkParams link = cfg.link_at_snr(snr_db);
    const int n_packets = im.layout.num_packets();
    const int b = cfg.subcarriers;

    TrialResult res;
    res.trial = trial_index;
    res.seed = derive_key(cfg.seed, kTrialTag, trial_index);
    res.snr_db = snr_db;
    res.policy = policy;

    // source + packetization (cached for the fixed-image case)
    FeatureTensor trial_source;
    std::vector<Packet> packets;
    const FeatureTensor* reference = &im.reference;
    const std::vector<Packet>* packets_ptr = &im.packets;
    if (!im.fixed_source) {
        trial_source = encode(cfg.encoder, FeatureTensor(),
                              derive_key(cfg.seed, kEncodeKey, trial_index));
        reference = &trial_source;
        auto [yq, codes] = quantize(trial_source, im.cb);
        packets = packetize(codes, im.layout);
        packets_ptr = &packets;
    }

    // slot-by-slot power allocation and loss sampling
    const int n_slots = (n_packets + b - 1) / b;
    std::vector<int> lost_global;
    double weighted_per = 0.0;
    for (int slot = 0; slot < n_slots; ++slot) {
        const int first = slot * b;
        const int real = std::min(b, n_packets - first);
        const ChannelRealization chan = draw_gains(
            cfg.channel, b, derive_key(cfg.seed, kFadeKey, trial_index, slot));

        std::vector<double> slot_weights(b, 0.0);
        for (int k = 0; k < real; ++k) slot_weights[k] = im.weights[first + k];

        std::vector<double> powers;
        switch (policy) {
            case Policy::equal:
                powers = equal_pa(b, cfg.avg_power);
                break;
            case Policy::waterfill: {
                std::vector<double> eff(b);
                for (int k = 0; k < b; ++k)
                    eff[k] = chan.gain2[k] / link.noise_power;
                powers = waterfill(eff, cfg.avg_power, b);
                break;
            }
            case Policy::semantic: {
                bool any_weight = false;
                for (double w : slot_weights) any_weight = any_weight || w > 0.0;
                if (!any_weight) {
                    // zero-importance slot: objective is flat, protect evenly
                    powers = equal_pa(b, cfg.avg_power);
                    break;
                }
                AllocationProblem prob;
                prob.weights = slot_weights;
                prob.gains.resize(b);
                for (int k = 0; k < b; ++k)
                    prob.gains[k] = chan.gain2[k] / link.noise_power;
                prob.avg_power = cfg.avg_power;
                prob.blocklength = cfg.blocklength;
                prob.channel_rate = link.channel_rate;
                powers = semantic_pa_policy(prob);
                break;
            }
        }

        const std::vector<int> slot_lost = sample_losses(
            chan, powers, link, derive_key(cfg.seed, kLossKey, trial_index, slot));
        for (int k : slot_lost)
            if (k < real) lost_global.push_back(first + k);
        for (int k = 0; k < real; ++k)
            weighted_per +=
                slot_weights[k] *
                packet_error_prob(
                    snr(chan.gain2[k], powers[k], link.noise_power),
                    link.blocklength, link.channel_rate);
    }

    // variable-length-coding emulation: a loss corrupts the rest of the stream
    if (cfg.baseline == BaselineMode::propagating && !lost_global.empty()) {
        const int first_lost = *std::min_element(lost_global.begin(),
                                                 lost_global.end());
        lost_global.clear();
        for (int p = first_lost; p < n_packets; ++p) lost_global.push_back(p);
    }

    auto result = depacketize(*packets_ptr, lost_global, im.layout, im.cb, im.fill);
    res.lost_packets = static_cast<int>(result.report.lost.size());
    res.erased_positions = static_cast<int>(result.report.erased.size());
    res.empirical_per = static_cast<double>(res.lost_packets) / n_packets;
    res.weighted_per = weighted_per;

    FeatureTensor recovered = std::move(result.values);
    if (cfg.impute && !result.report.erased.empty()) {
        const ErasureMask mask =
            build_mask(result.report, im.layout.feat_w, im.layout.feat_h,
                       im.layout.feat_c, cfg.kappa);
        recovered = impute(recovered, mask, *im.denoiser, im.schedule,
                           derive_key(cfg.seed, kImputeKey, trial_index));
    }

    const FeatureTensor decoded = decode(cfg.encoder, recovered);
    res.mse = mse(decoded, *reference);
    res.psnr_db = psnr(decoded, *reference);
    res.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t_start)
                      .count();
    return res;
}

TrialResult run_trial(const SimConfig& config, double snr_db, Policy policy,
                      int trial_index) {
    return TrialRunner(config).run(snr_db, policy, trial_index);
}

std::vector<TrialResult> run_point(const SimConfig& config, double snr_db) {
    TrialRunner runner(config);
    std::vector<TrialResult> rows;
    rows.reserve(config.policies.size() * config.trials);
    for (Policy policy : config.policies)
        for (int t = 0; t < config.trials; ++t)
            rows.push_back(runner.run(snr_db, policy, t));
    return rows;
}

namespace {

void accumulate(const std::vector<double>& xs, double& mean, double& stddev) {
    const int n = static_cast<int>(xs.size());
    double acc = 0.0;
    for (double x : xs) acc += x;
    mean = acc / n;
    if (n < 2 || !std::isfinite(mean)) {
        stddev = std::isfinite(mean) ? 0.0 : std::nan("");
        return;
    }
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    stddev = std::sqrt(ss / (n - 1));
}

}  // namespace

std::vector<SweepRow> run_sweep(const SimConfig& config) {
    TrialRunner runner(config);
    std::vector<SweepRow> table;
    for (double point : config.snr_db) {
        for (Policy policy : config.policies) {
            std::vector<double> psnrs, mses, pers, wpers;
            for (int t = 0; t < config.trials; ++t) {
                const TrialResult r = runner.run(point, policy, t);
                psnrs.push_back(r.psnr_db);
                mses.push_back(r.mse);
                pers.push_back(r.empirical_per);
                wpers.push_back(r.weighted_per);
            }
            SweepRow row;
            row.snr_db = point;
            row.policy = policy;
            row.trials = config.trials;
            accumulate(psnrs, row.mean_psnr_db, row.std_psnr_db);
            accumulate(mses, row.mean_mse, row.std_mse);
            accumulate(pers, row.mean_per, row.std_per);
            accumulate(wpers, row.mean_weighted_per, row.std_weighted_per);
            table.push_back(row);
        }
    }
    return table;
}

std::string trials_to_csv(const std::vector<TrialResult>& rows) {
    std::ostringstream out;
    out << "trial,seed,snr_db,policy,lost_packets,erased_positions,"
           "empirical_per,psnr_db,mse,weighted_per\n";
    for (const TrialResult& r : rows) {
        out << r.trial << ',' << r.seed << ',' << format_metric(r.snr_db) << ','
            << to_string(r.policy) << ',' << r.lost_packets << ','
            << r.erased_positions << ',' << format_metric(r.empirical_per) << ','
            << format_metric(r.psnr_db) << ',' << format_metric(r.mse) << ','
            << format_metric(r.weighted_per) << '\n';
    }
    return out.str();
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "snr_db,policy,trials,mean_psnr_db,std_psnr_db,mean_mse,std_mse,"
           "mean_per,std_per,mean_weighted_per,std_weighted_per\n";
    for (const SweepRow& r : rows) {
        out << format_metric(r.snr_db) << ',' << to_string(r.policy) << ','
            << r.trials << ',' << format_metric(r.mean_psnr_db) << ','
            << format_metric(r.std_psnr_db) << ',' << format_metric(r.mean_mse)
            << ',' << format_metric(r.std_mse) << ',' << format_metric(r.mean_per)
            << ',' << format_metric(r.std_per) << ','
            << format_metric(r.mean_weighted_per) << ','
            << format_metric(r.std_weighted_per) << '\n';
    }
    return out.str();
}

namespace {

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open output file " + path);
    out << body;
    if (!out) throw data_error("failed writing " + path);
}

}  // namespace

void write_run_outputs(const SimConfig& config, const std::vector<TrialResult>& rows,
                       const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_file(out_dir + "/results.csv", trials_to_csv(rows));
    write_file(out_dir + "/manifest.json", manifest_json(config));
}

void write_sweep_outputs(const SimConfig& config, const std::vector<SweepRow>& rows,
                         const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_file(out_dir + "/sweep.csv", sweep_to_csv(rows));
    write_file(out_dir + "/manifest.json", manifest_json(config));
}

}  // namespace semcom
