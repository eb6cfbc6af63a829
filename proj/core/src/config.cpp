#include "semcom/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "semcom/errors.hpp"

namespace semcom {

using nlohmann::json;

const char* to_string(Policy p) {
    switch (p) {
        case Policy::semantic: return "semantic";
        case Policy::equal: return "equal";
        case Policy::waterfill: return "waterfill";
    }
    return "?";
}

const char* to_string(BaselineMode m) {
    return m == BaselineMode::localized ? "localized" : "propagating";
}

Policy policy_from_string(const std::string& s) {
    if (s == "semantic") return Policy::semantic;
    if (s == "equal") return Policy::equal;
    if (s == "waterfill") return Policy::waterfill;
    throw config_error("unknown policy '" + s + "'");
}

void SimConfig::feature_shape(int& w, int& h, int& c) const {
    feature_dims(encoder, image_w, image_h, w, h, c);
}

PacketLayout SimConfig::layout() const {
    PacketLayout l;
    l.patch_w = patch_w;
    l.patch_h = patch_h;
    feature_shape(l.feat_w, l.feat_h, l.feat_c);
    l.bits = bits;
    return l;
}

double SimConfig::channel_rate() const {
    const PacketLayout l = layout();
    return static_cast<double>(l.payload_bits()) / blocklength;
}

LinkParams SimConfig::link_at_snr(double snr_db_value) const {
    LinkParams p;
    p.blocklength = blocklength;
    p.channel_rate = channel_rate();
    p.avg_power = avg_power;
    p.noise_power = avg_power / std::pow(10.0, snr_db_value / 10.0);
    p.subcarriers = subcarriers;
    return p;
}

GaussianSourceSpec SimConfig::prior_spec() const {
    GaussianSourceSpec s;
    feature_shape(s.width, s.height, s.channels);
    s.mean = prior_mean;
    s.variance = prior_variance;
    s.rho_corr = prior_rho_corr;
    return s;
}

void SimConfig::validate() const {
    if (const auto* id = std::get_if<IdentityBlockSpec>(&encoder)) {
        if (image_w <= 0 || image_h <= 0)
            throw config_error("config: identity_block requires image dims");
        if (id->block < 1 || image_w % id->block || image_h % id->block)
            throw config_error("config: image dims not divisible by block");
    } else {
        semcom::validate(std::get<GaussianSourceSpec>(encoder));
    }
    PacketLayout l = layout();
    l.validate();
    if (!(u_min < u_max)) throw config_error("config: u_min must be below u_max");
    if (l.payload_bits() > blocklength)
        throw config_error("config: packet payload exceeds blocklength (R_c > 1)");
    if (channel_rate_cfg &&
        std::abs(*channel_rate_cfg - channel_rate()) > 1e-9)
        throw config_error(
            "config: channel_rate does not equal K/D for full packets");
    if (subcarriers < 1) throw config_error("config: subcarriers must be >= 1");
    if (!(avg_power > 0.0)) throw config_error("config: avg_power must be > 0");
    if (trials < 1) throw config_error("config: trials must be >= 1");
    if (snr_db.empty()) throw config_error("config: snr_db list is empty");
    if (policies.empty()) throw config_error("config: no policy requested");
    if (kappa < 1) throw config_error("config: kappa must be >= 1");
    if (schedule_steps < 1 || schedule_steps > 1000)
        throw config_error("config: schedule steps must be in [1, 1000]");
    if (impute) semcom::validate(prior_spec());
    if (importance.mode == ImportanceConfig::Mode::files &&
        (importance.features_path.empty() || importance.weights_path.empty()))
        throw config_error("config: importance files mode needs both paths");
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.contains(it.key()))
            throw config_error("config: unknown key '" + it.key() + "' in " + where);
}

double get_num(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw config_error(std::string("config: ") + key + " must be a number");
    return obj[key].get<double>();
}

int get_int(const json& obj, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer())
        throw config_error(std::string("config: ") + key + " must be an integer");
    return obj[key].get<int>();
}

}  // namespace

SimConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& e) {
        throw config_error(std::string("config: JSON parse failed: ") + e.what());
    }
    if (!j.is_object()) throw config_error("config: root must be an object");
    reject_unknown(j, {"encoder", "codebook", "patch", "link", "policy", "impute",
                       "baseline", "schedule", "prior", "kappa", "trials", "seed",
                       "snr_db", "importance", "image_path"},
                   "root");

    SimConfig cfg;

    if (!j.contains("encoder")) throw config_error("config: missing 'encoder'");
    {
        const json& e = j["encoder"];
        const std::string kind = e.value("kind", "");
        if (kind == "identity_block") {
            reject_unknown(e, {"kind", "block", "image_width", "image_height"},
                           "encoder");
            IdentityBlockSpec spec;
            spec.block = get_int(e, "block", 1);
            cfg.encoder = spec;
            cfg.image_w = get_int(e, "image_width", 0);
            cfg.image_h = get_int(e, "image_height", 0);
        } else if (kind == "gaussian_source") {
            reject_unknown(
                e, {"kind", "width", "height", "channels", "mean", "variance",
                    "rho_corr"},
                "encoder");
            GaussianSourceSpec spec;
            spec.width = get_int(e, "width", 0);
            spec.height = get_int(e, "height", 0);
            spec.channels = get_int(e, "channels", 0);
            spec.mean = get_num(e, "mean", 0.0);
            if (e.contains("variance")) spec.variance = get_num(e, "variance", 0.0);
            if (e.contains("rho_corr")) spec.rho_corr = get_num(e, "rho_corr", 0.0);
            cfg.encoder = spec;
        } else {
            throw config_error("config: encoder.kind must be identity_block or "
                               "gaussian_source");
        }
    }

    if (!j.contains("codebook")) throw config_error("config: missing 'codebook'");
    {
        const json& c = j["codebook"];
        reject_unknown(c, {"u_min", "u_max", "bits"}, "codebook");
        cfg.u_min = get_num(c, "u_min", 0.0);
        cfg.u_max = get_num(c, "u_max", 1.0);
        cfg.bits = get_int(c, "bits", 7);
    }

    if (!j.contains("patch")) throw config_error("config: missing 'patch'");
    {
        const json& p = j["patch"];
        reject_unknown(p, {"width", "height"}, "patch");
        cfg.patch_w = get_int(p, "width", 4);
        cfg.patch_h = get_int(p, "height", 4);
    }

    if (!j.contains("link")) throw config_error("config: missing 'link'");
    {
        const json& l = j["link"];
        reject_unknown(l, {"blocklength", "channel_rate", "avg_power",
                           "subcarriers", "channel"},
                       "link");
        cfg.blocklength = get_int(l, "blocklength", 1024);
        if (l.contains("channel_rate"))
            cfg.channel_rate_cfg = get_num(l, "channel_rate", 0.0);
        cfg.avg_power = get_num(l, "avg_power", 1.0);
        cfg.subcarriers = get_int(l, "subcarriers", 16);
        const std::string chan = l.value("channel", "awgn");
        if (chan == "awgn")
            cfg.channel = ChannelModel::awgn;
        else if (chan == "rayleigh")
            cfg.channel = ChannelModel::rayleigh;
        else
            throw config_error("config: channel must be awgn or rayleigh");
    }

    if (j.contains("policy")) {
        cfg.policies.clear();
        if (j["policy"].is_string()) {
            cfg.policies.push_back(policy_from_string(j["policy"].get<std::string>()));
        } else if (j["policy"].is_array()) {
            for (const auto& p : j["policy"])
                cfg.policies.push_back(policy_from_string(p.get<std::string>()));
        } else {
            throw config_error("config: policy must be a string or array");
        }
    }

    if (j.contains("impute")) {
        if (!j["impute"].is_boolean())
            throw config_error("config: impute must be a boolean");
        cfg.impute = j["impute"].get<bool>();
    }

    if (j.contains("baseline")) {
        const std::string b = j["baseline"].get<std::string>();
        if (b == "localized")
            cfg.baseline = BaselineMode::localized;
        else if (b == "propagating")
            cfg.baseline = BaselineMode::propagating;
        else
            throw config_error("config: baseline must be localized or propagating");
    }

    if (j.contains("schedule")) {
        const json& s = j["schedule"];
        reject_unknown(s, {"steps", "beta_start", "beta_end", "eta"}, "schedule");
        cfg.schedule_steps = get_int(s, "steps", 10);
        cfg.beta_start = get_num(s, "beta_start", 1e-4);
        cfg.beta_end = get_num(s, "beta_end", 0.02);
        cfg.eta = get_num(s, "eta", 0.0);
    }

    if (j.contains("prior")) {
        const json& p = j["prior"];
        reject_unknown(p, {"mean", "variance", "rho_corr"}, "prior");
        cfg.prior_mean = get_num(p, "mean", 0.0);
        if (p.contains("variance")) cfg.prior_variance = get_num(p, "variance", 0.0);
        if (p.contains("rho_corr")) cfg.prior_rho_corr = get_num(p, "rho_corr", 0.0);
    } else if (const auto* g = std::get_if<GaussianSourceSpec>(&cfg.encoder)) {
        // default: impute under the true source prior
        cfg.prior_mean = g->mean;
        cfg.prior_variance = g->variance;
        cfg.prior_rho_corr = g->rho_corr;
    } else {
        cfg.prior_variance = 1.0;
    }

    cfg.kappa = get_int(j, "kappa", 2);
    cfg.trials = get_int(j, "trials", 1);
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            throw config_error("config: seed must be an integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }

    if (j.contains("snr_db")) {
        if (!j["snr_db"].is_array())
            throw config_error("config: snr_db must be an array");
        for (const auto& v : j["snr_db"]) cfg.snr_db.push_back(v.get<double>());
    }

    if (j.contains("importance")) {
        const json& im = j["importance"];
        reject_unknown(im, {"mode", "center", "sigma", "angle_deg", "features",
                            "weights"},
                       "importance");
        const std::string mode = im.value("mode", "uniform");
        if (mode == "uniform") {
            cfg.importance.mode = ImportanceConfig::Mode::uniform;
        } else if (mode == "blob") {
            cfg.importance.mode = ImportanceConfig::Mode::blob;
            if (im.contains("center")) {
                cfg.importance.center_x = im["center"].at(0).get<double>();
                cfg.importance.center_y = im["center"].at(1).get<double>();
            }
            if (im.contains("sigma")) {
                if (im["sigma"].is_array()) {
                    cfg.importance.sigma_x = im["sigma"].at(0).get<double>();
                    cfg.importance.sigma_y = im["sigma"].at(1).get<double>();
                } else {
                    cfg.importance.sigma_x = im["sigma"].get<double>();
                    cfg.importance.sigma_y = cfg.importance.sigma_x;
                }
            }
            cfg.importance.angle_deg = get_num(im, "angle_deg", 0.0);
        } else if (mode == "files") {
            cfg.importance.mode = ImportanceConfig::Mode::files;
            cfg.importance.features_path = im.value("features", "");
            cfg.importance.weights_path = im.value("weights", "");
        } else {
            throw config_error("config: importance mode must be uniform, blob, or files");
        }
    }

    if (j.contains("image_path")) cfg.image_path = j["image_path"].get<std::string>();

    cfg.validate();
    return cfg;
}

SimConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string manifest_json(const SimConfig& cfg) {
    json j;
    if (const auto* id = std::get_if<IdentityBlockSpec>(&cfg.encoder)) {
        j["encoder"] = {{"kind", "identity_block"},
                        {"block", id->block},
                        {"image_width", cfg.image_w},
                        {"image_height", cfg.image_h}};
    } else {
        const auto& g = std::get<GaussianSourceSpec>(cfg.encoder);
        j["encoder"] = {{"kind", "gaussian_source"},
                        {"width", g.width},
                        {"height", g.height},
                        {"channels", g.channels},
                        {"mean", g.mean}};
        if (g.variance) j["encoder"]["variance"] = *g.variance;
        if (g.rho_corr) j["encoder"]["rho_corr"] = *g.rho_corr;
    }
    j["codebook"] = {{"u_min", cfg.u_min}, {"u_max", cfg.u_max}, {"bits", cfg.bits}};
    j["patch"] = {{"width", cfg.patch_w}, {"height", cfg.patch_h}};
    j["link"] = {{"blocklength", cfg.blocklength},
                 {"channel_rate", cfg.channel_rate()},
                 {"avg_power", cfg.avg_power},
                 {"subcarriers", cfg.subcarriers},
                 {"channel", cfg.channel == ChannelModel::awgn ? "awgn" : "rayleigh"}};
    json pols = json::array();
    for (Policy p : cfg.policies) pols.push_back(to_string(p));
    j["policy"] = pols;
    j["impute"] = cfg.impute;
    j["baseline"] = to_string(cfg.baseline);
    j["schedule"] = {{"steps", cfg.schedule_steps},
                     {"beta_start", cfg.beta_start},
                     {"beta_end", cfg.beta_end},
                     {"eta", cfg.eta}};
    json prior = {{"mean", cfg.prior_mean}};
    if (cfg.prior_variance) prior["variance"] = *cfg.prior_variance;
    if (cfg.prior_rho_corr) prior["rho_corr"] = *cfg.prior_rho_corr;
    j["prior"] = prior;
    j["kappa"] = cfg.kappa;
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    j["snr_db"] = cfg.snr_db;
    switch (cfg.importance.mode) {
        case ImportanceConfig::Mode::uniform:
            j["importance"] = {{"mode", "uniform"}};
            break;
        case ImportanceConfig::Mode::blob:
            j["importance"] = {{"mode", "blob"},
                               {"center", {cfg.importance.center_x, cfg.importance.center_y}},
                               {"sigma", {cfg.importance.sigma_x, cfg.importance.sigma_y}},
                               {"angle_deg", cfg.importance.angle_deg}};
            break;
        case ImportanceConfig::Mode::files:
            j["importance"] = {{"mode", "files"},
                               {"features", cfg.importance.features_path},
                               {"weights", cfg.importance.weights_path}};
            break;
    }
    if (!cfg.image_path.empty()) j["image_path"] = cfg.image_path;
    return j.dump(2) + "\n";
}

}  // namespace semcom
