#include "felis/filter_config.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <string_view>
#include <utility>

#include "felis/error.hpp"

namespace felis {

double default_lowpass_sigma() {
    const double cutoff = 0.5 / 6.0;
    return cutoff / std::sqrt(2.0 * std::log(2.0));
}

namespace {

struct Field {
    std::string_view key;
    double FilterConfig::*member;
};

constexpr std::array<Field, 31> kFields{{
    {"mu_S", &FilterConfig::s_cone_peak},
    {"mu_L", &FilterConfig::l_cone_peak},
    {"mu_R", &FilterConfig::rod_peak},
    {"sigma_S", &FilterConfig::s_cone_width},
    {"sigma_L", &FilterConfig::l_cone_width},
    {"sigma_R", &FilterConfig::rod_width},
    {"lambda_R", &FilterConfig::red_wavelength},
    {"lambda_G", &FilterConfig::green_wavelength},
    {"lambda_B", &FilterConfig::blue_wavelength},
    {"w_B", &FilterConfig::blue_weight},
    {"w_G", &FilterConfig::green_weight},
    {"w_R", &FilterConfig::red_weight},
    {"beta_S", &FilterConfig::s_cone_blend},
    {"beta_L", &FilterConfig::l_cone_blend},
    {"beta_R", &FilterConfig::rod_blend},
    {"sigma_lp", &FilterConfig::lowpass_sigma},
    {"k1", &FilterConfig::barrel_k1},
    {"k2", &FilterConfig::barrel_k2},
    {"gamma", &FilterConfig::mask_steepness},
    {"r0", &FilterConfig::mask_radius},
    {"f0", &FilterConfig::temporal_peak_hz},
    {"sigma_f", &FilterConfig::temporal_width_hz},
    {"f_ff", &FilterConfig::flicker_fusion_hz},
    {"kappa", &FilterConfig::horizontal_bias},
    {"lambda_M", &FilterConfig::motion_blend},
    {"alpha", &FilterConfig::tapetum_gain},
    {"beta", &FilterConfig::tapetum_slope},
    {"tau", &FilterConfig::tapetum_threshold},
    {"t_R", &FilterConfig::tint_red},
    {"t_G", &FilterConfig::tint_green},
    {"t_B", &FilterConfig::tint_blue},
}};

constexpr std::string_view kWindowKey = "lk_window";

void require(bool ok, std::string_view field, std::string_view rule) {
    if (!ok) {
        throw InvalidConfig("filter config: " + std::string(field) + " " + std::string(rule));
    }
}

}  // namespace

void FilterConfig::validate() const {
    for (const Field& f : kFields) {
        require(std::isfinite(this->*f.member), f.key, "must be finite");
    }
    require(s_cone_width > 0, "sigma_S", "must be > 0");
    require(l_cone_width > 0, "sigma_L", "must be > 0");
    require(rod_width > 0, "sigma_R", "must be > 0");
    require(red_wavelength > 0 && green_wavelength > 0 && blue_wavelength > 0, "lambda_*",
            "must be > 0");
    require(blue_weight >= 0 && green_weight >= 0 && red_weight >= 0, "w_*", "must be >= 0");
    require(blue_weight + green_weight + red_weight > 0, "w_*", "must not all be zero");
    require(s_cone_blend >= 0 && l_cone_blend >= 0 && rod_blend >= 0, "beta_*", "must be >= 0");
    require(s_cone_blend + l_cone_blend + rod_blend > 0, "beta_*", "must not all be zero");
    require(lowpass_sigma > 0, "sigma_lp", "must be > 0");
    require(mask_steepness >= 0, "gamma", "must be >= 0");
    require(mask_radius >= 0, "r0", "must be >= 0");
    require(temporal_width_hz > 0, "sigma_f", "must be > 0");
    require(temporal_peak_hz > 0, "f0", "must be > 0");
    require(flicker_fusion_hz > temporal_peak_hz, "f_ff", "must exceed f0");
    require(flow_window >= 3 && flow_window % 2 == 1, kWindowKey, "must be odd and >= 3");
    require(horizontal_bias >= 0, "kappa", "must be >= 0");
    require(motion_blend >= 0, "lambda_M", "must be >= 0");
    require(tapetum_gain >= 0, "alpha", "must be >= 0");
    require(tint_red >= 0, "t_R", "must be >= 0");
    require(tint_green >= tint_blue && tint_blue >= tint_red, "t_G/t_B/t_R",
            "must satisfy t_G >= t_B >= t_R");
}

FilterConfig filter_config_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) {
        throw InvalidConfig("filter config: top level must be a JSON object");
    }
    FilterConfig cfg;
    for (const auto& [key, value] : doc.items()) {
        if (key == kWindowKey) {
            if (!value.is_number_integer()) {
                throw InvalidConfig("filter config: lk_window must be an integer");
            }
            cfg.flow_window = value.get<int>();
            continue;
        }
        bool found = false;
        for (const Field& f : kFields) {
            if (f.key == key) {
                if (!value.is_number()) {
                    throw InvalidConfig("filter config: " + key + " must be a number");
                }
                cfg.*f.member = value.get<double>();
                found = true;
                break;
            }
        }
        if (!found) {
            throw InvalidConfig("filter config: unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

FilterConfig load_filter_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidConfig("cannot open filter config " + path);
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidConfig("filter config " + path + ": " + e.what());
    }
    return filter_config_from_json(doc);
}

nlohmann::json to_json(const FilterConfig& cfg) {
    nlohmann::json doc = nlohmann::json::object();
    for (const Field& f : kFields) {
        doc[std::string(f.key)] = cfg.*f.member;
    }
    doc[std::string(kWindowKey)] = cfg.flow_window;
    return doc;
}

}  // namespace felis
