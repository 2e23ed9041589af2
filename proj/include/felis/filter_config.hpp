#pragma once

#include <string>

#include <json.hpp>

namespace felis {

/// Cut-off placed at 1/6 of the Nyquist frequency (0.5 cycles/pixel),
/// expressed as a Gaussian width: sigma = f_c / sqrt(2 ln 2), so the
/// transfer function equals 0.5 at f_c.
double default_lowpass_sigma();

/// Every parameter of the cat-vision transform. Wavelengths in nm,
/// spatial frequency in cycles/pixel, temporal frequency in Hz.
///
/// The JSON form uses the short keys listed next to each member.
struct FilterConfig {
    // Photoreceptor peak wavelengths and widths.
    double s_cone_peak = 450.0;     // mu_S
    double l_cone_peak = 556.0;     // mu_L
    double rod_peak = 498.0;        // mu_R
    double s_cone_width = 40.0;     // sigma_S
    double l_cone_width = 50.0;     // sigma_L
    double rod_width = 45.0;        // sigma_R

    // Nominal wavelength of each display primary.
    double red_wavelength = 620.0;    // lambda_R
    double green_wavelength = 535.0;  // lambda_G
    double blue_wavelength = 470.0;   // lambda_B

    double blue_weight = 1.0;   // w_B
    double green_weight = 1.0;  // w_G
    double red_weight = 1.0;    // w_R

    // Rod:cone blend, 25:1 by default.
    double s_cone_blend = 0.5;  // beta_S
    double l_cone_blend = 0.5;  // beta_L
    double rod_blend = 25.0;    // beta_R

    double lowpass_sigma = default_lowpass_sigma();  // sigma_lp

    double barrel_k1 = 0.15;        // k1
    double barrel_k2 = 0.05;        // k2
    double mask_steepness = 10.0;   // gamma
    double mask_radius = 0.6;       // r0

    double temporal_peak_hz = 10.0;     // f0
    double temporal_width_hz = 5.0;     // sigma_f
    double flicker_fusion_hz = 55.0;    // f_ff

    int flow_window = 5;            // lk_window
    double horizontal_bias = 0.5;   // kappa
    double motion_blend = 0.2;      // lambda_M

    double tapetum_gain = 0.8;       // alpha
    double tapetum_slope = 8.0;      // beta
    double tapetum_threshold = 0.35; // tau
    double tint_red = 0.95;          // t_R
    double tint_green = 1.05;        // t_G
    double tint_blue = 1.0;          // t_B

    /// Throws InvalidConfig naming the first offending field.
    void validate() const;

    friend bool operator==(const FilterConfig&, const FilterConfig&) = default;
};

/// Every key optional; unknown keys and non-numeric values throw InvalidConfig.
FilterConfig filter_config_from_json(const nlohmann::json& doc);
FilterConfig load_filter_config(const std::string& path);
nlohmann::json to_json(const FilterConfig& cfg);

}  // namespace felis
