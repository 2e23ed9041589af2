#pragma once

#include <cstddef>
#include <vector>

#include "felis/filter_config.hpp"
#include "felis/image.hpp"

/// Staged cat-vision transform. Each stage is a pure function whose output
/// stays within [0,1] and keeps the input dimensions.
namespace felis::filter {

enum class Photoreceptor { SCone, LCone, Rod };

/// Gaussian sensitivity of one photoreceptor class at `wavelength_nm`.
double spectral_sensitivity(double wavelength_nm, Photoreceptor curve, const FilterConfig& cfg);

/// Rod-dominant blend of cone/rod activations. The scalar result is divided
/// by the response to white (R=G=B=1), so a gray level g maps to g, and is
/// written to all three channels.
RgbImage spectral_transform(const RgbImage& img, const FilterConfig& cfg);

/// Gaussian transfer function in the 2-D Fourier domain. `sigma` is in
/// cycles/pixel; frequencies are the signed DFT frequencies k/N.
RgbImage spatial_lowpass(const RgbImage& img, double sigma);

/// r' = r (1 + k1 r^2 + k2 r^4), radius normalized so the corner is 1.
double barrel_radius(double r, const FilterConfig& cfg);

/// A(r) = 1 / (1 + exp(gamma (r - r0))).
double acuity_mask(double r, const FilterConfig& cfg);

/// Inverse-mapped barrel resample (bilinear, edge-clamped) followed by the
/// acuity mask evaluated at the destination radius.
RgbImage geometric_optics(const RgbImage& img, const FilterConfig& cfg);

/// G(|f|) with G(0) forced to 1 and zero above the flicker-fusion cut-off.
double temporal_gain(double frequency_hz, const FilterConfig& cfg);

struct TemporalResult {
    FrameSequence sequence;
    bool skipped = false;  ///< fewer than two frames
};

/// Per-pixel, per-channel DFT along time scaled by temporal_gain.
TemporalResult temporal_bandpass(const FrameSequence& seq, const FilterConfig& cfg);

/// Dense Lucas-Kanade flow on frame luminance. Systems with determinant
/// below 1e-12 yield zero flow.
FlowField lucas_kanade(const RgbImage& prev, const RgbImage& next, int window);

/// eta(theta) = 1 + kappa |cos theta|; zero flow has eta = 1.
double direction_gain(double u, double v, double kappa);

/// Adds lambda_M times the min-max normalized biased flow magnitude to every
/// channel. Frame t uses flows[t-1] (the pair ending at t); frame 0 uses
/// flows[0]. Requires flows.size() == frames - 1.
FrameSequence motion_bias(const FrameSequence& seq, const std::vector<FlowField>& flows,
                          const FilterConfig& cfg);

/// g = 1 + alpha * logistic(beta (tau - mean(R,G,B))).
double tapetum_factor(double mean_intensity, const FilterConfig& cfg);

RgbImage tapetum_gain(const RgbImage& img, const FilterConfig& cfg);

struct StageFlags {
    bool temporal_skipped = false;
    bool motion_skipped = false;
};

struct ImageResult {
    RgbImage image;
    StageFlags flags;
};

struct SequenceResult {
    FrameSequence sequence;
    StageFlags flags;
};

/// spectral -> low-pass -> geometric -> tapetum. Temporal and motion stages
/// do not apply to a still image and are flagged as skipped.
ImageResult apply_cat_vision(const RgbImage& img, const FilterConfig& cfg);

/// spectral -> low-pass -> geometric (per frame) -> temporal -> motion ->
/// tapetum (per frame).
SequenceResult apply_cat_vision(const FrameSequence& seq, const FilterConfig& cfg);

}  // namespace felis::filter
