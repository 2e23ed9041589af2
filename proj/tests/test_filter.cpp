#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "felis/cat_vision.hpp"
#include "felis/error.hpp"

using namespace felis;
using namespace felis::filter;

namespace {

constexpr double kPi = std::numbers::pi;

RgbImage random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RgbImage img(h, w);
    for (double& v : img.data()) v = u(rng);
    return img;
}

RgbImage gray(std::size_t h, std::size_t w, double g) { return RgbImage(h, w, g); }

double max_abs_diff(const RgbImage& a, const RgbImage& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    }
    return m;
}

bool in_unit_range(const RgbImage& img) {
    for (double v : img.data()) {
        if (!(v >= 0.0 && v <= 1.0)) return false;
    }
    return true;
}

// Naive 2-D DFT power of one channel.
std::vector<double> dft_power(const RgbImage& img, std::size_t ch) {
    const std::size_t h = img.height();
    const std::size_t w = img.width();
    std::vector<double> power(h * w);
    for (std::size_t ky = 0; ky < h; ++ky) {
        for (std::size_t kx = 0; kx < w; ++kx) {
            std::complex<double> acc = 0.0;
            for (std::size_t y = 0; y < h; ++y) {
                for (std::size_t x = 0; x < w; ++x) {
                    const double phase = -2.0 * kPi *
                                         (static_cast<double>(kx * x) / static_cast<double>(w) +
                                          static_cast<double>(ky * y) / static_cast<double>(h));
                    acc += img.at(y, x, ch) * std::polar(1.0, phase);
                }
            }
            power[ky * w + kx] = std::norm(acc);
        }
    }
    return power;
}

}  // namespace

TEST(SpectralSensitivity, PeakIsExactlyOne) {
    FilterConfig cfg;
    EXPECT_EQ(spectral_sensitivity(450.0, Photoreceptor::SCone, cfg), 1.0);
    EXPECT_EQ(spectral_sensitivity(cfg.l_cone_peak, Photoreceptor::LCone, cfg), 1.0);
}

TEST(SpectralSensitivity, OneSigmaAway) {
    FilterConfig cfg;
    EXPECT_NEAR(spectral_sensitivity(cfg.s_cone_peak + cfg.s_cone_width, Photoreceptor::SCone, cfg),
                std::exp(-0.5), 1e-15);
    EXPECT_NEAR(std::exp(-0.5), 0.60653, 1e-5);
}

TEST(SpectralSensitivity, RodPeakOverride) {
    FilterConfig cfg;
    cfg.rod_peak = 501.0;
    EXPECT_EQ(spectral_sensitivity(501.0, Photoreceptor::Rod, cfg), 1.0);
}

TEST(SpectralSensitivity, NonPositiveWidthIsConfigError) {
    FilterConfig cfg;
    cfg.rod_width = 0.0;
    EXPECT_THROW(spectral_sensitivity(500.0, Photoreceptor::Rod, cfg), InvalidConfig);
}

TEST(SpectralTransform, BlackStaysBlack) {
    const RgbImage out = spectral_transform(gray(4, 5, 0.0), FilterConfig{});
    for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(SpectralTransform, UniformGrayMapsToItself) {
    for (double g : {0.1, 0.37, 0.5, 0.93, 1.0}) {
        const RgbImage out = spectral_transform(gray(3, 3, g), FilterConfig{});
        for (double v : out.data()) EXPECT_NEAR(v, g, 1e-14);
    }
}

TEST(SpectralTransform, GreenOutweighsRed) {
    RgbImage red(4, 4);
    RgbImage green(4, 4);
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 4; ++c) {
            red.at(r, c, 0) = 0.8;
            green.at(r, c, 1) = 0.8;
        }
    }
    const FilterConfig cfg;
    const double red_out = spectral_transform(red, cfg).at(0, 0, 0);
    const double green_out = spectral_transform(green, cfg).at(0, 0, 0);

    // Hand evaluation of the blended per-channel weights.
    const auto sens = [&](double lambda) {
        const auto g = [](double l, double mu, double s) {
            return std::exp(-(l - mu) * (l - mu) / (2 * s * s));
        };
        return 0.5 * g(lambda, 450, 40) + 0.5 * g(lambda, 556, 50) + 25 * g(lambda, 498, 45);
    };
    const double white = sens(620) + sens(535) + sens(470);
    EXPECT_NEAR(red_out, 0.8 * sens(620) / white, 1e-14);
    EXPECT_NEAR(green_out, 0.8 * sens(535) / white, 1e-14);
    EXPECT_GT(green_out, red_out);
}

TEST(SpectralTransform, OutputIsAchromatic) {
    const RgbImage out = spectral_transform(random_image(5, 6, 3), FilterConfig{});
    for (std::size_t r = 0; r < 5; ++r) {
        for (std::size_t c = 0; c < 6; ++c) {
            EXPECT_EQ(out.at(r, c, 0), out.at(r, c, 1));
            EXPECT_EQ(out.at(r, c, 1), out.at(r, c, 2));
        }
    }
}

TEST(SpatialLowpass, ConstantImageUnchanged) {
    const RgbImage out = spatial_lowpass(gray(7, 9, 0.42), 0.05);
    for (double v : out.data()) EXPECT_NEAR(v, 0.42, 1e-14);
}

TEST(SpatialLowpass, HorizontalSinusoidClosedForm) {
    const std::size_t n = 64;
    const double sigma = 0.07;
    for (std::size_t k : {1, 3, 5, 9}) {
        const double u0 = static_cast<double>(k) / n;
        RgbImage img(n, n);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
                for (std::size_t ch = 0; ch < 3; ++ch) {
                    img.at(r, c, ch) = 0.5 + 0.25 * std::sin(2 * kPi * u0 * c);
                }
            }
        }
        const double gain = std::exp(-u0 * u0 / (2 * sigma * sigma));
        const RgbImage out = spatial_lowpass(img, sigma);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
                EXPECT_NEAR(out.at(r, c, 1), 0.5 + 0.25 * gain * std::sin(2 * kPi * u0 * c), 1e-12);
            }
        }
    }
}

TEST(SpatialLowpass, MatchesNaiveDftOracle) {
    // Apply H bin by bin with a naive DFT and compare the power spectra.
    const RgbImage img = random_image(6, 8, 11);
    const double sigma = 0.2;
    const RgbImage out = spatial_lowpass(img, sigma);
    const auto in_power = dft_power(img, 0);
    const auto out_power = dft_power(out, 0);
    for (std::size_t ky = 0; ky < 6; ++ky) {
        for (std::size_t kx = 0; kx < 8; ++kx) {
            const double fy = (ky <= 3 ? ky : static_cast<double>(ky) - 6.0) / 6.0;
            const double fx = (kx <= 4 ? kx : static_cast<double>(kx) - 8.0) / 8.0;
            const double h = std::exp(-(fx * fx + fy * fy) / (2 * sigma * sigma));
            const double expected = h * h * in_power[ky * 8 + kx];
            // Clamping can only bite at the extremes; random [0,1] data is
            // smoothed toward its mean so it never does.
            EXPECT_NEAR(out_power[ky * 8 + kx], expected, 1e-9 * (1.0 + expected));
        }
    }
}

TEST(SpatialLowpass, NoiseEnergyNeverGrows) {
    const RgbImage img = random_image(16, 16, 5);
    const RgbImage out = spatial_lowpass(img, 0.1);
    const auto in_power = dft_power(img, 2);
    const auto out_power = dft_power(out, 2);
    for (std::size_t i = 0; i < in_power.size(); ++i) {
        EXPECT_LE(out_power[i], in_power[i] * (1.0 + 1e-9) + 1e-18);
    }
}

TEST(SpatialLowpass, Errors) {
    EXPECT_THROW(spatial_lowpass(RgbImage(), 0.1), InvalidInput);
    EXPECT_THROW(spatial_lowpass(gray(2, 2, 0.5), 0.0), InvalidConfig);
    EXPECT_THROW(spatial_lowpass(gray(2, 2, 0.5), -1.0), InvalidConfig);
}

TEST(SpatialLowpass, DefaultCutoffHalvesGainAtSixthOfNyquist) {
    const double fc = 0.5 / 6.0;
    const double s = default_lowpass_sigma();
    EXPECT_NEAR(std::exp(-fc * fc / (2 * s * s)), 0.5, 1e-15);
}

TEST(GeometricOptics, CenterIsFixedForAnyCoefficients) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coef(-0.3, 0.6);
    const RgbImage img = random_image(9, 11, 13);
    for (int trial = 0; trial < 20; ++trial) {
        FilterConfig cfg;
        cfg.barrel_k1 = coef(rng);
        cfg.barrel_k2 = coef(rng);
        cfg.mask_steepness = 0.0;
        EXPECT_EQ(barrel_radius(0.0, cfg), 0.0);
        const RgbImage out = geometric_optics(img, cfg);
        for (std::size_t ch = 0; ch < 3; ++ch) {
            EXPECT_EQ(out.at(4, 5, ch), 0.5 * img.at(4, 5, ch));
        }
    }
}

TEST(GeometricOptics, MaskMidpointIsExactlyHalf) {
    FilterConfig cfg;
    EXPECT_EQ(acuity_mask(cfg.mask_radius, cfg), 0.5);
    cfg.mask_radius = 0.37;
    cfg.mask_steepness = 23.0;
    EXPECT_EQ(acuity_mask(0.37, cfg), 0.5);
}

TEST(GeometricOptics, DegenerateParametersHalveTheImage) {
    FilterConfig cfg;
    cfg.barrel_k1 = 0.0;
    cfg.barrel_k2 = 0.0;
    cfg.mask_steepness = 0.0;
    const RgbImage img = random_image(8, 10, 17);
    const RgbImage out = geometric_optics(img, cfg);
    for (std::size_t i = 0; i < img.data().size(); ++i) {
        EXPECT_NEAR(out.data()[i], 0.5 * img.data()[i], 1e-15);
    }
}

TEST(GeometricOptics, BarrelPullsFromOutsideAndClampsAtEdges) {
    FilterConfig cfg;
    cfg.mask_steepness = 0.0;
    // Columns hold their own index; the corner samples beyond the border
    // and so reads the clamped edge value.
    RgbImage img(5, 5);
    for (std::size_t r = 0; r < 5; ++r) {
        for (std::size_t c = 0; c < 5; ++c) {
            for (std::size_t ch = 0; ch < 3; ++ch) img.at(r, c, ch) = 0.2 * static_cast<double>(c);
        }
    }
    const RgbImage out = geometric_optics(img, cfg);
    EXPECT_NEAR(out.at(0, 4, 0), 0.5 * 0.8, 1e-15);
    EXPECT_NEAR(out.at(0, 0, 0), 0.0, 1e-15);
    EXPECT_TRUE(in_unit_range(out));
}

TEST(GeometricOptics, BarrelRadiusFormula) {
    FilterConfig cfg;
    EXPECT_NEAR(barrel_radius(0.5, cfg), 0.5 * (1 + 0.15 * 0.25 + 0.05 * 0.0625), 1e-15);
    EXPECT_NEAR(barrel_radius(1.0, cfg), 1.2, 1e-15);
}

TEST(TemporalGain, Shape) {
    FilterConfig cfg;
    EXPECT_EQ(temporal_gain(0.0, cfg), 1.0);
    EXPECT_EQ(temporal_gain(10.0, cfg), 1.0);
    EXPECT_EQ(temporal_gain(-10.0, cfg), 1.0);
    EXPECT_NEAR(temporal_gain(15.0, cfg), std::exp(-0.5), 1e-15);
    EXPECT_EQ(temporal_gain(55.5, cfg), 0.0);
    EXPECT_GT(temporal_gain(55.0, cfg), 0.0);
}

namespace {

FrameSequence pixel_sinusoid(double freq, double fs, std::size_t frames, double amp) {
    FrameSequence seq;
    seq.frame_rate = fs;
    for (std::size_t t = 0; t < frames; ++t) {
        const double v = 0.5 + amp * std::sin(2 * kPi * freq * static_cast<double>(t) / fs);
        seq.frames.push_back(gray(2, 3, v));
    }
    return seq;
}

}  // namespace

TEST(TemporalBandpass, PeakFrequencyPreserved) {
    const auto seq = pixel_sinusoid(10.0, 100.0, 100, 0.25);
    const auto out = temporal_bandpass(seq, FilterConfig{});
    EXPECT_FALSE(out.skipped);
    for (std::size_t t = 0; t < 100; ++t) {
        EXPECT_NEAR(out.sequence.frames[t].at(1, 2, 0), seq.frames[t].at(1, 2, 0), 1e-12);
    }
}

TEST(TemporalBandpass, OffPeakGain) {
    const auto seq = pixel_sinusoid(15.0, 100.0, 100, 0.25);
    const auto out = temporal_bandpass(seq, FilterConfig{});
    const double g = std::exp(-0.5);
    for (std::size_t t = 0; t < 100; ++t) {
        const double expected = 0.5 + 0.25 * g * std::sin(2 * kPi * 15.0 * t / 100.0);
        EXPECT_NEAR(out.sequence.frames[t].at(0, 0, 2), expected, 1e-12);
    }
}

TEST(TemporalBandpass, FlickerRemovedMeanKept) {
    const auto seq = pixel_sinusoid(60.0, 200.0, 200, 0.25);
    const auto out = temporal_bandpass(seq, FilterConfig{});
    for (const auto& frame : out.sequence.frames) {
        for (double v : frame.data()) EXPECT_NEAR(v, 0.5, 1e-12);
    }
}

TEST(TemporalBandpass, ConstantSequencePassesThrough) {
    FrameSequence seq;
    const RgbImage img = random_image(4, 4, 21);
    for (int t = 0; t < 7; ++t) seq.frames.push_back(img);
    const auto out = temporal_bandpass(seq, FilterConfig{});
    for (const auto& frame : out.sequence.frames) EXPECT_LT(max_abs_diff(frame, img), 1e-14);
}

TEST(TemporalBandpass, SingleFrameSkipped) {
    FrameSequence seq;
    seq.frames.push_back(random_image(3, 3, 1));
    const auto out = temporal_bandpass(seq, FilterConfig{});
    EXPECT_TRUE(out.skipped);
    EXPECT_EQ(out.sequence.frames[0], seq.frames[0]);
}

TEST(TemporalBandpass, RejectsMismatchedFrames) {
    FrameSequence seq;
    seq.frames.push_back(gray(3, 3, 0.1));
    seq.frames.push_back(gray(3, 4, 0.1));
    EXPECT_THROW(temporal_bandpass(seq, FilterConfig{}), InvalidInput);
}

TEST(LucasKanade, IdenticalFramesGiveZeroFlow) {
    const RgbImage img = random_image(10, 12, 3);
    const FlowField flow = lucas_kanade(img, img, 5);
    for (std::size_t i = 0; i < flow.u.size(); ++i) {
        EXPECT_EQ(flow.u[i], 0.0);
        EXPECT_EQ(flow.v[i], 0.0);
    }
}

TEST(LucasKanade, TranslationOfTexturedRamp) {
    // I = a x + b y^2: a pure linear ramp is rank-deficient (aperture
    // problem), the quadratic term gives the window a second direction.
    const std::size_t h = 20;
    const std::size_t w = 24;
    const double a = 0.02;
    const double b = 0.001;
    RgbImage prev(h, w);
    RgbImage next(h, w);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            const double y2 = b * static_cast<double>(r * r);
            for (std::size_t ch = 0; ch < 3; ++ch) {
                prev.at(r, c, ch) = a * static_cast<double>(c) + y2;
                next.at(r, c, ch) = a * (static_cast<double>(c) - 1.0) + y2;
            }
        }
    }
    const FlowField flow = lucas_kanade(prev, next, 5);
    for (std::size_t r = 3; r + 3 < h; ++r) {
        for (std::size_t c = 3; c + 3 < w; ++c) {
            EXPECT_NEAR(flow.u[r * w + c], 1.0, 0.1);
            EXPECT_NEAR(flow.v[r * w + c], 0.0, 0.1);
        }
    }
}

TEST(LucasKanade, FlatRegionIsSingular) {
    const FlowField flow = lucas_kanade(gray(8, 8, 0.3), gray(8, 8, 0.6), 3);
    for (std::size_t i = 0; i < flow.u.size(); ++i) {
        EXPECT_EQ(flow.u[i], 0.0);
        EXPECT_EQ(flow.v[i], 0.0);
    }
}

TEST(LucasKanade, Errors) {
    EXPECT_THROW(lucas_kanade(gray(4, 4, 0), gray(4, 5, 0), 3), InvalidInput);
    EXPECT_THROW(lucas_kanade(gray(4, 4, 0), gray(4, 4, 0), 4), InvalidConfig);
    EXPECT_THROW(lucas_kanade(gray(4, 4, 0), gray(4, 4, 0), 1), InvalidConfig);
}

TEST(MotionBias, DirectionGain) {
    EXPECT_DOUBLE_EQ(direction_gain(2.0, 0.0, 0.5), 1.5);
    EXPECT_DOUBLE_EQ(direction_gain(-3.0, 0.0, 0.5), 1.5);
    EXPECT_DOUBLE_EQ(direction_gain(0.0, 1.0, 0.5), 1.0);
    EXPECT_DOUBLE_EQ(direction_gain(0.0, 0.0, 0.5), 1.0);
    EXPECT_NEAR(direction_gain(1.0, 1.0, 0.5), 1.0 + 0.5 / std::sqrt(2.0), 1e-15);
}

TEST(MotionBias, ZeroFlowLeavesFramesUnchanged) {
    FrameSequence seq;
    for (int t = 0; t < 3; ++t) seq.frames.push_back(random_image(4, 5, 40 + t));
    std::vector<FlowField> flows(2, FlowField(4, 5));
    const FrameSequence out = motion_bias(seq, flows, FilterConfig{});
    for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(out.frames[t], seq.frames[t]);
}

TEST(MotionBias, NormalizedBoostIsAchromatic) {
    FilterConfig cfg;
    FrameSequence seq;
    seq.frames = {gray(1, 3, 0.2), gray(1, 3, 0.2)};
    FlowField flow(1, 3);
    flow.u = {0.0, 1.0, 0.0};  // horizontal: M = 1.5
    flow.v = {0.0, 0.0, 2.0};  // vertical: M = 2
    const FrameSequence out = motion_bias(seq, {flow}, cfg);
    for (const auto& frame : out.frames) {
        for (std::size_t ch = 0; ch < 3; ++ch) {
            EXPECT_NEAR(frame.at(0, 0, ch), 0.2, 1e-15);
            EXPECT_NEAR(frame.at(0, 1, ch), 0.2 + 0.2 * 0.75, 1e-15);
            EXPECT_NEAR(frame.at(0, 2, ch), 0.4, 1e-15);
        }
    }
}

TEST(MotionBias, FlowCountMustMatch) {
    FrameSequence seq;
    seq.frames = {gray(2, 2, 0.1), gray(2, 2, 0.1), gray(2, 2, 0.1)};
    EXPECT_THROW(motion_bias(seq, {FlowField(2, 2)}, FilterConfig{}), InvalidInput);
    EXPECT_THROW(motion_bias(seq, {FlowField(2, 2), FlowField(3, 2)}, FilterConfig{}),
                 InvalidInput);
}

TEST(Tapetum, GainBoundsAndMidpoint) {
    FilterConfig cfg;
    for (double m : {0.0, 0.1, 0.35, 0.6, 1.0}) {
        const double g = tapetum_factor(m, cfg);
        EXPECT_GT(g, 1.0);
        EXPECT_LT(g, 1.0 + cfg.tapetum_gain);
    }
    EXPECT_EQ(tapetum_factor(cfg.tapetum_threshold, cfg), 1.0 + cfg.tapetum_gain / 2.0);
}

TEST(Tapetum, DarkBrightenedMoreThanBright) {
    FilterConfig cfg;
    const double dark = tapetum_factor(0.05, cfg);
    const double bright = tapetum_factor(0.95, cfg);
    EXPECT_GT(dark, bright);
    EXPECT_NEAR(dark, 1.0 + 0.8 / (1.0 + std::exp(-8.0 * 0.30)), 1e-15);
    EXPECT_NEAR(bright, 1.0 + 0.8 / (1.0 + std::exp(8.0 * 0.60)), 1e-15);
}

TEST(Tapetum, TintAndClamp) {
    FilterConfig cfg;
    const RgbImage out = tapetum_gain(gray(2, 2, 0.2), cfg);
    const double g = tapetum_factor(0.2, cfg);
    EXPECT_NEAR(out.at(0, 0, 0), 0.95 * g * 0.2, 1e-15);
    EXPECT_NEAR(out.at(0, 0, 1), 1.05 * g * 0.2, 1e-15);
    EXPECT_NEAR(out.at(0, 0, 2), 1.00 * g * 0.2, 1e-15);
    const RgbImage bright = tapetum_gain(gray(2, 2, 1.0), cfg);
    EXPECT_EQ(bright.at(1, 1, 1), 1.0);
}

TEST(ApplyCatVision, ImageFlagsAndShape) {
    const RgbImage img = random_image(12, 15, 8);
    const ImageResult out = apply_cat_vision(img, FilterConfig{});
    EXPECT_TRUE(out.flags.temporal_skipped);
    EXPECT_TRUE(out.flags.motion_skipped);
    EXPECT_TRUE(out.image.same_shape(img));
    EXPECT_TRUE(in_unit_range(out.image));
}

TEST(ApplyCatVision, BlackStaysBlack) {
    const ImageResult out = apply_cat_vision(gray(9, 9, 0.0), FilterConfig{});
    for (double v : out.image.data()) EXPECT_EQ(v, 0.0);
    FrameSequence seq;
    seq.frames = {gray(9, 9, 0.0), gray(9, 9, 0.0), gray(9, 9, 0.0)};
    for (const auto& frame : apply_cat_vision(seq, FilterConfig{}).sequence.frames) {
        for (double v : frame.data()) EXPECT_EQ(v, 0.0);
    }
}

TEST(ApplyCatVision, ConstantSequenceMatchesImagePipeline) {
    const RgbImage img = random_image(16, 20, 99);
    FrameSequence seq;
    for (int t = 0; t < 6; ++t) seq.frames.push_back(img);
    const SequenceResult out = apply_cat_vision(seq, FilterConfig{});
    EXPECT_FALSE(out.flags.temporal_skipped);
    EXPECT_FALSE(out.flags.motion_skipped);
    const RgbImage single = apply_cat_vision(img, FilterConfig{}).image;
    for (const auto& frame : out.sequence.frames) EXPECT_LT(max_abs_diff(frame, single), 1e-6);
}

TEST(ApplyCatVision, SingleFrameSequenceSkipsTimeStages) {
    FrameSequence seq;
    seq.frames.push_back(random_image(5, 5, 2));
    const SequenceResult out = apply_cat_vision(seq, FilterConfig{});
    EXPECT_TRUE(out.flags.temporal_skipped);
    EXPECT_TRUE(out.flags.motion_skipped);
    EXPECT_EQ(out.sequence.frames[0], apply_cat_vision(seq.frames[0], FilterConfig{}).image);
}

TEST(ApplyCatVision, Deterministic) {
    FrameSequence seq;
    for (int t = 0; t < 5; ++t) seq.frames.push_back(random_image(10, 10, 500 + t));
    const auto a = apply_cat_vision(seq, FilterConfig{});
    const auto b = apply_cat_vision(seq, FilterConfig{});
    for (std::size_t t = 0; t < 5; ++t) EXPECT_EQ(a.sequence.frames[t], b.sequence.frames[t]);
}

TEST(ApplyCatVision, MovingSequenceStaysInRange) {
    FrameSequence seq;
    seq.frame_rate = 24.0;
    for (int t = 0; t < 8; ++t) {
        RgbImage frame(16, 16);
        for (std::size_t r = 0; r < 16; ++r) {
            for (std::size_t c = 0; c < 16; ++c) {
                const double v = 0.5 + 0.5 * std::sin(0.7 * (static_cast<double>(c) - t) + 0.3 * r);
                for (std::size_t ch = 0; ch < 3; ++ch) frame.at(r, c, ch) = v;
            }
        }
        seq.frames.push_back(frame);
    }
    for (const auto& frame : apply_cat_vision(seq, FilterConfig{}).sequence.frames) {
        EXPECT_TRUE(in_unit_range(frame));
    }
}

TEST(RangeProperty, EveryStageStaysInUnitInterval) {
    FilterConfig cfg;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const RgbImage img = random_image(7, 9, seed);
        EXPECT_TRUE(in_unit_range(spectral_transform(img, cfg)));
        EXPECT_TRUE(in_unit_range(spatial_lowpass(img, 0.03)));
        EXPECT_TRUE(in_unit_range(geometric_optics(img, cfg)));
        EXPECT_TRUE(in_unit_range(tapetum_gain(img, cfg)));
        FrameSequence seq;
        for (int t = 0; t < 4; ++t) seq.frames.push_back(random_image(7, 9, seed * 10 + t));
        for (const auto& f : temporal_bandpass(seq, cfg).sequence.frames) {
            EXPECT_TRUE(in_unit_range(f));
        }
    }
}
