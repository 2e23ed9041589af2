#include "felis/cat_vision.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>

#include "felis/error.hpp"

namespace felis::filter {

namespace {

// FFTW's planner is not re-entrant; execution with fresh arrays is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct PlanDeleter {
    void operator()(fftw_plan_s* plan) const { fftw_destroy_plan(plan); }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

fftw_complex* as_fftw(std::vector<std::complex<double>>& buf) {
    return reinterpret_cast<fftw_complex*>(buf.data());
}

// Flow ranges below this are roundoff, not motion.
constexpr double kFlatFlowRange = 1e-9;

constexpr double kSingularDet = 1e-12;

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<double> luminance_plane(const RgbImage& img) {
    std::vector<double> out(img.pixel_count());
    for (std::size_t r = 0; r < img.height(); ++r) {
        for (std::size_t c = 0; c < img.width(); ++c) {
            out[r * img.width() + c] = img.luminance(r, c);
        }
    }
    return out;
}

// Summed-area table with one row/column of zero padding.
std::vector<double> integral(const std::vector<double>& plane, std::size_t h, std::size_t w) {
    std::vector<double> sat((h + 1) * (w + 1), 0.0);
    for (std::size_t r = 0; r < h; ++r) {
        double row_sum = 0.0;
        for (std::size_t c = 0; c < w; ++c) {
            row_sum += plane[r * w + c];
            sat[(r + 1) * (w + 1) + c + 1] = sat[r * (w + 1) + c + 1] + row_sum;
        }
    }
    return sat;
}

double box_sum(const std::vector<double>& sat, std::size_t w, std::size_t r0, std::size_t c0,
               std::size_t r1, std::size_t c1) {
    const std::size_t stride = w + 1;
    return sat[r1 * stride + c1] - sat[r0 * stride + c1] - sat[r1 * stride + c0] +
           sat[r0 * stride + c0];
}

double sample_bilinear(const RgbImage& img, double x, double y, std::size_t channel) {
    const double max_x = static_cast<double>(img.width() - 1);
    const double max_y = static_cast<double>(img.height() - 1);
    x = std::clamp(x, 0.0, max_x);
    y = std::clamp(y, 0.0, max_y);
    const auto x0 = static_cast<std::size_t>(std::floor(x));
    const auto y0 = static_cast<std::size_t>(std::floor(y));
    const std::size_t x1 = std::min(x0 + 1, img.width() - 1);
    const std::size_t y1 = std::min(y0 + 1, img.height() - 1);
    const double fx = x - static_cast<double>(x0);
    const double fy = y - static_cast<double>(y0);
    const double top = (1.0 - fx) * img.at(y0, x0, channel) + fx * img.at(y0, x1, channel);
    const double bottom = (1.0 - fx) * img.at(y1, x0, channel) + fx * img.at(y1, x1, channel);
    return (1.0 - fy) * top + fy * bottom;
}

}  // namespace

double spectral_sensitivity(double wavelength_nm, Photoreceptor curve, const FilterConfig& cfg) {
    double peak = 0.0;
    double width = 0.0;
    switch (curve) {
        case Photoreceptor::SCone:
            peak = cfg.s_cone_peak;
            width = cfg.s_cone_width;
            break;
        case Photoreceptor::LCone:
            peak = cfg.l_cone_peak;
            width = cfg.l_cone_width;
            break;
        case Photoreceptor::Rod:
            peak = cfg.rod_peak;
            width = cfg.rod_width;
            break;
    }
    if (!(width > 0.0)) {
        throw InvalidConfig("spectral curve width must be > 0");
    }
    const double delta = wavelength_nm - peak;
    return std::exp(-(delta * delta) / (2.0 * width * width));
}

RgbImage spectral_transform(const RgbImage& img, const FilterConfig& cfg) {
    cfg.validate();
    const std::array<double, 3> wavelengths{cfg.red_wavelength, cfg.green_wavelength,
                                            cfg.blue_wavelength};
    const std::array<double, 3> weights{cfg.red_weight, cfg.green_weight, cfg.blue_weight};
    const std::array<std::pair<Photoreceptor, double>, 3> blend{{
        {Photoreceptor::SCone, cfg.s_cone_blend},
        {Photoreceptor::LCone, cfg.l_cone_blend},
        {Photoreceptor::Rod, cfg.rod_blend},
    }};

    // Collapse the blend of the three activations into one weight per input channel.
    std::array<double, 3> coef{};
    for (std::size_t ch = 0; ch < 3; ++ch) {
        for (const auto& [curve, beta] : blend) {
            coef[ch] += beta * weights[ch] * spectral_sensitivity(wavelengths[ch], curve, cfg);
        }
    }
    const double white = coef[0] + coef[1] + coef[2];

    RgbImage out(img.height(), img.width());
    for (std::size_t r = 0; r < img.height(); ++r) {
        for (std::size_t c = 0; c < img.width(); ++c) {
            double v = 0.0;
            for (std::size_t ch = 0; ch < 3; ++ch) v += coef[ch] * img.at(r, c, ch);
            v = std::clamp(v / white, 0.0, 1.0);
            for (std::size_t ch = 0; ch < 3; ++ch) out.at(r, c, ch) = v;
        }
    }
    return out;
}

RgbImage spatial_lowpass(const RgbImage& img, double sigma) {
    if (img.empty()) {
        throw InvalidInput("spatial_lowpass: image has zero size");
    }
    if (!(sigma > 0.0)) {
        throw InvalidConfig("spatial_lowpass: sigma_lp must be > 0");
    }
    const std::size_t h = img.height();
    const std::size_t w = img.width();
    const std::size_t half_w = w / 2 + 1;

    std::vector<double> plane(h * w);
    std::vector<std::complex<double>> spectrum(h * half_w);

    Plan forward;
    Plan inverse;
    {
        std::lock_guard lock(planner_mutex());
        forward.reset(fftw_plan_dft_r2c_2d(static_cast<int>(h), static_cast<int>(w), plane.data(),
                                           as_fftw(spectrum), FFTW_ESTIMATE));
        inverse.reset(fftw_plan_dft_c2r_2d(static_cast<int>(h), static_cast<int>(w),
                                           as_fftw(spectrum), plane.data(), FFTW_ESTIMATE));
    }

    std::vector<double> transfer(h * half_w);
    const double denom = 2.0 * sigma * sigma;
    for (std::size_t r = 0; r < h; ++r) {
        const double fv = (r <= h / 2 ? static_cast<double>(r) : static_cast<double>(r) - h) / h;
        for (std::size_t c = 0; c < half_w; ++c) {
            const double fu = static_cast<double>(c) / w;
            transfer[r * half_w + c] = std::exp(-(fu * fu + fv * fv) / denom) / (h * w);
        }
    }

    RgbImage out(h, w);
    for (std::size_t ch = 0; ch < 3; ++ch) {
        for (std::size_t i = 0; i < h * w; ++i) plane[i] = img.data()[i * 3 + ch];
        fftw_execute_dft_r2c(forward.get(), plane.data(), as_fftw(spectrum));
        for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] *= transfer[i];
        fftw_execute_dft_c2r(inverse.get(), as_fftw(spectrum), plane.data());
        for (std::size_t i = 0; i < h * w; ++i) {
            out.data()[i * 3 + ch] = std::clamp(plane[i], 0.0, 1.0);
        }
    }
    return out;
}

double barrel_radius(double r, const FilterConfig& cfg) {
    const double r2 = r * r;
    return r * (1.0 + cfg.barrel_k1 * r2 + cfg.barrel_k2 * r2 * r2);
}

double acuity_mask(double r, const FilterConfig& cfg) {
    return 1.0 / (1.0 + std::exp(cfg.mask_steepness * (r - cfg.mask_radius)));
}

RgbImage geometric_optics(const RgbImage& img, const FilterConfig& cfg) {
    cfg.validate();
    if (img.empty()) {
        throw InvalidInput("geometric_optics: image has zero size");
    }
    const double cx = (static_cast<double>(img.width()) - 1.0) / 2.0;
    const double cy = (static_cast<double>(img.height()) - 1.0) / 2.0;
    const double half_diag = std::hypot(cx, cy);
    constexpr double kEps = 1e-12;

    RgbImage out(img.height(), img.width());
    for (std::size_t row = 0; row < img.height(); ++row) {
        for (std::size_t col = 0; col < img.width(); ++col) {
            double nx = 0.0;
            double ny = 0.0;
            if (half_diag > 0.0) {
                nx = (static_cast<double>(col) - cx) / half_diag;
                ny = (static_cast<double>(row) - cy) / half_diag;
            }
            const double r = std::hypot(nx, ny);
            const double scale = barrel_radius(r, cfg) / std::max(r, kEps);
            const double src_x = cx + half_diag * scale * nx;
            const double src_y = cy + half_diag * scale * ny;
            const double mask = acuity_mask(r, cfg);
            for (std::size_t ch = 0; ch < 3; ++ch) {
                const double v = mask * sample_bilinear(img, src_x, src_y, ch);
                out.at(row, col, ch) = std::clamp(v, 0.0, 1.0);
            }
        }
    }
    return out;
}

double temporal_gain(double frequency_hz, const FilterConfig& cfg) {
    const double f = std::abs(frequency_hz);
    if (f == 0.0) return 1.0;
    if (f > cfg.flicker_fusion_hz) return 0.0;
    const double delta = f - cfg.temporal_peak_hz;
    return std::exp(-(delta * delta) / (2.0 * cfg.temporal_width_hz * cfg.temporal_width_hz));
}

TemporalResult temporal_bandpass(const FrameSequence& seq, const FilterConfig& cfg) {
    cfg.validate();
    seq.validate();
    if (seq.frames.size() < 2) {
        return {seq, true};
    }
    const std::size_t frames = seq.frames.size();
    const std::size_t values = seq.frames[0].data().size();
    const std::size_t bins = frames / 2 + 1;

    // Time-major layout: series for element e is samples[t * values + e].
    std::vector<double> samples(frames * values);
    for (std::size_t t = 0; t < frames; ++t) {
        std::copy(seq.frames[t].data().begin(), seq.frames[t].data().end(),
                  samples.begin() + static_cast<std::ptrdiff_t>(t * values));
    }
    std::vector<std::complex<double>> spectrum(bins * values);

    const int n = static_cast<int>(frames);
    const int howmany = static_cast<int>(values);
    Plan forward;
    Plan inverse;
    {
        std::lock_guard lock(planner_mutex());
        forward.reset(fftw_plan_many_dft_r2c(1, &n, howmany, samples.data(), nullptr, howmany, 1,
                                             as_fftw(spectrum), nullptr, howmany, 1,
                                             FFTW_ESTIMATE));
        inverse.reset(fftw_plan_many_dft_c2r(1, &n, howmany, as_fftw(spectrum), nullptr, howmany,
                                             1, samples.data(), nullptr, howmany, 1,
                                             FFTW_ESTIMATE));
    }
    fftw_execute(forward.get());
    for (std::size_t k = 0; k < bins; ++k) {
        const double f = static_cast<double>(k) * seq.frame_rate / static_cast<double>(frames);
        const double gain = temporal_gain(f, cfg) / static_cast<double>(frames);
        for (std::size_t e = 0; e < values; ++e) spectrum[k * values + e] *= gain;
    }
    fftw_execute(inverse.get());

    TemporalResult result;
    result.sequence.frame_rate = seq.frame_rate;
    result.sequence.frames.reserve(frames);
    for (std::size_t t = 0; t < frames; ++t) {
        RgbImage frame(seq.frames[0].height(), seq.frames[0].width());
        for (std::size_t e = 0; e < values; ++e) {
            frame.data()[e] = std::clamp(samples[t * values + e], 0.0, 1.0);
        }
        result.sequence.frames.push_back(std::move(frame));
    }
    return result;
}

FlowField lucas_kanade(const RgbImage& prev, const RgbImage& next, int window) {
    if (!prev.same_shape(next)) {
        throw InvalidInput("lucas_kanade: frames differ in shape");
    }
    if (window < 3 || window % 2 == 0) {
        throw InvalidConfig("lucas_kanade: window must be odd and >= 3");
    }
    const std::size_t h = prev.height();
    const std::size_t w = prev.width();
    FlowField flow(h, w);
    if (h == 0 || w == 0) return flow;

    const std::vector<double> a = luminance_plane(prev);
    const std::vector<double> b = luminance_plane(next);
    auto at = [w](const std::vector<double>& p, std::size_t r, std::size_t c) {
        return p[r * w + c];
    };

    std::vector<double> xx(h * w), xy(h * w), yy(h * w), xt(h * w), yt(h * w);
    for (std::size_t r = 0; r < h; ++r) {
        const std::size_t up = r == 0 ? 0 : r - 1;
        const std::size_t down = std::min(r + 1, h - 1);
        for (std::size_t c = 0; c < w; ++c) {
            const std::size_t left = c == 0 ? 0 : c - 1;
            const std::size_t right = std::min(c + 1, w - 1);
            // Central differences of the two-frame average.
            const double ix = 0.25 * ((at(a, r, right) - at(a, r, left)) +
                                      (at(b, r, right) - at(b, r, left)));
            const double iy = 0.25 * ((at(a, down, c) - at(a, up, c)) +
                                      (at(b, down, c) - at(b, up, c)));
            const double it = at(b, r, c) - at(a, r, c);
            const std::size_t i = r * w + c;
            xx[i] = ix * ix;
            xy[i] = ix * iy;
            yy[i] = iy * iy;
            xt[i] = ix * it;
            yt[i] = iy * it;
        }
    }
    const auto sxx = integral(xx, h, w);
    const auto sxy = integral(xy, h, w);
    const auto syy = integral(yy, h, w);
    const auto sxt = integral(xt, h, w);
    const auto syt = integral(yt, h, w);

    const auto half = static_cast<std::size_t>(window / 2);
    for (std::size_t r = 0; r < h; ++r) {
        const std::size_t r0 = r >= half ? r - half : 0;
        const std::size_t r1 = std::min(r + half + 1, h);
        for (std::size_t c = 0; c < w; ++c) {
            const std::size_t c0 = c >= half ? c - half : 0;
            const std::size_t c1 = std::min(c + half + 1, w);
            const double gxx = box_sum(sxx, w, r0, c0, r1, c1);
            const double gxy = box_sum(sxy, w, r0, c0, r1, c1);
            const double gyy = box_sum(syy, w, r0, c0, r1, c1);
            const double bx = -box_sum(sxt, w, r0, c0, r1, c1);
            const double by = -box_sum(syt, w, r0, c0, r1, c1);
            const double det = gxx * gyy - gxy * gxy;
            if (std::abs(det) < kSingularDet) continue;
            flow.u[r * w + c] = (gyy * bx - gxy * by) / det;
            flow.v[r * w + c] = (gxx * by - gxy * bx) / det;
        }
    }
    return flow;
}

double direction_gain(double u, double v, double kappa) {
    const double magnitude = std::hypot(u, v);
    if (magnitude == 0.0) return 1.0;
    return 1.0 + kappa * std::abs(u) / magnitude;
}

FrameSequence motion_bias(const FrameSequence& seq, const std::vector<FlowField>& flows,
                          const FilterConfig& cfg) {
    seq.validate();
    if (seq.frames.size() < 2 || flows.size() != seq.frames.size() - 1) {
        throw InvalidInput("motion_bias: need one flow field per consecutive frame pair");
    }
    FrameSequence out;
    out.frame_rate = seq.frame_rate;
    out.frames.reserve(seq.frames.size());
    for (std::size_t t = 0; t < seq.frames.size(); ++t) {
        const FlowField& flow = flows[t == 0 ? 0 : t - 1];
        const RgbImage& frame = seq.frames[t];
        if (flow.height != frame.height() || flow.width != frame.width()) {
            throw InvalidInput("motion_bias: flow field " + std::to_string(t) +
                               " does not match frame shape");
        }
        std::vector<double> m(flow.u.size());
        for (std::size_t i = 0; i < m.size(); ++i) {
            m[i] = direction_gain(flow.u[i], flow.v[i], cfg.horizontal_bias) *
                   std::hypot(flow.u[i], flow.v[i]);
        }
        const auto [lo, hi] = std::minmax_element(m.begin(), m.end());
        const double min_m = m.empty() ? 0.0 : *lo;
        const double range = m.empty() ? 0.0 : *hi - *lo;

        RgbImage result = frame;
        if (range > kFlatFlowRange) {
            for (std::size_t i = 0; i < m.size(); ++i) {
                const double boost = cfg.motion_blend * (m[i] - min_m) / range;
                for (std::size_t ch = 0; ch < 3; ++ch) result.data()[i * 3 + ch] += boost;
            }
            result.clamp_unit();
        }
        out.frames.push_back(std::move(result));
    }
    return out;
}

double tapetum_factor(double mean_intensity, const FilterConfig& cfg) {
    return 1.0 + cfg.tapetum_gain *
                     logistic(cfg.tapetum_slope * (cfg.tapetum_threshold - mean_intensity));
}

RgbImage tapetum_gain(const RgbImage& img, const FilterConfig& cfg) {
    cfg.validate();
    const std::array<double, 3> tint{cfg.tint_red, cfg.tint_green, cfg.tint_blue};
    RgbImage out(img.height(), img.width());
    for (std::size_t r = 0; r < img.height(); ++r) {
        for (std::size_t c = 0; c < img.width(); ++c) {
            const double g = tapetum_factor(img.luminance(r, c), cfg);
            for (std::size_t ch = 0; ch < 3; ++ch) {
                out.at(r, c, ch) = std::clamp(tint[ch] * g * img.at(r, c, ch), 0.0, 1.0);
            }
        }
    }
    return out;
}

namespace {

RgbImage front_stages(const RgbImage& img, const FilterConfig& cfg) {
    return geometric_optics(spatial_lowpass(spectral_transform(img, cfg), cfg.lowpass_sigma), cfg);
}

}  // namespace

ImageResult apply_cat_vision(const RgbImage& img, const FilterConfig& cfg) {
    cfg.validate();
    ImageResult result;
    result.image = tapetum_gain(front_stages(img, cfg), cfg);
    result.flags.temporal_skipped = true;
    result.flags.motion_skipped = true;
    return result;
}

SequenceResult apply_cat_vision(const FrameSequence& seq, const FilterConfig& cfg) {
    cfg.validate();
    seq.validate();
    if (seq.frames.empty()) {
        throw InvalidInput("apply_cat_vision: sequence has no frames");
    }
    FrameSequence front;
    front.frame_rate = seq.frame_rate;
    front.frames.reserve(seq.frames.size());
    for (const RgbImage& frame : seq.frames) front.frames.push_back(front_stages(frame, cfg));

    SequenceResult result;
    TemporalResult temporal = temporal_bandpass(front, cfg);
    result.flags.temporal_skipped = temporal.skipped;

    FrameSequence moved;
    if (temporal.sequence.frames.size() >= 2) {
        std::vector<FlowField> flows;
        flows.reserve(temporal.sequence.frames.size() - 1);
        for (std::size_t t = 1; t < temporal.sequence.frames.size(); ++t) {
            flows.push_back(lucas_kanade(temporal.sequence.frames[t - 1],
                                         temporal.sequence.frames[t], cfg.flow_window));
        }
        moved = motion_bias(temporal.sequence, flows, cfg);
    } else {
        moved = std::move(temporal.sequence);
        result.flags.motion_skipped = true;
    }

    result.sequence.frame_rate = seq.frame_rate;
    result.sequence.frames.reserve(moved.frames.size());
    for (const RgbImage& frame : moved.frames) {
        result.sequence.frames.push_back(tapetum_gain(frame, cfg));
    }
    return result;
}

}  // namespace felis::filter
