#include "felis/image_io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>

#include "felis/error.hpp"

namespace fs = std::filesystem;

namespace felis::io {

namespace {

cv::Mat decode(const fs::path& path) {
    try {
        return cv::imread(path.string(), cv::IMREAD_UNCHANGED | cv::IMREAD_ANYDEPTH);
    } catch (const cv::Exception&) {
        return {};
    }
}

std::string lower_extension(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return ext;
}

}  // namespace

bool has_image_extension(const fs::path& path) {
    const std::string ext = lower_extension(path);
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

DecodeProbe probe_image(const fs::path& path) {
    const cv::Mat mat = decode(path);
    if (mat.empty()) return {DecodeStatus::Corrupt, 0};
    const int channels = mat.channels();
    if (channels == 3 || channels == 4) return {DecodeStatus::Ok, channels};
    return {DecodeStatus::NonRgb, channels};
}

RgbImage read_image(const fs::path& path) {
    const cv::Mat mat = decode(path);
    if (mat.empty()) {
        throw InvalidInput("cannot decode image " + path.string());
    }
    if (mat.channels() != 3 && mat.channels() != 4) {
        throw InvalidInput("image " + path.string() + " is not RGB (" +
                           std::to_string(mat.channels()) + " channels)");
    }
    double scale = 0.0;
    switch (mat.depth()) {
        case CV_8U: scale = 1.0 / 255.0; break;
        case CV_16U: scale = 1.0 / 65535.0; break;
        default:
            throw InvalidInput("image " + path.string() + " has an unsupported bit depth");
    }
    cv::Mat bgr;
    mat.convertTo(bgr, CV_MAKETYPE(CV_64F, mat.channels()), scale);

    RgbImage img(static_cast<std::size_t>(bgr.rows), static_cast<std::size_t>(bgr.cols));
    const int stride = bgr.channels();
    for (int r = 0; r < bgr.rows; ++r) {
        const double* row = bgr.ptr<double>(r);
        for (int c = 0; c < bgr.cols; ++c) {
            const double* px = row + c * stride;
            // OpenCV stores BGR(A).
            img.at(r, c, 0) = px[2];
            img.at(r, c, 1) = px[1];
            img.at(r, c, 2) = px[0];
        }
    }
    return img;
}

void write_image(const fs::path& path, const RgbImage& img) {
    if (img.empty()) {
        throw InvalidInput("refusing to write an empty image to " + path.string());
    }
    cv::Mat bgr(static_cast<int>(img.height()), static_cast<int>(img.width()), CV_8UC3);
    for (int r = 0; r < bgr.rows; ++r) {
        auto* row = bgr.ptr<std::uint8_t>(r);
        for (int c = 0; c < bgr.cols; ++c) {
            for (int ch = 0; ch < 3; ++ch) {
                const double v = std::clamp(img.at(r, c, ch), 0.0, 1.0);
                row[c * 3 + (2 - ch)] = static_cast<std::uint8_t>(std::lround(v * 255.0));
            }
        }
    }
    bool ok = false;
    try {
        ok = cv::imwrite(path.string(), bgr);
    } catch (const cv::Exception& e) {
        throw InvalidInput("cannot write image " + path.string() + ": " + e.what());
    }
    if (!ok) {
        throw InvalidInput("cannot write image " + path.string());
    }
}

std::vector<fs::path> numbered_frames(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) {
        throw InvalidInput("frame directory " + dir.string() + " is not readable");
    }
    struct Entry {
        std::uint64_t number;
        std::string name;
        fs::path path;
    };
    std::vector<Entry> entries;
    for (const auto& item : fs::directory_iterator(dir)) {
        if (!item.is_regular_file() || !has_image_extension(item.path())) continue;
        const std::string stem = item.path().stem().string();
        std::uint64_t number = std::numeric_limits<std::uint64_t>::max();
        const auto digit = std::find_if(stem.begin(), stem.end(),
                                        [](unsigned char ch) { return std::isdigit(ch) != 0; });
        if (digit != stem.end()) {
            number = 0;
            for (auto it = digit; it != stem.end() && std::isdigit(static_cast<unsigned char>(*it));
                 ++it) {
                number = number * 10 + static_cast<std::uint64_t>(*it - '0');
            }
        }
        entries.push_back({number, item.path().filename().string(), item.path()});
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.number != b.number ? a.number < b.number : a.name < b.name;
    });
    std::vector<fs::path> out;
    out.reserve(entries.size());
    for (auto& e : entries) out.push_back(std::move(e.path));
    return out;
}

}  // namespace felis::io
