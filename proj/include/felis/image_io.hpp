#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "felis/image.hpp"

namespace felis::io {

enum class DecodeStatus { Ok, Corrupt, NonRgb };

struct DecodeProbe {
    DecodeStatus status = DecodeStatus::Corrupt;
    int channels = 0;
};

/// Decodes without converting; grayscale (1 or 2 channel) files are NonRgb,
/// undecodable files are Corrupt.
DecodeProbe probe_image(const std::filesystem::path& path);

/// PNG/JPEG to linear [0,1] (8-bit value / 255, 16-bit value / 65535).
/// Throws InvalidInput for unreadable or non-RGB files. Alpha is dropped.
RgbImage read_image(const std::filesystem::path& path);

/// Writes 8-bit RGB; format chosen from the extension.
void write_image(const std::filesystem::path& path, const RgbImage& img);

bool has_image_extension(const std::filesystem::path& path);

/// Image files in `dir` ordered by the first integer in their stem, then by
/// name. Throws InvalidInput if the directory is unreadable.
std::vector<std::filesystem::path> numbered_frames(const std::filesystem::path& dir);

}  // namespace felis::io
