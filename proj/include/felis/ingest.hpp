#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "felis/feature_matrix.hpp"

namespace felis::ingest {

enum class PairStatus { Ok, MissingCounterpart, Corrupt, NonRgb };

std::string to_string(PairStatus status);
PairStatus parse_pair_status(const std::string& text);

struct PairRecord {
    std::string pair_id;  ///< path relative to the domain root, '/'-separated
    std::string human_path;
    std::string cat_path;
    PairStatus status = PairStatus::Ok;

    friend bool operator==(const PairRecord&, const PairRecord&) = default;
};

struct PairManifest {
    std::vector<PairRecord> records;  ///< sorted by pair_id

    std::vector<PairRecord> usable() const;
    std::size_t count(PairStatus status) const;
};

/// Joins PNG/JPEG files of the two trees on their relative path. Each
/// matched pair is decoded; decode failures mark it corrupt, grayscale
/// files mark it non-rgb. Files present on one side only are
/// missing-counterpart. Throws InvalidInput if a directory is unreadable.
PairManifest build_manifest(const std::filesystem::path& human_dir,
                            const std::filesystem::path& cat_dir);

/// CSV with header pair_id,human_path,cat_path,status.
void write_manifest(std::ostream& out, const PairManifest& manifest);
void write_manifest(const std::filesystem::path& path, const PairManifest& manifest);
PairManifest read_manifest(const std::filesystem::path& path);

/// Keeps ids whose stable hash (under `seed`) is divisible by k. k <= 1
/// keeps everything.
bool in_golden_subset(const std::string& pair_id, std::uint64_t k, std::uint64_t seed);

/// One pair id per line, UTF-8.
std::vector<std::string> read_sidecar(const std::filesystem::path& path);
void write_sidecar(const std::filesystem::path& path, const std::vector<std::string>& ids);

/// NPY feature file plus its sidecar. Rejects files with zero rows and
/// sidecars whose line count differs from the row count.
FeatureMatrix load_feature_matrix(const std::filesystem::path& npy_path,
                                  const std::filesystem::path& sidecar_path);

/// One encoder output before pooling.
struct RawActivation {
    enum class Kind { Map, Tokens };

    Kind kind = Kind::Map;
    std::size_t rows = 0;      ///< H for maps, T for tokens
    std::size_t cols = 0;      ///< W for maps, E for tokens
    std::size_t channels = 0;  ///< C for maps, unused for tokens
    bool has_class_token = false;
    std::vector<double> values;  ///< H*W*C (channels last) or T*E, row-major

    static RawActivation feature_map(std::size_t h, std::size_t w, std::size_t c,
                                     std::vector<double> values);
    static RawActivation tokens(std::size_t t, std::size_t e, bool has_class_token,
                                std::vector<double> values);

    void validate() const;
};

/// Maps: per-channel spatial mean (length C). Tokens: the class token row
/// when present, otherwise the mean over tokens (length E).
Eigen::VectorXd vectorize(const RawActivation& raw);

/// One layer of one model, human and cat features aligned row by row.
struct LayerTable {
    std::string model;
    std::string layer;
    FeatureMatrix human;
    FeatureMatrix cat;

    std::size_t n() const noexcept { return static_cast<std::size_t>(human.n()); }
};

/// Throws InvalidInput naming model.layer when the pair ids differ in count,
/// order or content, or the feature dimensions differ.
LayerTable make_layer_table(std::string model, std::string layer, FeatureMatrix human,
                            FeatureMatrix cat);

/// Restricts a layer to its golden-subset pairs.
LayerTable golden_subset(const LayerTable& table, std::uint64_t k, std::uint64_t seed);

struct LayerManifestRow {
    std::string model;
    std::string layer;
    std::string human_feature_path;
    std::string cat_feature_path;
    std::string sidecar_path;
};

/// CSV with header model,layer,human_feature_path,cat_feature_path,sidecar_path.
/// Relative paths are resolved against the manifest's directory.
std::vector<LayerManifestRow> read_layer_manifest(const std::filesystem::path& path);
void write_layer_manifest(const std::filesystem::path& path,
                          const std::vector<LayerManifestRow>& rows);

}  // namespace felis::ingest
