#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "felis/filter_config.hpp"
#include "felis/ingest.hpp"

namespace felis::pipeline {

struct AlignOptions {
    std::uint64_t seed = 0;
    std::size_t perms_mantel = 500;
    std::size_t perms_shift = 200;
    double fdr_q = 0.05;
    std::uint64_t golden_subset_k = 0;  ///< 0 or 1 disables the subset
    std::size_t workers = 1;
    bool json = false;  ///< also write layer_reports.json with per-pair arrays
};

/// Raw p-value of one tested metric and its FDR outcome.
struct TestedMetric {
    double p = 1.0;
    double q = 1.0;
    bool rejected = false;
};

struct LayerReport {
    std::string model;
    std::string layer;
    std::size_t n = 0;
    double cka_linear = 0.0;
    double cka_rbf = 0.0;
    double rsa_spearman = 0.0;
    double mantel_r = 0.0;
    TestedMetric mantel;
    double mmd_stat = 0.0;
    double mmd_bandwidth = 0.0;
    TestedMetric mmd;
    double energy_stat = 0.0;
    TestedMetric energy;
    double w1 = 0.0;
    double mean_cosine = 0.0;
    double mean_l2 = 0.0;
    std::string paired_test_type;
    std::optional<double> paired_stat;
    double shapiro_p = 1.0;
    bool paired_degenerate = false;
    TestedMetric paired;

    std::vector<std::string> pair_ids;
    std::vector<double> pair_cosines;
    std::vector<double> pair_distances;
    std::vector<double> pair_projections;
};

/// Names of the tested metrics, in grid order.
inline constexpr std::array<const char*, 4> kTestedMetrics{"mantel", "mmd", "energy", "paired"};

/// Every metric for one layer; q-values are left at their defaults. The
/// permutation streams are keyed by (seed, model, layer, metric).
LayerReport compute_layer(const ingest::LayerTable& table, const AlignOptions& options);

/// One BH pass over every p-value of every report; returns the grid size.
std::size_t apply_fdr(std::vector<LayerReport>& reports, double q);

struct MetricAggregate {
    double mean = 0.0;
    double max = 0.0;
};

struct ModelSummary {
    std::string model;
    std::size_t layers = 0;
    MetricAggregate cka_linear;
    MetricAggregate cka_rbf;
    MetricAggregate rsa_spearman;
    MetricAggregate mean_cosine;
    MetricAggregate mean_l2;
    MetricAggregate w1;
    std::string best_layer_by_cka_rbf;
    std::string best_layer_by_cka_linear;
};

/// Per-model aggregates. Ties for the best layer go to the first layer in
/// report order.
std::vector<ModelSummary> summarize(std::span<const LayerReport> reports);

struct RankedLayer {
    std::string model;
    std::string layer;
    double value = 0.0;

    friend bool operator==(const RankedLayer&, const RankedLayer&) = default;
};

struct DissimilarityRanking {
    std::vector<RankedLayer> lowest_cka_linear;
    std::vector<RankedLayer> lowest_rsa_spearman;
    std::vector<RankedLayer> largest_w1;
};

/// Ranked lists of the least aligned and most shifted layers; ties keep
/// (model, layer) order. `top` = 0 keeps every layer.
DissimilarityRanking rank_dissimilar(std::span<const LayerReport> reports, std::size_t top = 0);

/// Orders layer names so that digit runs compare numerically (block2 < block10).
bool natural_less(const std::string& a, const std::string& b);

struct AlignResult {
    std::vector<LayerReport> reports;
    std::vector<ModelSummary> summaries;
    DissimilarityRanking ranking;
    std::size_t fdr_tests = 0;
};

/// Metrics for every table (run across options.workers threads), global
/// FDR, summaries and ranking. Reports are sorted by (model, layer).
AlignResult align_tables(const std::vector<ingest::LayerTable>& tables, const AlignOptions& options);

/// Loads the layer manifest, runs align_tables and writes layer_reports.csv,
/// model_summary.csv, dissimilarity.csv (and layer_reports.json) to out_dir.
AlignResult run_align(const std::filesystem::path& layer_manifest,
                      const std::filesystem::path& out_dir, const AlignOptions& options);

void write_layer_reports(const std::filesystem::path& path, std::span<const LayerReport> reports);
std::vector<LayerReport> read_layer_reports(const std::filesystem::path& path);
void write_layer_reports_json(const std::filesystem::path& path,
                              std::span<const LayerReport> reports);
void write_model_summaries(const std::filesystem::path& path,
                           std::span<const ModelSummary> summaries);

/// Criterion,Model.Layer,Value rows, one block per criterion.
void write_ranking(std::ostream& out, const DissimilarityRanking& ranking);
void write_ranking(const std::filesystem::path& path, const DissimilarityRanking& ranking);

enum class FilterMode { Image, Sequence };

struct FilterRun {
    std::size_t outputs = 0;
    std::vector<std::string> metadata;  ///< one JSON line per output image (image mode) or sequence
};

/// Image mode: `input` is one image or a directory of images; each gets a
/// filtered counterpart under `output`. Sequence mode: `input` is a
/// directory of numbered frames sampled at `frame_rate`; filtered frames
/// keep their file names. Metadata lines are also written to `log`.
FilterRun run_filter(const std::filesystem::path& input, const std::filesystem::path& output,
                     const FilterConfig& cfg, FilterMode mode, double frame_rate, std::ostream& log);

}  // namespace felis::pipeline
