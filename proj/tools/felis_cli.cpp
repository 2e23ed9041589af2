// felis: cat-vision filtering and cross-domain alignment reports.
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 internal invariant violation.

#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "felis/error.hpp"
#include "felis/filter_config.hpp"
#include "felis/ingest.hpp"
#include "felis/pipeline.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kDataError = 3;
constexpr int kInvariantError = 4;

// Worker count is the only thing read from the environment.
std::size_t env_workers() {
    const char* text = std::getenv("FELIS_WORKERS");
    if (text == nullptr || *text == '\0') return 1;
    try {
        const long v = std::stol(text);
        return v > 0 ? static_cast<std::size_t>(v) : 1;
    } catch (const std::exception&) {
        return 1;
    }
}

int report(const char* kind, const std::exception& e, int code) {
    std::cerr << "felis: " << kind << ": " << e.what() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cat-vision filtering and human/cat representational alignment"};
    app.require_subcommand(1);

    std::string filter_input;
    std::string filter_output;
    std::string filter_config;
    std::string filter_mode = "image";
    double frame_rate = 30.0;
    auto* filter = app.add_subcommand("filter", "Apply the cat-vision filter to images or frames");
    filter->add_option("input", filter_input, "Image, image directory, or frame directory")
        ->required();
    filter->add_option("output", filter_output, "Output image or directory")->required();
    filter->add_option("--config", filter_config, "JSON filter configuration");
    filter->add_option("--mode", filter_mode, "image or sequence")
        ->check(CLI::IsMember({"image", "sequence"}));
    filter->add_option("--fps", frame_rate, "Frame rate of a sequence in Hz")
        ->check(CLI::PositiveNumber);

    std::string align_manifest;
    felis::pipeline::AlignOptions align_opts;
    std::string align_out = "reports";
    auto* align = app.add_subcommand("align", "Layer-wise alignment, shift tests and FDR");
    align->add_option("layers", align_manifest, "Layer manifest CSV")->required();
    align->add_option("--out", align_out, "Output directory");
    align->add_option("--seed", align_opts.seed, "Master seed");
    align->add_option("--perms-mantel", align_opts.perms_mantel, "Mantel permutations");
    align->add_option("--perms-shift", align_opts.perms_shift, "MMD and energy permutations");
    align->add_option("--fdr-q", align_opts.fdr_q, "Benjamini-Hochberg level");
    align->add_option("--golden-subset-k", align_opts.golden_subset_k,
                      "Keep pairs whose hash is divisible by k");
    align->add_flag("--json", align_opts.json, "Also write layer_reports.json");

    std::string rank_reports;
    std::string rank_out;
    std::size_t rank_top = 0;
    auto* rank = app.add_subcommand("rank", "Rank the most dissimilar layers of a report");
    rank->add_option("reports", rank_reports, "layer_reports.csv")->required();
    rank->add_option("--out", rank_out, "Output CSV (stdout when omitted)");
    rank->add_option("--top", rank_top, "Entries per criterion (0 keeps all)");

    std::string human_dir;
    std::string cat_dir;
    std::string manifest_out;
    auto* manifest = app.add_subcommand("manifest", "Pair human and cat image trees");
    manifest->add_option("human", human_dir, "Human-view image root")->required();
    manifest->add_option("cat", cat_dir, "Cat-view image root")->required();
    manifest->add_option("--out", manifest_out, "Output CSV (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*filter) {
            felis::FilterConfig cfg;
            if (!filter_config.empty()) cfg = felis::load_filter_config(filter_config);
            cfg.validate();
            std::clog << "config " << felis::to_json(cfg).dump() << '\n';
            const auto mode = filter_mode == "sequence" ? felis::pipeline::FilterMode::Sequence
                                                        : felis::pipeline::FilterMode::Image;
            felis::pipeline::run_filter(filter_input, filter_output, cfg, mode, frame_rate,
                                        std::cout);
        } else if (*align) {
            align_opts.workers = env_workers();
            const auto result = felis::pipeline::run_align(align_manifest, align_out, align_opts);
            std::clog << result.reports.size() << " layers, " << result.fdr_tests
                      << " tests in the FDR grid, reports in " << align_out << '\n';
        } else if (*rank) {
            const auto reports = felis::pipeline::read_layer_reports(rank_reports);
            const auto ranking = felis::pipeline::rank_dissimilar(reports, rank_top);
            if (rank_out.empty()) {
                felis::pipeline::write_ranking(std::cout, ranking);
            } else {
                felis::pipeline::write_ranking(std::filesystem::path(rank_out), ranking);
            }
        } else if (*manifest) {
            const auto pairs = felis::ingest::build_manifest(human_dir, cat_dir);
            if (manifest_out.empty()) {
                felis::ingest::write_manifest(std::cout, pairs);
            } else {
                felis::ingest::write_manifest(std::filesystem::path(manifest_out), pairs);
            }
            std::clog << pairs.count(felis::ingest::PairStatus::Ok) << " usable of "
                      << pairs.records.size() << " pairs\n";
            if (pairs.usable().empty()) std::clog << "felis: warning: manifest has no usable pairs\n";
        }
    } catch (const felis::InvalidConfig& e) {
        return report("config error", e, kConfigError);
    } catch (const felis::InvariantViolation& e) {
        return report("internal error", e, kInvariantError);
    } catch (const felis::Error& e) {
        return report("data error", e, kDataError);
    } catch (const nlohmann::json::exception& e) {
        return report("config error", e, kConfigError);
    } catch (const std::filesystem::filesystem_error& e) {
        return report("data error", e, kDataError);
    } catch (const std::exception& e) {
        return report("internal error", e, kInvariantError);
    }
    return 0;
}
