#include "felis/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include <json.hpp>

#include "felis/cat_vision.hpp"
#include "felis/csv.hpp"
#include "felis/distshift.hpp"
#include "felis/error.hpp"
#include "felis/fdr.hpp"
#include "felis/image_io.hpp"
#include "felis/random.hpp"
#include "felis/repgeom.hpp"

namespace fs = std::filesystem;

namespace felis::pipeline {

namespace {

constexpr std::size_t kMinPairs = 4;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string fmt(std::size_t v) { return std::to_string(v); }

std::string fmt(bool v) { return v ? "true" : "false"; }

double parse_double(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw InvalidInput("cannot parse " + what + " value '" + text + "'");
    }
}

std::uint64_t cell_seed(std::uint64_t seed, const std::string& model, const std::string& layer,
                        const char* metric) {
    return stats::stable_hash(model + '\x1f' + layer + '\x1f' + metric, seed);
}

// Re-raises a metric failure with the layer's name, keeping its category.
[[noreturn]] void rethrow_for_layer(const std::string& name) {
    try {
        throw;
    } catch (const DegenerateInput& e) {
        throw DegenerateInput("layer " + name + ": " + e.what());
    } catch (const InvalidInput& e) {
        throw InvalidInput("layer " + name + ": " + e.what());
    }
}

TestedMetric& tested(LayerReport& r, std::size_t index) {
    switch (index) {
        case 0: return r.mantel;
        case 1: return r.mmd;
        case 2: return r.energy;
        default: return r.paired;
    }
}

bool layer_order(const LayerReport& a, const LayerReport& b) {
    if (a.model != b.model) return natural_less(a.model, b.model);
    return natural_less(a.layer, b.layer);
}

}  // namespace

bool natural_less(const std::string& a, const std::string& b) {
    std::size_t i = 0;
    std::size_t j = 0;
    const auto digit = [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)) != 0; };
    while (i < a.size() && j < b.size()) {
        if (digit(a[i]) && digit(b[j])) {
            std::size_t ie = i;
            std::size_t je = j;
            while (ie < a.size() && digit(a[ie])) ++ie;
            while (je < b.size() && digit(b[je])) ++je;
            // Compare digit runs by value: strip leading zeros, then length, then text.
            std::size_t is = i;
            std::size_t js = j;
            while (is + 1 < ie && a[is] == '0') ++is;
            while (js + 1 < je && b[js] == '0') ++js;
            if (ie - is != je - js) return ie - is < je - js;
            const int cmp = a.compare(is, ie - is, b, js, je - js);
            if (cmp != 0) return cmp < 0;
            i = ie;
            j = je;
        } else {
            if (a[i] != b[j]) return a[i] < b[j];
            ++i;
            ++j;
        }
    }
    if (a.size() - i != b.size() - j) return a.size() - i < b.size() - j;
    return a < b;
}

LayerReport compute_layer(const ingest::LayerTable& table, const AlignOptions& options) {
    const std::string name = table.model + "." + table.layer;
    if (table.n() < kMinPairs) {
        throw InvalidInput("layer " + name + ": " + std::to_string(table.n()) +
                           " pairs, at least 4 required");
    }
    const Matrix& x = table.human.values;
    const Matrix& y = table.cat.values;

    LayerReport r;
    r.model = table.model;
    r.layer = table.layer;
    r.n = table.n();
    r.pair_ids = table.human.pair_ids;
    try {
        r.cka_linear = repgeom::cka_linear(x, y);
        r.cka_rbf = repgeom::cka_rbf(x, y, repgeom::Bandwidth::median_heuristic());

        const auto mantel = repgeom::mantel(
            repgeom::rdm_cosine(table.human), repgeom::rdm_cosine(table.cat), options.perms_mantel,
            cell_seed(options.seed, table.model, table.layer, "mantel"),
            repgeom::Correlation::Spearman);
        r.rsa_spearman = mantel.r;
        r.mantel_r = mantel.r;
        r.mantel.p = mantel.p;

        const auto mmd = shift::mmd_perm_test(
            x, y, repgeom::Bandwidth::median_heuristic(), options.perms_shift,
            cell_seed(options.seed, table.model, table.layer, "mmd"));
        r.mmd_stat = mmd.statistic;
        r.mmd_bandwidth = mmd.bandwidth_used.value_or(0.0);
        r.mmd.p = mmd.p_value.value_or(1.0);

        const auto energy = shift::energy_perm_test(
            x, y, options.perms_shift, cell_seed(options.seed, table.model, table.layer, "energy"));
        r.energy_stat = energy.statistic;
        r.energy.p = energy.p_value.value_or(1.0);

        r.w1 = shift::w1_projected(x, y).statistic;

        const auto similarity = shift::paired_similarity(table.human, table.cat);
        r.pair_cosines = similarity.cosines;
        r.pair_distances = similarity.distances;

        const auto paired = shift::paired_shift_test(table.human, table.cat);
        r.mean_cosine = paired.mean_cosine;
        r.mean_l2 = paired.mean_l2;
        r.paired_test_type = shift::to_string(paired.test_type);
        r.paired_stat = paired.statistic;
        r.paired.p = paired.p_value;
        r.shapiro_p = paired.shapiro_p;
        r.paired_degenerate = paired.degenerate;
        r.pair_projections = paired.projections;
    } catch (const Error&) {
        rethrow_for_layer(name);
    }
    return r;
}

std::size_t apply_fdr(std::vector<LayerReport>& reports, double q) {
    stats::PvalueGrid grid;
    for (const auto& r : reports) {
        for (std::size_t m = 0; m < kTestedMetrics.size(); ++m) {
            grid.entries.push_back({r.model, r.layer, kTestedMetrics[m],
                                    tested(const_cast<LayerReport&>(r), m).p});
        }
    }
    if (grid.entries.empty()) return 0;
    const stats::FdrOutcome outcome = stats::bh_fdr(grid, q);
    std::size_t k = 0;
    for (auto& r : reports) {
        for (std::size_t m = 0; m < kTestedMetrics.size(); ++m, ++k) {
            tested(r, m).q = outcome.q_values[k];
            tested(r, m).rejected = outcome.rejected[k];
        }
    }
    if (k != grid.entries.size()) {
        throw InvariantViolation("FDR grid size does not match the number of reported p-values");
    }
    return grid.entries.size();
}

std::vector<ModelSummary> summarize(std::span<const LayerReport> reports) {
    std::vector<ModelSummary> out;
    std::map<std::string, std::size_t> index;
    for (const auto& r : reports) {
        auto [it, inserted] = index.try_emplace(r.model, out.size());
        if (inserted) {
            ModelSummary s;
            s.model = r.model;
            s.cka_linear.max = r.cka_linear;
            s.cka_rbf.max = r.cka_rbf;
            s.rsa_spearman.max = r.rsa_spearman;
            s.mean_cosine.max = r.mean_cosine;
            s.mean_l2.max = r.mean_l2;
            s.w1.max = r.w1;
            s.best_layer_by_cka_rbf = r.layer;
            s.best_layer_by_cka_linear = r.layer;
            out.push_back(std::move(s));
        }
        ModelSummary& s = out[it->second];
        const auto add = [](MetricAggregate& agg, double v) {
            agg.mean += v;
            agg.max = std::max(agg.max, v);
        };
        if (!inserted) {
            if (r.cka_rbf > s.cka_rbf.max) s.best_layer_by_cka_rbf = r.layer;
            if (r.cka_linear > s.cka_linear.max) s.best_layer_by_cka_linear = r.layer;
        }
        add(s.cka_linear, r.cka_linear);
        add(s.cka_rbf, r.cka_rbf);
        add(s.rsa_spearman, r.rsa_spearman);
        add(s.mean_cosine, r.mean_cosine);
        add(s.mean_l2, r.mean_l2);
        add(s.w1, r.w1);
        ++s.layers;
    }
    for (auto& s : out) {
        const double n = static_cast<double>(s.layers);
        for (MetricAggregate* agg :
             {&s.cka_linear, &s.cka_rbf, &s.rsa_spearman, &s.mean_cosine, &s.mean_l2, &s.w1}) {
            agg->mean /= n;
        }
    }
    return out;
}

DissimilarityRanking rank_dissimilar(std::span<const LayerReport> reports, std::size_t top) {
    std::vector<const LayerReport*> ordered;
    ordered.reserve(reports.size());
    for (const auto& r : reports) ordered.push_back(&r);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const LayerReport* a, const LayerReport* b) { return layer_order(*a, *b); });

    const auto ranked = [&](double LayerReport::*field, bool ascending) {
        std::vector<const LayerReport*> list = ordered;
        std::stable_sort(list.begin(), list.end(), [&](const LayerReport* a, const LayerReport* b) {
            return ascending ? a->*field < b->*field : a->*field > b->*field;
        });
        if (top > 0 && list.size() > top) list.resize(top);
        std::vector<RankedLayer> out;
        out.reserve(list.size());
        for (const LayerReport* r : list) out.push_back({r->model, r->layer, r->*field});
        return out;
    };
    DissimilarityRanking ranking;
    ranking.lowest_cka_linear = ranked(&LayerReport::cka_linear, true);
    ranking.lowest_rsa_spearman = ranked(&LayerReport::rsa_spearman, true);
    ranking.largest_w1 = ranked(&LayerReport::w1, false);
    return ranking;
}

AlignResult align_tables(const std::vector<ingest::LayerTable>& tables, const AlignOptions& options) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& t : tables) {
        if (!seen.emplace(t.model, t.layer).second) {
            throw InvalidInput("layer " + t.model + "." + t.layer + " listed twice");
        }
    }
    std::vector<ingest::LayerTable> subsets;
    const bool subset = options.golden_subset_k > 1;
    if (subset) {
        subsets.reserve(tables.size());
        for (const auto& t : tables) {
            subsets.push_back(ingest::golden_subset(t, options.golden_subset_k, options.seed));
        }
    }
    const auto& work = subset ? subsets : tables;

    AlignResult result;
    result.reports.resize(work.size());
    stats::parallel_for(work.size(), options.workers, [&](std::size_t i) {
        result.reports[i] = compute_layer(work[i], options);
    });
    std::stable_sort(result.reports.begin(), result.reports.end(), layer_order);
    result.fdr_tests = apply_fdr(result.reports, options.fdr_q);
    if (result.fdr_tests != result.reports.size() * kTestedMetrics.size()) {
        throw InvariantViolation("every p-value must enter the FDR grid exactly once");
    }
    result.summaries = summarize(result.reports);
    result.ranking = rank_dissimilar(result.reports);
    return result;
}

AlignResult run_align(const fs::path& layer_manifest, const fs::path& out_dir,
                      const AlignOptions& options) {
    const auto rows = ingest::read_layer_manifest(layer_manifest);
    std::vector<ingest::LayerTable> tables;
    tables.reserve(rows.size());
    for (const auto& row : rows) {
        FeatureMatrix human = ingest::load_feature_matrix(row.human_feature_path, row.sidecar_path);
        FeatureMatrix cat = ingest::load_feature_matrix(row.cat_feature_path, row.sidecar_path);
        tables.push_back(
            ingest::make_layer_table(row.model, row.layer, std::move(human), std::move(cat)));
    }
    AlignResult result = align_tables(tables, options);

    fs::create_directories(out_dir);
    write_layer_reports(out_dir / "layer_reports.csv", result.reports);
    write_model_summaries(out_dir / "model_summary.csv", result.summaries);
    write_ranking(out_dir / "dissimilarity.csv", result.ranking);
    if (options.json) write_layer_reports_json(out_dir / "layer_reports.json", result.reports);
    return result;
}

namespace {

const std::vector<std::string> kReportColumns{
    "model",         "layer",          "n",              "cka_linear",      "cka_rbf",
    "rsa_spearman",  "mantel_r",       "mantel_p",       "mantel_q",        "mantel_reject",
    "mmd_stat",      "mmd_bandwidth",  "mmd_p",          "mmd_q",           "mmd_reject",
    "energy_stat",   "energy_p",       "energy_q",       "energy_reject",   "w1",
    "mean_cosine",   "mean_l2",        "paired_test_type", "paired_stat",   "paired_p",
    "paired_q",      "paired_reject",  "shapiro_p",      "paired_degenerate"};

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InvalidInput("cannot write " + path.string());
    }
    return out;
}

bool parse_bool(const std::string& text) {
    if (text == "true") return true;
    if (text == "false") return false;
    throw InvalidInput("expected true/false, found '" + text + "'");
}

}  // namespace

void write_layer_reports(const fs::path& path, std::span<const LayerReport> reports) {
    std::ofstream out = open_output(path);
    out << csv::join(kReportColumns) << '\n';
    for (const auto& r : reports) {
        out << csv::join({r.model,
                          r.layer,
                          fmt(r.n),
                          fmt(r.cka_linear),
                          fmt(r.cka_rbf),
                          fmt(r.rsa_spearman),
                          fmt(r.mantel_r),
                          fmt(r.mantel.p),
                          fmt(r.mantel.q),
                          fmt(r.mantel.rejected),
                          fmt(r.mmd_stat),
                          fmt(r.mmd_bandwidth),
                          fmt(r.mmd.p),
                          fmt(r.mmd.q),
                          fmt(r.mmd.rejected),
                          fmt(r.energy_stat),
                          fmt(r.energy.p),
                          fmt(r.energy.q),
                          fmt(r.energy.rejected),
                          fmt(r.w1),
                          fmt(r.mean_cosine),
                          fmt(r.mean_l2),
                          r.paired_test_type,
                          r.paired_stat ? fmt(*r.paired_stat) : std::string(),
                          fmt(r.paired.p),
                          fmt(r.paired.q),
                          fmt(r.paired.rejected),
                          fmt(r.shapiro_p),
                          fmt(r.paired_degenerate)})
            << '\n';
    }
}

std::vector<LayerReport> read_layer_reports(const fs::path& path) {
    const csv::Table table = csv::read(path);
    std::map<std::string, std::size_t> col;
    for (const auto& name : kReportColumns) col[name] = table.column(name);

    std::vector<LayerReport> reports;
    for (const auto& row : table.rows) {
        const auto num = [&](const char* name) { return parse_double(row[col.at(name)], name); };
        const auto flag = [&](const char* name) { return parse_bool(row[col.at(name)]); };
        LayerReport r;
        r.model = row[col.at("model")];
        r.layer = row[col.at("layer")];
        r.n = static_cast<std::size_t>(num("n"));
        r.cka_linear = num("cka_linear");
        r.cka_rbf = num("cka_rbf");
        r.rsa_spearman = num("rsa_spearman");
        r.mantel_r = num("mantel_r");
        r.mantel = {num("mantel_p"), num("mantel_q"), flag("mantel_reject")};
        r.mmd_stat = num("mmd_stat");
        r.mmd_bandwidth = num("mmd_bandwidth");
        r.mmd = {num("mmd_p"), num("mmd_q"), flag("mmd_reject")};
        r.energy_stat = num("energy_stat");
        r.energy = {num("energy_p"), num("energy_q"), flag("energy_reject")};
        r.w1 = num("w1");
        r.mean_cosine = num("mean_cosine");
        r.mean_l2 = num("mean_l2");
        r.paired_test_type = row[col.at("paired_test_type")];
        if (!row[col.at("paired_stat")].empty()) r.paired_stat = num("paired_stat");
        r.paired = {num("paired_p"), num("paired_q"), flag("paired_reject")};
        r.shapiro_p = num("shapiro_p");
        r.paired_degenerate = flag("paired_degenerate");
        reports.push_back(std::move(r));
    }
    return reports;
}

void write_layer_reports_json(const fs::path& path, std::span<const LayerReport> reports) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::json tests = nlohmann::json::object();
        for (std::size_t m = 0; m < kTestedMetrics.size(); ++m) {
            const TestedMetric& t = tested(const_cast<LayerReport&>(r), m);
            tests[kTestedMetrics[m]] = {{"p", t.p}, {"q", t.q}, {"rejected", t.rejected}};
        }
        doc.push_back({
            {"model", r.model},
            {"layer", r.layer},
            {"n", r.n},
            {"cka_linear", r.cka_linear},
            {"cka_rbf", r.cka_rbf},
            {"rsa_spearman", r.rsa_spearman},
            {"mantel_r", r.mantel_r},
            {"mmd_stat", r.mmd_stat},
            {"mmd_bandwidth", r.mmd_bandwidth},
            {"energy_stat", r.energy_stat},
            {"w1", r.w1},
            {"mean_cosine", r.mean_cosine},
            {"mean_l2", r.mean_l2},
            {"paired_test_type", r.paired_test_type},
            {"paired_stat", r.paired_stat ? nlohmann::json(*r.paired_stat) : nlohmann::json()},
            {"shapiro_p", r.shapiro_p},
            {"paired_degenerate", r.paired_degenerate},
            {"tests", tests},
            {"pairs",
             {{"pair_id", r.pair_ids},
              {"cosine", r.pair_cosines},
              {"l2", r.pair_distances},
              {"projection", r.pair_projections}}},
        });
    }
    std::ofstream out = open_output(path);
    out << doc.dump(2) << '\n';
}

void write_model_summaries(const fs::path& path, std::span<const ModelSummary> summaries) {
    std::ofstream out = open_output(path);
    out << "model,layers,cka_rbf_mean,cka_rbf_max,cka_linear_mean,cka_linear_max,"
           "rsa_spearman_mean,rsa_spearman_max,mean_cosine_mean,mean_cosine_max,"
           "mean_l2_mean,mean_l2_max,w1_mean,w1_max,best_layer_by_cka_rbf,"
           "best_layer_by_cka_linear\n";
    for (const auto& s : summaries) {
        out << csv::join({s.model, fmt(s.layers), fmt(s.cka_rbf.mean), fmt(s.cka_rbf.max),
                          fmt(s.cka_linear.mean), fmt(s.cka_linear.max), fmt(s.rsa_spearman.mean),
                          fmt(s.rsa_spearman.max), fmt(s.mean_cosine.mean), fmt(s.mean_cosine.max),
                          fmt(s.mean_l2.mean), fmt(s.mean_l2.max), fmt(s.w1.mean), fmt(s.w1.max),
                          s.best_layer_by_cka_rbf, s.best_layer_by_cka_linear})
            << '\n';
    }
}

void write_ranking(std::ostream& out, const DissimilarityRanking& ranking) {
    out << "criterion,model_layer,value\n";
    const auto block = [&](const char* name, const std::vector<RankedLayer>& list) {
        for (const auto& e : list) {
            out << csv::join({name, e.model + "." + e.layer, fmt(e.value)}) << '\n';
        }
    };
    block("lowest_cka_linear", ranking.lowest_cka_linear);
    block("lowest_rsa_spearman", ranking.lowest_rsa_spearman);
    block("largest_w1", ranking.largest_w1);
}

void write_ranking(const fs::path& path, const DissimilarityRanking& ranking) {
    std::ofstream out = open_output(path);
    write_ranking(out, ranking);
}

namespace {

std::string flag_text(bool skipped) { return skipped ? "skipped" : "applied"; }

}  // namespace

FilterRun run_filter(const fs::path& input, const fs::path& output, const FilterConfig& cfg,
                     FilterMode mode, double frame_rate, std::ostream& log) {
    cfg.validate();
    FilterRun run;
    std::error_code ec;

    if (mode == FilterMode::Sequence) {
        const auto frames = io::numbered_frames(input);
        if (frames.empty()) {
            throw InvalidInput("no frames found in " + input.string());
        }
        FrameSequence seq;
        seq.frame_rate = frame_rate;
        for (const auto& f : frames) seq.frames.push_back(io::read_image(f));
        const auto result = filter::apply_cat_vision(seq, cfg);
        fs::create_directories(output);
        for (std::size_t t = 0; t < frames.size(); ++t) {
            io::write_image(output / frames[t].filename(), result.sequence.frames[t]);
        }
        run.outputs = frames.size();
        nlohmann::json meta = {{"input", input.generic_string()},
                               {"output", output.generic_string()},
                               {"frames", frames.size()},
                               {"frame_rate", frame_rate},
                               {"temporal", flag_text(result.flags.temporal_skipped)},
                               {"motion", flag_text(result.flags.motion_skipped)}};
        run.metadata.push_back(meta.dump());
        log << run.metadata.back() << '\n';
        return run;
    }

    std::vector<std::pair<fs::path, fs::path>> jobs;
    if (fs::is_directory(input, ec)) {
        std::vector<fs::path> images;
        for (const auto& entry : fs::directory_iterator(input)) {
            if (entry.is_regular_file() && io::has_image_extension(entry.path())) {
                images.push_back(entry.path());
            }
        }
        std::sort(images.begin(), images.end());
        fs::create_directories(output);
        for (const auto& img : images) jobs.emplace_back(img, output / img.filename());
    } else if (fs::is_regular_file(input, ec)) {
        if (io::has_image_extension(output)) {
            if (output.has_parent_path()) fs::create_directories(output.parent_path());
            jobs.emplace_back(input, output);
        } else {
            fs::create_directories(output);
            jobs.emplace_back(input, output / input.filename());
        }
    } else {
        throw InvalidInput("input " + input.string() + " is not readable");
    }

    for (const auto& [src, dst] : jobs) {
        const RgbImage img = io::read_image(src);
        const auto result = filter::apply_cat_vision(img, cfg);
        io::write_image(dst, result.image);
        nlohmann::json meta = {{"input", src.generic_string()},
                               {"output", dst.generic_string()},
                               {"height", img.height()},
                               {"width", img.width()},
                               {"temporal", flag_text(result.flags.temporal_skipped)},
                               {"motion", flag_text(result.flags.motion_skipped)}};
        run.metadata.push_back(meta.dump());
        log << run.metadata.back() << '\n';
        ++run.outputs;
    }
    return run;
}

}  // namespace felis::pipeline
