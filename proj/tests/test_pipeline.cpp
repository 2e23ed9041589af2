#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "felis/csv.hpp"
#include "felis/error.hpp"
#include "felis/image_io.hpp"
#include "felis/pipeline.hpp"
#include "support/fixtures.hpp"
#include "support/grid.hpp"

using namespace felis;
using namespace felis::pipeline;
namespace fs = std::filesystem;

namespace {

ingest::LayerTable table_of(const std::string& model, const std::string& layer,
                            const Matrix& human, const Matrix& cat) {
    return ingest::make_layer_table(model, layer, fixture::features(human), fixture::features(cat));
}

AlignOptions fast_options() {
    AlignOptions o;
    o.seed = 11;
    o.perms_mantel = 99;
    o.perms_shift = 99;
    return o;
}

LayerReport report(const std::string& model, const std::string& layer, double cka_linear,
                   double rsa, double w1) {
    LayerReport r;
    r.model = model;
    r.layer = layer;
    r.cka_linear = cka_linear;
    r.cka_rbf = cka_linear;
    r.rsa_spearman = rsa;
    r.w1 = w1;
    return r;
}

std::vector<std::string> names(const std::vector<RankedLayer>& list) {
    std::vector<std::string> out;
    for (const auto& e : list) out.push_back(e.model + "." + e.layer);
    return out;
}

}  // namespace

TEST(NaturalLess, DigitRunsCompareNumerically) {
    EXPECT_TRUE(natural_less("block2", "block10"));
    EXPECT_FALSE(natural_less("block10", "block2"));
    EXPECT_TRUE(natural_less("a", "b"));
    EXPECT_TRUE(natural_less("layer", "layer1"));
    EXPECT_FALSE(natural_less("x7", "x7"));
    EXPECT_TRUE(natural_less("stage1.conv2", "stage1.conv10"));
}

TEST(ComputeLayer, IdentityLayer) {
    const Matrix x = fixture::normal(16, 5, 1);
    const LayerReport r = compute_layer(table_of("m", "l", x, x), fast_options());
    EXPECT_EQ(r.n, 16u);
    EXPECT_NEAR(r.cka_linear, 1.0, 1e-12);
    EXPECT_NEAR(r.cka_rbf, 1.0, 1e-12);
    EXPECT_NEAR(r.rsa_spearman, 1.0, 1e-12);
    EXPECT_NEAR(r.w1, 0.0, 1e-12);
    EXPECT_NEAR(r.mean_cosine, 1.0, 1e-12);
    EXPECT_NEAR(r.mean_l2, 0.0, 1e-12);
    EXPECT_TRUE(r.paired_degenerate);
    EXPECT_EQ(r.paired.p, 1.0);
    EXPECT_EQ(r.pair_cosines.size(), 16u);
    EXPECT_EQ(r.pair_ids, fixture::ids(16));
}

TEST(ComputeLayer, TooFewPairsNamesLayer) {
    const Matrix x = fixture::normal(3, 2, 1);
    try {
        compute_layer(table_of("vit", "blocks.3", x, x), fast_options());
        FAIL();
    } catch (const InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find("vit.blocks.3"), std::string::npos);
    }
}

TEST(ComputeLayer, ConstantLayerIsDegenerateAndNamed) {
    const Matrix x = Matrix::Ones(6, 3);
    try {
        compute_layer(table_of("m", "flat", x, fixture::normal(6, 3, 2)), fast_options());
        FAIL();
    } catch (const DegenerateInput& e) {
        EXPECT_NE(std::string(e.what()).find("m.flat"), std::string::npos);
    }
}

TEST(AlignTables, ShiftedLayerSurvivesFdrNullDoesNot) {
    const Matrix x = fixture::normal(20, 3, 5);
    const Matrix shifted = x.array() + 10.0;
    const Matrix jitter = x + 0.01 * fixture::normal(20, 3, 6);
    AlignOptions o = fast_options();
    o.perms_shift = 200;
    const auto result = align_tables({table_of("m", "null", x, jitter), table_of("m", "shift", x, shifted)}, o);
    ASSERT_EQ(result.reports.size(), 2u);
    EXPECT_EQ(result.fdr_tests, 8u);
    const LayerReport& null_layer = result.reports[0];
    const LayerReport& shift_layer = result.reports[1];
    ASSERT_EQ(shift_layer.layer, "shift");
    EXPECT_NEAR(shift_layer.mmd.p, 1.0 / 201.0, 1e-15);
    EXPECT_NEAR(shift_layer.energy.p, 1.0 / 201.0, 1e-15);
    EXPECT_TRUE(shift_layer.mmd.rejected);
    EXPECT_TRUE(shift_layer.energy.rejected);
    EXPECT_FALSE(null_layer.mmd.rejected);
    EXPECT_FALSE(null_layer.energy.rejected);
}

TEST(AlignTables, EveryPValueHasAQValue) {
    const auto grid = fixture::synthetic_grid(2, 3, 12, 4, 1);
    std::vector<ingest::LayerTable> tables;
    for (const auto& g : grid) tables.push_back(table_of(g.model, g.layer, g.human, g.cat));
    const auto result = align_tables(tables, fast_options());
    EXPECT_EQ(result.fdr_tests, tables.size() * kTestedMetrics.size());
    for (const auto& r : result.reports) {
        for (const TestedMetric* t : {&r.mantel, &r.mmd, &r.energy, &r.paired}) {
            EXPECT_GE(t->q, t->p);
            EXPECT_LE(t->q, 1.0);
            EXPECT_EQ(t->rejected, t->q <= 0.05);
        }
    }
}

TEST(AlignTables, WorkerCountDoesNotChangeResults) {
    const auto grid = fixture::synthetic_grid(2, 3, 12, 4, 2);
    std::vector<ingest::LayerTable> tables;
    for (const auto& g : grid) tables.push_back(table_of(g.model, g.layer, g.human, g.cat));
    AlignOptions one = fast_options();
    AlignOptions many = fast_options();
    many.workers = 5;
    const auto a = align_tables(tables, one);
    const auto b = align_tables(tables, many);
    ASSERT_EQ(a.reports.size(), b.reports.size());
    for (std::size_t i = 0; i < a.reports.size(); ++i) {
        EXPECT_EQ(a.reports[i].layer, b.reports[i].layer);
        EXPECT_EQ(a.reports[i].mantel.p, b.reports[i].mantel.p);
        EXPECT_EQ(a.reports[i].mmd.p, b.reports[i].mmd.p);
        EXPECT_EQ(a.reports[i].energy.q, b.reports[i].energy.q);
    }
}

TEST(AlignTables, DuplicateLayerRejected) {
    const Matrix x = fixture::normal(8, 2, 1);
    EXPECT_THROW(align_tables({table_of("m", "l", x, x), table_of("m", "l", x, x)}, fast_options()),
                 InvalidInput);
}

TEST(AlignTables, GoldenSubsetShrinksLayers) {
    const Matrix x = fixture::normal(200, 3, 1);
    AlignOptions o = fast_options();
    o.golden_subset_k = 4;
    const auto result = align_tables({table_of("m", "l", x, x)}, o);
    EXPECT_LT(result.reports[0].n, 200u);
    EXPECT_GT(result.reports[0].n, 20u);
}

TEST(Summarize, MeansMaxAndArgmax) {
    std::vector<LayerReport> reports{report("a", "l1", 0.2, 0.1, 1.0),
                                     report("a", "l2", 0.9, 0.3, 2.0),
                                     report("a", "l3", 0.4, 0.2, 3.0),
                                     report("b", "l1", 0.5, 0.5, 0.5)};
    reports[1].cka_rbf = 0.3;
    const auto s = summarize(reports);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0].layers, 3u);
    EXPECT_NEAR(s[0].cka_linear.mean, (0.2 + 0.9 + 0.4) / 3.0, 1e-12);
    EXPECT_NEAR(s[0].w1.mean, 2.0, 1e-12);
    EXPECT_EQ(s[0].cka_linear.max, 0.9);
    EXPECT_EQ(s[0].best_layer_by_cka_linear, "l2");
    EXPECT_EQ(s[0].best_layer_by_cka_rbf, "l3");
    EXPECT_EQ(s[1].best_layer_by_cka_rbf, "l1");
}

TEST(Summarize, PropertiesOnRandomReports) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<LayerReport> reports;
        const int layers = 1 + trial % 7;
        for (int l = 0; l < layers; ++l) {
            reports.push_back(report("m", "layer" + std::to_string(l), u(rng), u(rng), u(rng)));
            reports.back().cka_rbf = u(rng);
        }
        const auto s = summarize(reports)[0];
        double sum = 0.0;
        std::size_t best = 0;
        for (int l = 0; l < layers; ++l) {
            sum += reports[l].cka_rbf;
            if (reports[l].cka_rbf > reports[best].cka_rbf) best = static_cast<std::size_t>(l);
        }
        EXPECT_NEAR(s.cka_rbf.mean, sum / layers, 1e-12);
        EXPECT_EQ(s.best_layer_by_cka_rbf, reports[best].layer);

        const double scale = 0.01 + 5.0 * u(rng);
        for (auto& r : reports) r.cka_rbf *= scale;
        EXPECT_EQ(summarize(reports)[0].best_layer_by_cka_rbf, s.best_layer_by_cka_rbf);
    }
}

TEST(Summarize, TiesGoToFirstLayer) {
    const std::vector<LayerReport> reports{report("m", "a", 0.5, 0, 0), report("m", "b", 0.5, 0, 0)};
    EXPECT_EQ(summarize(reports)[0].best_layer_by_cka_linear, "a");
}

TEST(RankDissimilar, SingleLayerTopsEveryList) {
    const std::vector<LayerReport> reports{report("m", "only", 0.7, 0.6, 0.2)};
    const auto r = rank_dissimilar(reports);
    EXPECT_EQ(names(r.lowest_cka_linear), std::vector<std::string>{"m.only"});
    EXPECT_EQ(names(r.lowest_rsa_spearman), std::vector<std::string>{"m.only"});
    EXPECT_EQ(names(r.largest_w1), std::vector<std::string>{"m.only"});
}

TEST(RankDissimilar, ConstructedOrdering) {
    const std::vector<LayerReport> reports{
        report("cnn", "stage4", 0.8, 0.7, 0.1), report("cnn", "stage1", 0.3, 0.5, 0.9),
        report("vit", "block2", 0.5, 0.2, 0.4), report("vit", "block10", 0.6, 0.4, 0.6)};
    const auto r = rank_dissimilar(reports);
    EXPECT_EQ(names(r.lowest_cka_linear),
              (std::vector<std::string>{"cnn.stage1", "vit.block2", "vit.block10", "cnn.stage4"}));
    EXPECT_EQ(names(r.lowest_rsa_spearman),
              (std::vector<std::string>{"vit.block2", "vit.block10", "cnn.stage1", "cnn.stage4"}));
    EXPECT_EQ(names(r.largest_w1),
              (std::vector<std::string>{"cnn.stage1", "vit.block10", "vit.block2", "cnn.stage4"}));
    EXPECT_EQ(r.lowest_cka_linear[0].value, 0.3);
    const auto top2 = rank_dissimilar(reports, 2);
    EXPECT_EQ(top2.largest_w1.size(), 2u);
}

TEST(RankDissimilar, TiesKeepModelLayerOrder) {
    const std::vector<LayerReport> reports{report("b", "l1", 0.4, 0, 0), report("a", "l10", 0.4, 0, 0),
                                           report("a", "l2", 0.4, 0, 0)};
    EXPECT_EQ(names(rank_dissimilar(reports).lowest_cka_linear),
              (std::vector<std::string>{"a.l2", "a.l10", "b.l1"}));
}

TEST(RankDissimilar, CsvLayout) {
    const std::vector<LayerReport> reports{report("m", "x", 0.25, 0.5, 1.5)};
    std::ostringstream out;
    write_ranking(out, rank_dissimilar(reports));
    EXPECT_EQ(out.str(),
              "criterion,model_layer,value\n"
              "lowest_cka_linear,m.x,0.25\n"
              "lowest_rsa_spearman,m.x,0.5\n"
              "largest_w1,m.x,1.5\n");
}

TEST(RunAlign, ByteIdenticalReruns) {
    fixture::TempDir dir;
    const auto manifest = fixture::write_grid(dir / "in", fixture::synthetic_grid(2, 2, 10, 3, 4));
    AlignOptions o = fast_options();
    o.json = true;
    run_align(manifest, dir / "out1", o);
    o.workers = 3;
    run_align(manifest, dir / "out2", o);
    for (const char* f : {"layer_reports.csv", "model_summary.csv", "dissimilarity.csv",
                          "layer_reports.json"}) {
        const std::string a = fixture::slurp(dir / "out1" / f);
        EXPECT_FALSE(a.empty()) << f;
        EXPECT_EQ(a, fixture::slurp(dir / "out2" / f)) << f;
    }
}

TEST(RunAlign, ReportsReadBack) {
    fixture::TempDir dir;
    const auto manifest = fixture::write_grid(dir / "in", fixture::synthetic_grid(1, 3, 10, 3, 5));
    const auto result = run_align(manifest, dir / "out", fast_options());
    const auto back = read_layer_reports(dir / "out" / "layer_reports.csv");
    ASSERT_EQ(back.size(), result.reports.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_EQ(back[i].layer, result.reports[i].layer);
        EXPECT_EQ(back[i].n, result.reports[i].n);
        EXPECT_NEAR(back[i].cka_linear, result.reports[i].cka_linear, 1e-11);
        EXPECT_NEAR(back[i].mmd.q, result.reports[i].mmd.q, 1e-11);
        EXPECT_EQ(back[i].paired.rejected, result.reports[i].paired.rejected);
        EXPECT_EQ(back[i].paired_test_type, result.reports[i].paired_test_type);
    }
    const auto summary = csv::read(dir / "out" / "model_summary.csv");
    ASSERT_EQ(summary.rows.size(), 1u);
    EXPECT_EQ(summary.rows[0][summary.column("layers")], "3");
}

TEST(RunAlign, MisalignedSidecarNamesLayer) {
    fixture::TempDir dir;
    const auto manifest = fixture::write_grid(dir / "in", fixture::synthetic_grid(1, 1, 8, 2, 5));
    ingest::write_sidecar(dir / "in" / "pairs.txt", fixture::ids(7, "scene_"));
    EXPECT_THROW(run_align(manifest, dir / "out", fast_options()), InvalidInput);
}

TEST(RunFilter, DirectoryOfImages) {
    fixture::TempDir dir;
    fs::create_directories(dir / "in");
    for (int i = 0; i < 3; ++i) {
        RgbImage img(8, 6, 0.1 * (i + 1));
        io::write_image(dir / "in" / ("img" + std::to_string(i) + ".png"), img);
    }
    fixture::spit(dir / "in" / "notes.txt", "skip me");
    std::ostringstream log;
    const auto run = run_filter(dir / "in", dir / "out", FilterConfig{}, FilterMode::Image, 30.0, log);
    EXPECT_EQ(run.outputs, 3u);
    EXPECT_EQ(run.metadata.size(), 3u);
    for (int i = 0; i < 3; ++i) {
        EXPECT_TRUE(fs::exists(dir / "out" / ("img" + std::to_string(i) + ".png")));
    }
    std::size_t lines = 0;
    std::istringstream in(log.str());
    for (std::string line; std::getline(in, line);) ++lines;
    EXPECT_EQ(lines, 3u);
    EXPECT_NE(run.metadata[0].find("\"motion\":\"skipped\""), std::string::npos);
}

TEST(RunFilter, SingleFileToNamedOutput) {
    fixture::TempDir dir;
    io::write_image(dir / "x.png", RgbImage(5, 5, 0.5));
    std::ostringstream log;
    run_filter(dir / "x.png", dir / "sub" / "y.png", FilterConfig{}, FilterMode::Image, 30.0, log);
    EXPECT_TRUE(fs::exists(dir / "sub" / "y.png"));
}

TEST(RunFilter, SequenceKeepsFrameNames) {
    fixture::TempDir dir;
    fs::create_directories(dir / "frames");
    for (int t = 0; t < 4; ++t) {
        RgbImage img(8, 8);
        for (std::size_t r = 0; r < 8; ++r) {
            for (std::size_t c = 0; c < 8; ++c) {
                for (std::size_t ch = 0; ch < 3; ++ch) {
                    img.at(r, c, ch) = 0.5 + 0.4 * std::sin(0.8 * static_cast<double>(c) + t);
                }
            }
        }
        io::write_image(dir / "frames" / ("f" + std::to_string(t) + ".png"), img);
    }
    std::ostringstream log;
    const auto run =
        run_filter(dir / "frames", dir / "out", FilterConfig{}, FilterMode::Sequence, 30.0, log);
    EXPECT_EQ(run.outputs, 4u);
    ASSERT_EQ(run.metadata.size(), 1u);
    EXPECT_NE(run.metadata[0].find("\"frames\":4"), std::string::npos);
    EXPECT_NE(run.metadata[0].find("\"temporal\":\"applied\""), std::string::npos);
    for (int t = 0; t < 4; ++t) EXPECT_TRUE(fs::exists(dir / "out" / ("f" + std::to_string(t) + ".png")));
}

TEST(RunFilter, UnreadableInput) {
    fixture::TempDir dir;
    std::ostringstream log;
    EXPECT_THROW(run_filter(dir / "absent", dir / "out", FilterConfig{}, FilterMode::Image, 30.0, log),
                 InvalidInput);
    EXPECT_THROW(run_filter(dir / "absent", dir / "out", FilterConfig{}, FilterMode::Sequence, 30.0, log),
                 InvalidInput);
}
