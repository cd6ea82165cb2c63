#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "plad/error.hpp"
#include "plad/pipeline.hpp"
#include "plad/png_io.hpp"
#include "plad/synthgear.hpp"
#include "test_util.hpp"

using namespace plad;
namespace fs = std::filesystem;

namespace {

class PipelineTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        root_ = new fs::path(test::scratch_dir("pipeline_data"));
        synth::DatasetOptions options;
        options.write_masks = false;
        synth::generate_dataset(*root_, 15, 5, 5, 42, options);
        layout_ = new DatasetLayout(scan_dataset(*root_));
        TrainOptions opts;
        patchcore_ = new TrainResult(train(*layout_, opts));
        opts.algorithm = Algorithm::PaDiM;
        padim_ = new TrainResult(train(*layout_, opts));
    }
    static void TearDownTestSuite() {
        delete padim_;
        delete patchcore_;
        delete layout_;
        delete root_;
    }

    static fs::path* root_;
    static DatasetLayout* layout_;
    static TrainResult* patchcore_;
    static TrainResult* padim_;
};

fs::path* PipelineTest::root_ = nullptr;
DatasetLayout* PipelineTest::layout_ = nullptr;
TrainResult* PipelineTest::patchcore_ = nullptr;
TrainResult* PipelineTest::padim_ = nullptr;

std::vector<fs::path> numbered(std::size_t n) {
    std::vector<fs::path> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("img" + std::to_string(i) + ".png");
    return out;
}

}  // namespace

TEST(Split, FifteenFive) {
    const auto files = numbered(20);
    const auto [train, held] = split_train_test(files, 15, 42);
    EXPECT_EQ(train.size(), 15u);
    EXPECT_EQ(held.size(), 5u);
    std::set<fs::path> all(train.begin(), train.end());
    all.insert(held.begin(), held.end());
    EXPECT_EQ(all.size(), 20u);

    const auto again = split_train_test(files, 15, 42);
    EXPECT_EQ(again.first, train);
    EXPECT_EQ(again.second, held);
    EXPECT_NE(split_train_test(files, 15, 7).first, train);
}

TEST(Split, NeedsHeldOutImages) {
    EXPECT_EQ(test::kind_of([] { split_train_test(numbered(5), 5, 1); }), ErrorKind::Argument);
    EXPECT_EQ(split_train_test(numbered(5), 4, 1).second.size(), 1u);
}

TEST(Dataset, ConditionNames) {
    EXPECT_TRUE(is_normal_condition("good"));
    EXPECT_TRUE(is_normal_condition("good_parts_tilt"));
    EXPECT_FALSE(is_normal_condition("missing_gear"));
    EXPECT_FALSE(is_normal_condition("goodish"));
}

TEST(Dataset, MissingTrainDirectory) {
    const auto dir = test::scratch_dir("pipeline_empty");
    EXPECT_EQ(test::kind_of([&] { scan_dataset(dir); }), ErrorKind::Io);
}

TEST(Timing, RoundMs) {
    EXPECT_DOUBLE_EQ(round_ms(1.23449), 1.234);
    EXPECT_DOUBLE_EQ(round_ms(0.0005), 0.001);
    EXPECT_DOUBLE_EQ(round_ms(0.0), 0.0);
}

TEST(F1Optimal, SeparableSet) {
    const std::vector<int> labels{0, 0, 0, 1, 1};
    const std::vector<double> scores{0.1, 0.2, 0.3, 0.7, 0.9};
    EXPECT_DOUBLE_EQ(f1_optimal_threshold(labels, scores), 0.5);
}

TEST(F1Optimal, MaximizesMacroF1) {
    std::mt19937_64 eng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> labels{0, 1};
        std::vector<double> scores{u(eng), u(eng)};
        for (int i = 0; i < 10; ++i) {
            labels.push_back(static_cast<int>(eng() % 2));
            scores.push_back(std::round(u(eng) * 8.0) / 8.0);
        }
        const double tau = f1_optimal_threshold(labels, scores);
        auto f1_at = [&](double t) {
            std::vector<int> pred;
            for (double s : scores) pred.push_back(s > t ? 1 : 0);
            return metrics::f1_macro(labels, pred).f1_macro;
        };
        const double best = f1_at(tau);
        std::vector<double> cuts{-1.0, 2.0};
        cuts.insert(cuts.end(), scores.begin(), scores.end());
        for (double c : cuts) EXPECT_LE(f1_at(c), best + 1e-12);
    }
}

TEST_F(PipelineTest, LayoutCounts) {
    EXPECT_EQ(layout_->train_normal.size(), 15u);
    EXPECT_EQ(layout_->test_normal.size(), 5u);
    EXPECT_EQ(layout_->test_anomalous.size(), 4u);
    for (const auto& [name, files] : layout_->test_anomalous) EXPECT_EQ(files.size(), 5u) << name;
    EXPECT_EQ(layout_->test_count(), 25u);

    const auto labeled = labeled_test_files(*layout_);
    ASSERT_EQ(labeled.size(), 25u);
    for (const auto& f : labeled)
        EXPECT_EQ(f.label, f.path.parent_path().filename() == "good" ? 0 : 1) << f.path;
}

TEST_F(PipelineTest, PatchCoreBankSize) {
    const auto& bank = std::get<patchcore::MemoryBank>(patchcore_->model.payload);
    EXPECT_EQ(bank.n_source, 15u * 32u * 32u);
    EXPECT_EQ(bank.size(), 1536u);
    EXPECT_EQ(bank.dim, 42u);
}

TEST_F(PipelineTest, TrainingImagesAreNormal) {
    for (const TrainResult* r : {patchcore_, padim_}) {
        const auto& cal = r->model.calibration;
        ASSERT_EQ(r->train_scores.size(), 15u);
        for (double s : r->train_scores) {
            const Verdict v = verdict(s, cal);
            EXPECT_EQ(v.label, Label::Normal) << to_string(r->model.algorithm);
            EXPECT_GT(v.confidence, 50.0);
        }
        EXPECT_GT(cal.threshold, cal.train_score_max);
    }
}

TEST_F(PipelineTest, PaDiMRescoresTrainingImagesNormal) {
    // PaDiM calibrates in-sample, so a reloaded model must reproduce it exactly.
    const Model loaded = load(save(padim_->model));
    ASSERT_EQ(loaded, padim_->model);
    const FeatureExtractor extractor(loaded.extractor);
    for (std::size_t i = 0; i < layout_->train_normal.size(); ++i) {
        const ImageScore s = score_file(loaded, extractor, layout_->train_normal[i]);
        EXPECT_NEAR(s.score, padim_->train_scores[i], 1e-9);
        EXPECT_EQ(verdict(s.score, loaded.calibration).label, Label::Normal);
    }
}

TEST_F(PipelineTest, PatchCoreHeldOutCalibrationIsConservative) {
    // Scoring a training image against the full bank includes its own rows.
    const FeatureExtractor extractor(patchcore_->model.extractor);
    for (std::size_t i = 0; i < layout_->train_normal.size(); ++i) {
        const ImageScore s = score_file(patchcore_->model, extractor, layout_->train_normal[i]);
        EXPECT_LE(s.score, patchcore_->train_scores[i] + 1e-12);
    }
}

TEST_F(PipelineTest, TrainingIsDeterministic) {
    TrainOptions opts;
    const TrainResult again = train(*layout_, opts);
    EXPECT_EQ(save(again.model), save(patchcore_->model));
    EXPECT_EQ(again.train_scores, patchcore_->train_scores);
    opts.algorithm = Algorithm::PaDiM;
    EXPECT_EQ(save(train(*layout_, opts).model), save(padim_->model));
}

TEST_F(PipelineTest, PaDiMKeepDims) {
    TrainOptions opts;
    opts.algorithm = Algorithm::PaDiM;
    opts.keep_dims = 20;
    const TrainResult r = train(*layout_, opts);
    const auto& bank = std::get<padim::GaussianBank>(r.model.payload);
    EXPECT_EQ(bank.dim, 20u);
    EXPECT_EQ(bank.channels, select_channels(42, 20, opts.seed));
    const FeatureExtractor extractor(r.model.extractor);
    EXPECT_NEAR(score_file(r.model, extractor, layout_->train_normal[0]).score, r.train_scores[0], 1e-9);
}

TEST_F(PipelineTest, SeparatesDefaultDataset) {
    const metrics::EvalReport report = evaluate(patchcore_->model, *layout_);
    EXPECT_EQ(report.confusion.total(), 25u);
    EXPECT_GE(report.auroc, 0.95);
    EXPECT_GE(report.f1_macro, 0.9);
    EXPECT_EQ(report.peak_model_bytes, save(patchcore_->model).size());
    EXPECT_GT(report.timings.inference_seconds, 0.0);
}

TEST_F(PipelineTest, OrderInvariant) {
    auto files = labeled_test_files(*layout_);
    const Evaluation a = evaluate_files(padim_->model, files);
    std::mt19937_64 eng(11);
    std::shuffle(files.begin(), files.end(), eng);
    const Evaluation b = evaluate_files(padim_->model, files);
    EXPECT_EQ(a.report.confusion, b.report.confusion);
    EXPECT_EQ(a.report.auroc, b.report.auroc);
    EXPECT_EQ(a.report.per_class, b.report.per_class);
    EXPECT_EQ(a.report.f1_macro, b.report.f1_macro);
    ASSERT_EQ(a.images.size(), b.images.size());
    for (std::size_t i = 0; i < a.images.size(); ++i) {
        EXPECT_EQ(a.images[i].path, b.images[i].path);
        EXPECT_EQ(a.images[i].score, b.images[i].score);
    }
    EXPECT_TRUE(std::is_sorted(a.images.begin(), a.images.end(),
                               [](const ImageResult& x, const ImageResult& y) { return x.path < y.path; }));
}

TEST_F(PipelineTest, OwnTrainingNormalsAreTrueNegatives) {
    std::vector<LabeledFile> files;
    for (const auto& p : layout_->train_normal) files.push_back({p, 0});
    for (const auto& p : layout_->test_anomalous.at("not_anodised")) files.push_back({p, 1});
    const Evaluation e = evaluate_files(padim_->model, files);
    EXPECT_EQ(e.report.confusion.tn, 15u);
    EXPECT_EQ(e.report.confusion.fp, 0u);
}

TEST_F(PipelineTest, SingleClassSetIsUndefined) {
    std::vector<LabeledFile> files;
    for (const auto& p : layout_->test_normal) files.push_back({p, 0});
    EXPECT_EQ(test::kind_of([&] { evaluate_files(patchcore_->model, files); }), ErrorKind::UndefinedMetric);
}

TEST_F(PipelineTest, F1OptimalNeverWorse) {
    const auto files = labeled_test_files(*layout_);
    const Evaluation fixed = evaluate_files(padim_->model, files);
    EvalOptions opts;
    opts.f1_optimal_threshold = true;
    const Evaluation tuned = evaluate_files(padim_->model, files, opts);
    EXPECT_GE(tuned.report.f1_macro, fixed.report.f1_macro);
    EXPECT_EQ(tuned.report.auroc, fixed.report.auroc);
}

TEST_F(PipelineTest, HeatmapsWritten) {
    const auto dir = test::scratch_dir("pipeline_heatmaps");
    std::vector<LabeledFile> files{{layout_->test_normal[0], 0}, {layout_->test_anomalous.at("missing_gear")[0], 1}};
    EvalOptions opts;
    opts.heatmap_dir = dir;
    evaluate_files(patchcore_->model, files, opts);
    std::size_t count = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const ImageTensor img = read_png(entry.path());
        EXPECT_EQ(img.height(), 256u);
        EXPECT_EQ(img.channels(), 3u);
        ++count;
    }
    EXPECT_EQ(count, 2u);
    EXPECT_TRUE(fs::exists(dir / "good_000.png"));
}

TEST(ImportedEmbeddings, TrainAndScoreWithoutPixels) {
    const auto dir = test::scratch_dir("pipeline_imported");
    std::mt19937_64 eng(5);
    std::normal_distribution<float> n(0.0f, 1.0f);
    std::map<std::string, FeatureGrid, std::less<>> entries;
    std::vector<fs::path> train_files;
    for (int i = 0; i < 6; ++i) {
        FeatureGrid g{4, 4, 8, std::vector<float>(4 * 4 * 8)};
        for (float& v : g.data) v = n(eng);
        entries["n" + std::to_string(i) + ".png"] = g;
        if (i < 5) train_files.push_back(dir / ("n" + std::to_string(i) + ".png"));
    }
    FeatureGrid far{4, 4, 8, std::vector<float>(4 * 4 * 8, 25.0f)};
    entries["far.png"] = far;
    write_file(dir / "emb.bin", serialize_embeddings(entries));

    TrainOptions opts;
    opts.extractor.kind = ExtractorKind::ImportedEmbeddings;
    opts.extractor.import_path = (dir / "emb.bin").string();
    opts.coreset_ratio = 0.5;
    const TrainResult r = train_on(train_files, opts);
    const auto& bank = std::get<patchcore::MemoryBank>(r.model.payload);
    EXPECT_EQ(bank.dim, 8u);
    EXPECT_EQ(bank.size(), 40u);

    const FeatureExtractor extractor(r.model.extractor);
    const double far_score = score_file(r.model, extractor, dir / "far.png").score;
    EXPECT_EQ(verdict(far_score, r.model.calibration).label, Label::Anomalous);
    EXPECT_EQ(test::kind_of([&] { score_file(r.model, extractor, dir / "absent.png"); }), ErrorKind::Lookup);
}

TEST(Bench, SmallSizes) {
    BenchOptions opts;
    opts.sizes = {6, 12};
    opts.work_dir = test::scratch_dir("pipeline_bench");
    const auto records = bench(opts);
    ASSERT_EQ(records.size(), 4u);
    std::map<std::pair<Algorithm, std::size_t>, BenchRecord> by;
    for (const auto& r : records) {
        EXPECT_GT(r.train_seconds, 0.0);
        EXPECT_GT(r.inference_seconds_total, 0.0);
        EXPECT_NEAR(r.inference_seconds_per_image * static_cast<double>(r.n_test), r.inference_seconds_total, 1e-3);
        EXPECT_EQ(r.n_train * 3, r.dataset_size * 2);
        by[{r.algorithm, r.dataset_size}] = r;
    }
    auto bytes = [&](Algorithm a, std::size_t size) { return by.at({a, size}).peak_model_bytes; };
    EXPECT_EQ(bytes(Algorithm::PaDiM, 6), bytes(Algorithm::PaDiM, 12));
    EXPECT_LT(bytes(Algorithm::PatchCore, 6), bytes(Algorithm::PatchCore, 12));

    const auto doc = bench_json(records);
    ASSERT_TRUE(doc["records"].is_array());
    EXPECT_EQ(doc["records"].size(), 4u);
    EXPECT_TRUE(doc["records"][0].contains("peak_model_bytes"));
    EXPECT_NE(bench_table(records).find("PatchCore(12)"), std::string::npos);
}
