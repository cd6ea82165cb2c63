#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "plad/container.hpp"
#include "plad/dataset.hpp"
#include "plad/metrics.hpp"

namespace plad {

struct TrainOptions {
    Algorithm algorithm = Algorithm::PatchCore;
    ExtractorConfig extractor;
    double epsilon = padim::kDefaultEpsilon;
    std::optional<std::size_t> keep_dims;  // PaDiM channel subset
    double coreset_ratio = patchcore::kDefaultCoresetRatio;
    double smoothing_sigma = kDefaultSmoothingSigma;
    std::uint64_t seed = 42;
};

struct TrainResult {
    Model model;
    std::vector<double> train_scores;  // image scores of the training images
    double train_seconds = 0.0;
};

/// Loads and canonicalizes (256x256 RGB) an image file.
ImageTensor load_canonical(const std::filesystem::path& path);

/// Feature grids for `paths`, extracted in parallel; the embedding key of each
/// image is its filename.
std::vector<FeatureGrid> extract_all(const FeatureExtractor& extractor, const std::vector<std::filesystem::path>& paths);

/// extract -> fit -> re-score training images -> calibrate. Reads only
/// layout.train_normal.
TrainResult train(const DatasetLayout& layout, const TrainOptions& options);
TrainResult train_on(const std::vector<std::filesystem::path>& train_files, const TrainOptions& options);

/// Raw and smoothed score maps plus the image-level score.
struct ImageScore {
    ScoreMap raw;
    ScoreMap smoothed;
    double score = 0.0;
};

/// Scores one grid produced by the model's own extractor config.
ImageScore score_grid(const Model& model, const FeatureGrid& grid);

/// Loads, extracts and scores one image; `key` defaults to the filename.
ImageScore score_file(const Model& model, const FeatureExtractor& extractor, const std::filesystem::path& path);

struct LabeledFile {
    std::filesystem::path path;
    int label = 0;  // 1 = anomalous
};

struct EvalOptions {
    /// Replace the model's threshold with the F1-macro-optimal one on this set.
    bool f1_optimal_threshold = false;
    /// When set, heatmaps are written here as <condition>_<name>.png.
    std::optional<std::filesystem::path> heatmap_dir;
};

struct ImageResult {
    std::filesystem::path path;
    int label = 0;
    double score = 0.0;
    Verdict verdict;
};

struct Evaluation {
    metrics::EvalReport report;
    std::vector<ImageResult> images;  // sorted by path
};

/// Every test image of the layout: test/good and test/good_* are label 0,
/// other test directories label 1.
std::vector<LabeledFile> labeled_test_files(const DatasetLayout& layout);

Evaluation evaluate_files(const Model& model, std::vector<LabeledFile> files, const EvalOptions& options = {});
metrics::EvalReport evaluate(const Model& model, const DatasetLayout& layout, const EvalOptions& options = {});

/// Threshold (midpoint between adjacent distinct scores) maximizing F1-macro.
double f1_optimal_threshold(std::span<const int> labels, std::span<const double> scores);

struct BenchRecord {
    Algorithm algorithm = Algorithm::PaDiM;
    std::size_t dataset_size = 0;  // normal images before the 2:1 split
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    double train_seconds = 0.0;
    double inference_seconds_total = 0.0;
    double inference_seconds_per_image = 0.0;
    std::uint64_t peak_model_bytes = 0;
    double auroc = 0.0;
    double f1_macro = 0.0;
};

struct BenchOptions {
    std::vector<std::size_t> sizes{20, 50, 80};
    std::vector<Algorithm> algorithms{Algorithm::PaDiM, Algorithm::PatchCore};
    std::uint64_t seed = 42;
    std::filesystem::path work_dir;  // datasets are generated under here
};

/// Ablation runner. A size S is the number of normal images: split 2:1 into
/// train/test, plus anomalous test images for a 75% normal / 25% anomalous
/// test mix (at least one), drawn round-robin from the four defects.
std::vector<BenchRecord> bench(const BenchOptions& options);

nlohmann::json to_json(const BenchRecord& record);
nlohmann::json bench_json(const std::vector<BenchRecord>& records);
std::string bench_table(const std::vector<BenchRecord>& records);

/// Wall-clock seconds rounded to millisecond resolution.
double round_ms(double seconds);

}  // namespace plad
