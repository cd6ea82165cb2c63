#include "plad/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "plad/error.hpp"
#include "plad/png_io.hpp"

namespace plad {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs body(i) for i in [0, n) across threads; rethrows the first failure.
template <typename Body>
void parallel_for_each(std::size_t n, Body&& body) {
    std::exception_ptr first;
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(plad_pipeline_error)
            if (!first) first = std::current_exception();
        }
    }
    if (first) std::rethrow_exception(first);
}

FeatureGrid model_input(const Model& model, const FeatureGrid& grid) {
    if (const auto* g = std::get_if<padim::GaussianBank>(&model.payload); g && !g->channels.empty())
        return project_channels(grid, g->channels);
    return grid;
}

}  // namespace

double round_ms(double seconds) { return std::round(seconds * 1000.0) / 1000.0; }

ImageTensor load_canonical(const fs::path& path) { return to_canonical(read_png(path)); }

std::vector<FeatureGrid> extract_all(const FeatureExtractor& extractor, const std::vector<fs::path>& paths) {
    std::vector<FeatureGrid> grids(paths.size());
    const bool builtin = extractor.config().kind == ExtractorKind::BuiltinDescriptor;
    parallel_for_each(paths.size(), [&](std::size_t i) {
        const std::string key = paths[i].filename().string();
        // Imported embeddings need no pixels.
        grids[i] = builtin ? extractor.extract(load_canonical(paths[i]), key) : extractor.extract(ImageTensor{}, key);
    });
    return grids;
}

ImageScore score_grid(const Model& model, const FeatureGrid& grid) {
    ImageScore out;
    const FeatureGrid input = model_input(model, grid);
    if (const auto* g = std::get_if<padim::GaussianBank>(&model.payload))
        out.raw = padim::score_padim(*g, input);
    else
        out.raw = patchcore::score_patchcore(std::get<patchcore::MemoryBank>(model.payload), input);
    out.smoothed = smooth_map(out.raw, model.smoothing_sigma);
    out.score = out.smoothed.values.empty() ? 0.0 : *std::max_element(out.smoothed.values.begin(), out.smoothed.values.end());
    return out;
}

ImageScore score_file(const Model& model, const FeatureExtractor& extractor, const fs::path& path) {
    const std::string key = path.filename().string();
    if (extractor.config().kind == ExtractorKind::ImportedEmbeddings)
        return score_grid(model, extractor.extract(ImageTensor{}, key));
    return score_grid(model, extractor.extract(load_canonical(path), key));
}

TrainResult train_on(const std::vector<fs::path>& train_files, const TrainOptions& options) {
    if (train_files.empty()) fail(ErrorKind::InsufficientData, "no training images");
    const auto start = Clock::now();

    FeatureExtractor extractor(options.extractor);
    const auto grids = extract_all(extractor, train_files);

    Model model;
    model.algorithm = options.algorithm;
    model.extractor = options.extractor;
    model.smoothing_sigma = options.smoothing_sigma;
    std::vector<std::size_t> source_grid;
    if (options.algorithm == Algorithm::PaDiM) {
        std::vector<std::uint32_t> channels;
        std::vector<FeatureGrid> fit_input;
        if (options.keep_dims) {
            channels = select_channels(grids.front().dim, *options.keep_dims, options.seed);
            for (const auto& g : grids) fit_input.push_back(project_channels(g, channels));
        }
        auto bank = padim::fit_padim(options.keep_dims ? std::span<const FeatureGrid>(fit_input)
                                                       : std::span<const FeatureGrid>(grids),
                                     options.epsilon);
        bank.channels = std::move(channels);
        bank.reduce_seed = options.seed;
        model.payload = std::move(bank);
    } else {
        model.payload = patchcore::fit_patchcore(grids, options.coreset_ratio, options.seed, &source_grid);
    }

    TrainResult result;
    for (std::size_t i = 0; i < grids.size(); ++i) {
        const auto* bank = std::get_if<patchcore::MemoryBank>(&model.payload);
        const bool own_rows_only =
            bank && std::all_of(source_grid.begin(), source_grid.end(), [&](std::size_t s) { return s == i; });
        if (!bank || own_rows_only) {
            result.train_scores.push_back(score_grid(model, grids[i]).score);
            continue;
        }
        // Calibrate on distances to the other images' rows only.
        const ScoreMap raw = patchcore::score_patchcore_excluding(*bank, grids[i], source_grid, i);
        result.train_scores.push_back(image_score(raw, model.smoothing_sigma));
    }
    if (result.train_scores.size() < 2)
        fail(ErrorKind::InsufficientData, "calibration needs at least 2 training images");
    model.calibration = calibrate(result.train_scores);
    result.model = std::move(model);
    result.train_seconds = round_ms(seconds_since(start));
    return result;
}

TrainResult train(const DatasetLayout& layout, const TrainOptions& options) {
    return train_on(layout.train_normal, options);
}

std::vector<LabeledFile> labeled_test_files(const DatasetLayout& layout) {
    std::vector<LabeledFile> files;
    for (const auto& p : layout.test_normal) files.push_back({p, 0});
    for (const auto& [_, list] : layout.test_normal_variants)
        for (const auto& p : list) files.push_back({p, 0});
    for (const auto& [_, list] : layout.test_anomalous)
        for (const auto& p : list) files.push_back({p, 1});
    return files;
}

double f1_optimal_threshold(std::span<const int> labels, std::span<const double> scores) {
    if (scores.empty()) fail(ErrorKind::InsufficientData, "no scores to choose a threshold from");
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::vector<double> candidates;
    candidates.push_back(sorted.front() - 1.0);
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) candidates.push_back(0.5 * (sorted[i] + sorted[i + 1]));
    candidates.push_back(sorted.back());

    double best_threshold = candidates.back();
    double best_f1 = -1.0;
    std::vector<int> predictions(scores.size());
    for (double t : candidates) {
        for (std::size_t i = 0; i < scores.size(); ++i) predictions[i] = scores[i] > t ? 1 : 0;
        const double f1 = metrics::f1_macro(labels, predictions).f1_macro;
        if (f1 > best_f1) {
            best_f1 = f1;
            best_threshold = t;
        }
    }
    return best_threshold;
}

Evaluation evaluate_files(const Model& model, std::vector<LabeledFile> files, const EvalOptions& options) {
    if (files.empty()) fail(ErrorKind::InsufficientData, "no test images");
    std::sort(files.begin(), files.end(), [](const LabeledFile& a, const LabeledFile& b) { return a.path < b.path; });

    const auto start = Clock::now();
    FeatureExtractor extractor(model.extractor);
    std::vector<fs::path> paths;
    for (const auto& f : files) paths.push_back(f.path);
    const auto grids = extract_all(extractor, paths);

    std::vector<ImageScore> scored;
    scored.reserve(grids.size());
    for (const auto& g : grids) scored.push_back(score_grid(model, g));
    const double inference_seconds = seconds_since(start);

    std::vector<int> labels;
    std::vector<double> scores;
    for (std::size_t i = 0; i < files.size(); ++i) {
        labels.push_back(files[i].label);
        scores.push_back(scored[i].score);
    }
    Calibration cal = model.calibration;
    if (options.f1_optimal_threshold) cal.threshold = f1_optimal_threshold(labels, scores);

    Evaluation eval;
    std::vector<int> predictions;
    for (std::size_t i = 0; i < files.size(); ++i) {
        ImageResult r{files[i].path, files[i].label, scores[i], verdict(scores[i], cal)};
        predictions.push_back(r.verdict.label == Label::Anomalous ? 1 : 0);
        eval.images.push_back(std::move(r));
    }
    eval.report = metrics::evaluate_predictions(labels, scores, predictions);
    eval.report.timings.inference_seconds = round_ms(inference_seconds);
    eval.report.peak_model_bytes = save(model).size();

    if (options.heatmap_dir) {
        std::error_code ec;
        fs::create_directories(*options.heatmap_dir, ec);
        if (ec) fail(ErrorKind::Io, "cannot create " + options.heatmap_dir->string() + ": " + ec.message());
        parallel_for_each(files.size(), [&](std::size_t i) {
            const auto& p = files[i].path;
            const auto name = p.parent_path().filename().string() + "_" + p.filename().string();
            write_png(*options.heatmap_dir / name,
                      render_heatmap(scored[i].smoothed, load_canonical(p), cal));
        });
    }
    return eval;
}

metrics::EvalReport evaluate(const Model& model, const DatasetLayout& layout, const EvalOptions& options) {
    return evaluate_files(model, labeled_test_files(layout), options).report;
}

}  // namespace plad
