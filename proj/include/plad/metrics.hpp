#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace plad::metrics {

/// Positive = anomalous (label 1).
struct ConfusionMatrix {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

    std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct ClassScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    friend bool operator==(const ClassScores&, const ClassScores&) = default;
};

struct F1Report {
    std::vector<ClassScores> per_class;  // [0] normal, [1] anomalous
    double f1_macro = 0.0;
};

struct Timings {
    double train_seconds = 0.0;
    double inference_seconds = 0.0;
};

struct EvalReport {
    ConfusionMatrix confusion;
    double auroc = 0.0;
    std::vector<ClassScores> per_class;
    double f1_macro = 0.0;
    Timings timings;
    std::uint64_t peak_model_bytes = 0;
};

ConfusionMatrix confusion(std::span<const int> labels, std::span<const int> predictions);

/// Mann-Whitney form of the ROC area; tied (pos, neg) pairs count one half.
/// Throws Error{UndefinedMetric} unless both classes are present.
double auroc(std::span<const int> labels, std::span<const double> scores);

/// Per-class precision/recall/F1 for classes 0 and 1 and their unweighted mean.
/// A class absent from both labels and predictions scores F1 = 1.
F1Report f1_macro(std::span<const int> labels, std::span<const int> predictions);

EvalReport evaluate_predictions(std::span<const int> labels, std::span<const double> scores,
                                std::span<const int> predictions);

nlohmann::json to_json(const EvalReport& report);
EvalReport eval_report_from_json(const nlohmann::json& j);

}  // namespace plad::metrics
