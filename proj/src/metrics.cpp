#include "plad/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "plad/error.hpp"

namespace plad::metrics {

namespace {

void check_binary(std::span<const int> values, const char* what) {
    for (int v : values)
        if (v != 0 && v != 1) fail(ErrorKind::Argument, std::string(what) + " must be 0 or 1");
}

ClassScores class_scores(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
    ClassScores s;
    if (tp + fp == 0 && tp + fn == 0) {
        s.precision = s.recall = s.f1 = 1.0;
        return s;
    }
    s.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    s.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

}  // namespace

ConfusionMatrix confusion(std::span<const int> labels, std::span<const int> predictions) {
    if (labels.size() != predictions.size())
        fail(ErrorKind::Argument, "labels and predictions differ in length");
    if (labels.empty()) fail(ErrorKind::Argument, "confusion matrix of zero samples");
    check_binary(labels, "labels");
    check_binary(predictions, "predictions");
    ConfusionMatrix m;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) (predictions[i] == 1 ? m.tp : m.fn)++;
        else (predictions[i] == 1 ? m.fp : m.tn)++;
    }
    return m;
}

double auroc(std::span<const int> labels, std::span<const double> scores) {
    if (labels.size() != scores.size()) fail(ErrorKind::Argument, "labels and scores differ in length");
    check_binary(labels, "labels");
    const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) fail(ErrorKind::UndefinedMetric, "AUROC needs both positive and negative samples");

    // Midranks over ascending scores; sum of positive ranks gives U.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            if (labels[order[k]] == 1) rank_sum += midrank;
        i = j + 1;
    }
    const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    const double u = rank_sum - np * (np + 1.0) / 2.0;
    return u / (np * nn);
}

F1Report f1_macro(std::span<const int> labels, std::span<const int> predictions) {
    const ConfusionMatrix m = confusion(labels, predictions);
    F1Report r;
    // Class 0 (normal) treats "normal" as the positive outcome.
    r.per_class.push_back(class_scores(m.tn, m.fn, m.fp));
    r.per_class.push_back(class_scores(m.tp, m.fp, m.fn));
    r.f1_macro = (r.per_class[0].f1 + r.per_class[1].f1) / 2.0;
    return r;
}

EvalReport evaluate_predictions(std::span<const int> labels, std::span<const double> scores,
                                std::span<const int> predictions) {
    EvalReport report;
    report.confusion = confusion(labels, predictions);
    report.auroc = auroc(labels, scores);
    const F1Report f1 = f1_macro(labels, predictions);
    report.per_class = f1.per_class;
    report.f1_macro = f1.f1_macro;
    return report;
}

nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json per_class = nlohmann::json::array();
    for (const auto& c : r.per_class)
        per_class.push_back({{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}});
    return {
        {"confusion", {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"fn", r.confusion.fn}, {"tn", r.confusion.tn}}},
        {"auroc", r.auroc},
        {"per_class", per_class},
        {"f1_macro", r.f1_macro},
        {"timings",
         {{"train_seconds", r.timings.train_seconds}, {"inference_seconds", r.timings.inference_seconds}}},
        {"peak_model_bytes", r.peak_model_bytes},
    };
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
    EvalReport r;
    const auto& c = j.at("confusion");
    r.confusion = {c.at("tp").get<std::uint64_t>(), c.at("fp").get<std::uint64_t>(), c.at("fn").get<std::uint64_t>(),
                   c.at("tn").get<std::uint64_t>()};
    r.auroc = j.at("auroc").get<double>();
    for (const auto& pc : j.at("per_class"))
        r.per_class.push_back({pc.at("precision").get<double>(), pc.at("recall").get<double>(), pc.at("f1").get<double>()});
    r.f1_macro = j.at("f1_macro").get<double>();
    r.timings.train_seconds = j.at("timings").at("train_seconds").get<double>();
    r.timings.inference_seconds = j.at("timings").at("inference_seconds").get<double>();
    r.peak_model_bytes = j.at("peak_model_bytes").get<std::uint64_t>();
    return r;
}

}  // namespace plad::metrics
