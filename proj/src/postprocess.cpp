#include "plad/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "plad/error.hpp"

namespace plad {

void ScoreMap::validate() const {
    if (values.size() != grid_h * grid_w) fail(ErrorKind::Dimension, "score map length mismatch");
    for (double v : values)
        if (!std::isfinite(v) || v < 0.0) fail(ErrorKind::Argument, "score map values must be finite and >= 0");
}

ScoreMap smooth_map(const ScoreMap& map, double sigma) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) fail(ErrorKind::Argument, "smoothing sigma must be >= 0");
    if (sigma == 0.0 || map.values.empty()) return map;

    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        const double w = std::exp(-0.5 * static_cast<double>(k * k) / (sigma * sigma));
        kernel[static_cast<std::size_t>(k + radius)] = w;
        total += w;
    }
    for (double& w : kernel) w /= total;

    const auto h = static_cast<std::ptrdiff_t>(map.grid_h), w = static_cast<std::ptrdiff_t>(map.grid_w);
    auto clampi = [](std::ptrdiff_t v, std::ptrdiff_t hi) { return std::clamp<std::ptrdiff_t>(v, 0, hi - 1); };

    std::vector<double> tmp(map.values.size());
    for (std::ptrdiff_t y = 0; y < h; ++y)
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            double acc = 0.0;
            for (std::ptrdiff_t k = -radius; k <= radius; ++k)
                acc += kernel[static_cast<std::size_t>(k + radius)] *
                       map.values[static_cast<std::size_t>(y * w + clampi(x + k, w))];
            tmp[static_cast<std::size_t>(y * w + x)] = acc;
        }
    ScoreMap out{map.grid_h, map.grid_w, std::vector<double>(map.values.size())};
    for (std::ptrdiff_t y = 0; y < h; ++y)
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            double acc = 0.0;
            for (std::ptrdiff_t k = -radius; k <= radius; ++k)
                acc += kernel[static_cast<std::size_t>(k + radius)] *
                       tmp[static_cast<std::size_t>(clampi(y + k, h) * w + x)];
            out.values[static_cast<std::size_t>(y * w + x)] = acc;
        }
    return out;
}

double image_score(const ScoreMap& map, double sigma) {
    if (map.values.empty()) return 0.0;
    const ScoreMap smoothed = smooth_map(map, sigma);
    return *std::max_element(smoothed.values.begin(), smoothed.values.end());
}

double median(std::span<const double> values) {
    if (values.empty()) fail(ErrorKind::InsufficientData, "median of an empty list");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Calibration calibrate(std::span<const double> train_scores) {
    if (train_scores.size() < 2)
        fail(ErrorKind::InsufficientData, "calibration needs at least 2 training scores");
    Calibration cal;
    cal.train_score_max = *std::max_element(train_scores.begin(), train_scores.end());
    cal.train_score_median = median(train_scores);
    cal.threshold = kThresholdHeadroom * cal.train_score_max;
    std::vector<double> deviations;
    deviations.reserve(train_scores.size());
    for (double s : train_scores) deviations.push_back(std::abs(s - cal.train_score_median));
    cal.scale = std::max(median(deviations), kMinScale);
    return cal;
}

const char* to_string(Label label) { return label == Label::Anomalous ? "Anomalous" : "Normal"; }

double confidence_pct(double score, const Calibration& cal) {
    const double z = std::abs(score - cal.threshold) / cal.scale;
    if (std::isinf(z)) return 100.0;
    return 50.0 + 50.0 * z / (1.0 + z);
}

ImageTensor render_heatmap(const ScoreMap& map, const ImageTensor& base, const Calibration& cal) {
    const ImageTensor rgb = to_rgb(base);
    if (map.values.empty()) return rgb;
    std::vector<float> norm(map.values.size());
    for (std::size_t i = 0; i < norm.size(); ++i) {
        const double v = map.values[i];
        const double n = cal.threshold > 0.0 ? v / cal.threshold : (v > 0.0 ? 1.0 : 0.0);
        norm[i] = static_cast<float>(std::clamp(n, 0.0, 1.0));
    }
    const ImageTensor up =
        resize_bilinear(ImageTensor(map.grid_h, map.grid_w, 1, std::move(norm)), rgb.height(), rgb.width());

    const auto& table = heat_colormap();
    ImageTensor out = rgb;
    for (std::size_t y = 0; y < out.height(); ++y) {
        for (std::size_t x = 0; x < out.width(); ++x) {
            const float n = up.at(y, x, 0);
            if (n <= 0.0f) continue;
            const float alpha = 0.5f * n;
            const auto& color = table[static_cast<std::size_t>(std::lround(n * 255.0f))];
            for (std::size_t c = 0; c < 3; ++c) {
                const float v = (1.0f - alpha) * rgb.at(y, x, c) + alpha * color[c];
                out.at(y, x, c) = std::clamp(v, 0.0f, 1.0f);
            }
        }
    }
    return out;
}

Verdict verdict(double score, const Calibration& cal) {
    Verdict v;
    v.image_score = score;
    v.label = score > cal.threshold ? Label::Anomalous : Label::Normal;
    v.confidence = confidence_pct(score, cal);
    return v;
}

Verdict verdict(double score, const Calibration& cal, const ScoreMap& map, const ImageTensor& base) {
    Verdict v = verdict(score, cal);
    v.heatmap = render_heatmap(map, base, cal);
    return v;
}

}  // namespace plad
