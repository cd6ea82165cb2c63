#pragma once

#include <array>
#include <span>
#include <string>

#include "plad/image.hpp"
#include "plad/score_map.hpp"

namespace plad {

inline constexpr double kDefaultSmoothingSigma = 1.0;
inline constexpr double kThresholdHeadroom = 1.1;
inline constexpr double kMinScale = 1e-6;

/// Gaussian blur, radius ceil(3 sigma), edge-replicated. sigma 0 is identity.
ScoreMap smooth_map(const ScoreMap& map, double sigma);

/// Image-level score: max cell of the smoothed map.
double image_score(const ScoreMap& map, double sigma = kDefaultSmoothingSigma);

struct Calibration {
    double threshold = 0.0;  // tau
    double scale = 1.0;      // w > 0
    double train_score_max = 0.0;
    double train_score_median = 0.0;

    friend bool operator==(const Calibration&, const Calibration&) = default;
};

double median(std::span<const double> values);

/// tau = 1.1 * max, w = max(MAD, 1e-6). Needs >= 2 scores.
Calibration calibrate(std::span<const double> train_scores);

enum class Label { Normal, Anomalous };
const char* to_string(Label label);

/// 50 + 50 |z| / (1 + |z|) with z = (score - tau) / w.
double confidence_pct(double score, const Calibration& cal);

struct Verdict {
    Label label = Label::Normal;
    double confidence = 50.0;
    double image_score = 0.0;
    ImageTensor heatmap;
};

/// Overlay of the score map on `base`: n = clamp(v / tau, 0, 1) upsampled
/// bilinearly, alpha = n / 2, blended toward colormap(n).
ImageTensor render_heatmap(const ScoreMap& map, const ImageTensor& base, const Calibration& cal);

Verdict verdict(double score, const Calibration& cal, const ScoreMap& map, const ImageTensor& base);

/// Label and confidence only, no heatmap.
Verdict verdict(double score, const Calibration& cal);

/// 256-entry blue -> yellow -> red table, RGB in [0, 1].
const std::array<std::array<float, 3>, 256>& heat_colormap();

}  // namespace plad
