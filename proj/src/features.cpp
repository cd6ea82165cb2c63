#include "plad/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "plad/error.hpp"
#include "plad/rng.hpp"

namespace plad {

namespace {

std::string shape_string(std::size_t h, std::size_t w, std::size_t d) {
    return "[" + std::to_string(h) + ", " + std::to_string(w) + ", " + std::to_string(d) + "]";
}

constexpr double kGradientFloor = 0.1;

struct Gradients {
    std::vector<float> magnitude;
    std::vector<std::uint8_t> bin;
};

// 3x3 Sobel on luminance, edge-replicated.
Gradients sobel(const std::vector<float>& lum, std::size_t h, std::size_t w) {
    Gradients g{std::vector<float>(h * w), std::vector<std::uint8_t>(h * w)};
    auto px = [&](std::ptrdiff_t y, std::ptrdiff_t x) {
        y = std::clamp<std::ptrdiff_t>(y, 0, static_cast<std::ptrdiff_t>(h) - 1);
        x = std::clamp<std::ptrdiff_t>(x, 0, static_cast<std::ptrdiff_t>(w) - 1);
        return static_cast<double>(lum[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)]);
    };
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (std::ptrdiff_t y = 0; y < static_cast<std::ptrdiff_t>(h); ++y) {
        for (std::ptrdiff_t x = 0; x < static_cast<std::ptrdiff_t>(w); ++x) {
            const double gx = (px(y - 1, x + 1) + 2 * px(y, x + 1) + px(y + 1, x + 1)) -
                              (px(y - 1, x - 1) + 2 * px(y, x - 1) + px(y + 1, x - 1));
            const double gy = (px(y + 1, x - 1) + 2 * px(y + 1, x) + px(y + 1, x + 1)) -
                              (px(y - 1, x - 1) + 2 * px(y - 1, x) + px(y - 1, x + 1));
            const std::size_t i = static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x);
            g.magnitude[i] = static_cast<float>(std::sqrt(gx * gx + gy * gy));
            const double angle = std::atan2(gy, gx) + std::numbers::pi;  // [0, 2pi]
            const auto bin = static_cast<std::size_t>(angle / two_pi * kOrientationBins);
            g.bin[i] = static_cast<std::uint8_t>(std::min(bin, kOrientationBins - 1));
        }
    }
    return g;
}

// (side x side x 14) descriptor map at patch size `s`.
std::vector<float> scale_map(const ImageTensor& img, const Gradients& grad, std::size_t s) {
    const std::size_t w = img.width();
    const std::size_t side = w / s;
    const double n = static_cast<double>(s * s);
    // Uniform prior worth kGradientFloor of magnitude per pixel; keeps sensor
    // noise in flat patches from producing arbitrary histograms.
    const double prior = n * kGradientFloor;
    std::vector<float> out(side * side * kValuesPerScale);
    for (std::size_t ty = 0; ty < side; ++ty) {
        for (std::size_t tx = 0; tx < side; ++tx) {
            float* cell = out.data() + (ty * side + tx) * kValuesPerScale;
            double mean[3] = {0, 0, 0};
            for (std::size_t y = ty * s; y < (ty + 1) * s; ++y)
                for (std::size_t x = tx * s; x < (tx + 1) * s; ++x)
                    for (std::size_t c = 0; c < 3; ++c) mean[c] += img.at(y, x, c);
            for (double& m : mean) m /= n;
            double var[3] = {0, 0, 0};
            double hist[kOrientationBins] = {};
            double total = 0.0;
            for (std::size_t y = ty * s; y < (ty + 1) * s; ++y) {
                for (std::size_t x = tx * s; x < (tx + 1) * s; ++x) {
                    for (std::size_t c = 0; c < 3; ++c) {
                        const double d = img.at(y, x, c) - mean[c];
                        var[c] += d * d;
                    }
                    const std::size_t i = y * w + x;
                    hist[grad.bin[i]] += grad.magnitude[i];
                    total += grad.magnitude[i];
                }
            }
            for (std::size_t c = 0; c < 3; ++c) {
                cell[c] = static_cast<float>(mean[c]);
                cell[3 + c] = static_cast<float>(std::sqrt(var[c] / n));
            }
            for (std::size_t b = 0; b < kOrientationBins; ++b)
                cell[6 + b] = static_cast<float>((hist[b] + prior / kOrientationBins) / (total + prior));
        }
    }
    return out;
}

}  // namespace

void ExtractorConfig::validate() const {
    const auto size = static_cast<std::uint32_t>(kCanonicalSize);
    if (kind == ExtractorKind::ImportedEmbeddings) {
        if (import_path.empty()) fail(ErrorKind::Argument, "imported embeddings need an import path");
        return;
    }
    if (base_grid == 0 || size % base_grid != 0)
        fail(ErrorKind::Argument, "base_grid must divide " + std::to_string(size));
    if (scales.empty()) fail(ErrorKind::Argument, "at least one patch scale is required");
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (scales[i] == 0 || size % scales[i] != 0)
            fail(ErrorKind::Argument, "patch scale " + std::to_string(scales[i]) + " must divide " +
                                          std::to_string(size));
        if (i > 0 && scales[i] <= scales[i - 1]) fail(ErrorKind::Argument, "patch scales must be ascending");
        const std::uint32_t side = size / scales[i];
        if (side % base_grid != 0 && base_grid % side != 0)
            fail(ErrorKind::Argument, "scale " + std::to_string(scales[i]) + " grid is incommensurate with base_grid");
    }
}

FeatureGrid extract_builtin(const ImageTensor& img, const ExtractorConfig& cfg) {
    if (img.height() != kCanonicalSize || img.width() != kCanonicalSize || img.channels() != 3)
        fail(ErrorKind::Dimension, "builtin descriptor expects [256, 256, 3], found " +
                                       shape_string(img.height(), img.width(), img.channels()));
    const auto grad = sobel(luminance(img), img.height(), img.width());

    const std::size_t base = cfg.base_grid;
    FeatureGrid grid{base, base, kValuesPerScale * cfg.scales.size(), {}};
    grid.data.resize(grid.cells() * grid.dim);
    for (std::size_t si = 0; si < cfg.scales.size(); ++si) {
        const std::size_t side = kCanonicalSize / cfg.scales[si];
        const auto map = scale_map(img, grad, cfg.scales[si]);
        const std::size_t offset = si * kValuesPerScale;
        for (std::size_t gy = 0; gy < base; ++gy) {
            for (std::size_t gx = 0; gx < base; ++gx) {
                float* dst = grid.data.data() + (gy * base + gx) * grid.dim + offset;
                if (side >= base) {
                    // Average-pool f x f blocks of the finer map.
                    const std::size_t f = side / base;
                    double acc[kValuesPerScale] = {};
                    for (std::size_t y = gy * f; y < (gy + 1) * f; ++y)
                        for (std::size_t x = gx * f; x < (gx + 1) * f; ++x)
                            for (std::size_t k = 0; k < kValuesPerScale; ++k)
                                acc[k] += map[(y * side + x) * kValuesPerScale + k];
                    for (std::size_t k = 0; k < kValuesPerScale; ++k)
                        dst[k] = static_cast<float>(acc[k] / static_cast<double>(f * f));
                } else {
                    // Coarser map: every base cell takes its covering patch.
                    const std::size_t f = base / side;
                    const float* src = map.data() + ((gy / f) * side + gx / f) * kValuesPerScale;
                    std::copy(src, src + kValuesPerScale, dst);
                }
            }
        }
    }
    return grid;
}

FeatureExtractor::FeatureExtractor(ExtractorConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    if (cfg_.kind == ExtractorKind::ImportedEmbeddings) imported_ = read_embeddings(cfg_.import_path);
}

FeatureGrid FeatureExtractor::extract(const ImageTensor& img, std::string_view key) const {
    if (cfg_.kind == ExtractorKind::BuiltinDescriptor) return extract_builtin(img, cfg_);
    const auto it = imported_.find(key);
    if (it == imported_.end())
        fail(ErrorKind::Lookup, "no imported embedding for image '" + std::string(key) + "'");
    const FeatureGrid& found = it->second;
    if (!imported_.empty()) {
        const FeatureGrid& first = imported_.begin()->second;
        if (!found.same_shape(first))
            fail(ErrorKind::Dimension, "embedding '" + std::string(key) + "' expected shape " +
                                           shape_string(first.grid_h, first.grid_w, first.dim) + ", found " +
                                           shape_string(found.grid_h, found.grid_w, found.dim));
    }
    return found;
}

std::vector<std::uint32_t> select_channels(std::size_t dim, std::size_t keep, std::uint64_t seed) {
    if (keep < 1 || keep > dim)
        fail(ErrorKind::Argument, "keep must be in [1, " + std::to_string(dim) + "], got " + std::to_string(keep));
    std::vector<std::uint32_t> order(dim);
    std::iota(order.begin(), order.end(), 0u);
    Rng rng(seed);
    rng.shuffle(std::span<std::uint32_t>(order));
    order.resize(keep);
    std::sort(order.begin(), order.end());
    return order;
}

FeatureGrid project_channels(const FeatureGrid& grid, std::span<const std::uint32_t> channels) {
    for (auto c : channels)
        if (c >= grid.dim) fail(ErrorKind::Dimension, "channel index " + std::to_string(c) + " out of range");
    FeatureGrid out{grid.grid_h, grid.grid_w, channels.size(), {}};
    out.data.resize(out.cells() * out.dim);
    for (std::size_t cell = 0; cell < grid.cells(); ++cell)
        for (std::size_t k = 0; k < channels.size(); ++k)
            out.data[cell * out.dim + k] = grid.data[cell * grid.dim + channels[k]];
    return out;
}

FeatureGrid reduce_dims(const FeatureGrid& grid, std::size_t keep, std::uint64_t seed) {
    const auto channels = select_channels(grid.dim, keep, seed);
    return project_channels(grid, channels);
}

}  // namespace plad
