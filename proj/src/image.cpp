#include "plad/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "plad/error.hpp"

namespace plad {

namespace {

void check_channels(std::size_t channels) {
    if (channels != 1 && channels != 3)
        fail(ErrorKind::Argument, "image channels must be 1 or 3, got " + std::to_string(channels));
}

}  // namespace

ImageTensor::ImageTensor(std::size_t height, std::size_t width, std::size_t channels)
    : height_(height), width_(width), channels_(channels), data_(height * width * channels, 0.0f) {
    check_channels(channels);
}

ImageTensor::ImageTensor(std::size_t height, std::size_t width, std::size_t channels,
                         std::vector<float> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
    check_channels(channels);
    if (data_.size() != height * width * channels)
        fail(ErrorKind::Dimension, "image data length " + std::to_string(data_.size()) +
                                       " != " + std::to_string(height * width * channels));
    validate();
}

void ImageTensor::validate() const {
    for (std::size_t i = 0; i < data_.size(); ++i) {
        const float v = data_[i];
        if (!std::isfinite(v) || v < 0.0f || v > 1.0f)
            fail(ErrorKind::Argument, "image element " + std::to_string(i) + " out of [0,1]");
    }
}

ImageTensor resize_bilinear(const ImageTensor& img, std::size_t out_h, std::size_t out_w) {
    if (out_h == 0 || out_w == 0) fail(ErrorKind::Argument, "resize target must be at least 1x1");
    if (img.empty()) fail(ErrorKind::Argument, "cannot resize an empty image");
    if (out_h == img.height() && out_w == img.width()) return img;

    const std::size_t in_h = img.height(), in_w = img.width(), ch = img.channels();
    // Corner-aligned: output corners land on input corners; a single output
    // sample sits at the input centre.
    auto source_coord = [](std::size_t i, std::size_t in, std::size_t out) {
        if (out == 1) return (static_cast<double>(in) - 1.0) / 2.0;
        return static_cast<double>(i) * (static_cast<double>(in) - 1.0) / (static_cast<double>(out) - 1.0);
    };

    ImageTensor out(out_h, out_w, ch);
    for (std::size_t y = 0; y < out_h; ++y) {
        const double sy = source_coord(y, in_h, out_h);
        const std::size_t y0 = static_cast<std::size_t>(std::floor(sy));
        const std::size_t y1 = std::min(y0 + 1, in_h - 1);
        const double fy = sy - static_cast<double>(y0);
        for (std::size_t x = 0; x < out_w; ++x) {
            const double sx = source_coord(x, in_w, out_w);
            const std::size_t x0 = static_cast<std::size_t>(std::floor(sx));
            const std::size_t x1 = std::min(x0 + 1, in_w - 1);
            const double fx = sx - static_cast<double>(x0);
            for (std::size_t c = 0; c < ch; ++c) {
                const double top = (1.0 - fx) * img.at(y0, x0, c) + fx * img.at(y0, x1, c);
                const double bottom = (1.0 - fx) * img.at(y1, x0, c) + fx * img.at(y1, x1, c);
                const double v = (1.0 - fy) * top + fy * bottom;
                out.at(y, x, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
            }
        }
    }
    return out;
}

ImageTensor adjust_brightness(const ImageTensor& img, double factor) {
    if (!(factor > 0.0) || !std::isfinite(factor))
        fail(ErrorKind::Argument, "brightness factor must be positive");
    ImageTensor out = img;
    for (float& v : out.data())
        v = static_cast<float>(std::clamp(static_cast<double>(v) * factor, 0.0, 1.0));
    return out;
}

ImageTensor to_rgb(const ImageTensor& img) {
    if (img.channels() == 3) return img;
    ImageTensor out(img.height(), img.width(), 3);
    const auto src = img.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = src[i];
    return out;
}

ImageTensor to_canonical(const ImageTensor& img) {
    return resize_bilinear(to_rgb(img), kCanonicalSize, kCanonicalSize);
}

std::vector<float> luminance(const ImageTensor& img) {
    const std::size_t n = img.height() * img.width();
    std::vector<float> lum(n);
    const auto d = img.data();
    if (img.channels() == 1) {
        std::copy(d.begin(), d.end(), lum.begin());
        return lum;
    }
    for (std::size_t i = 0; i < n; ++i)
        lum[i] = 0.299f * d[3 * i] + 0.587f * d[3 * i + 1] + 0.114f * d[3 * i + 2];
    return lum;
}

double mean_value(const ImageTensor& img) {
    if (img.empty()) return 0.0;
    double sum = 0.0;
    for (float v : img.data()) sum += v;
    return sum / static_cast<double>(img.size());
}

}  // namespace plad
