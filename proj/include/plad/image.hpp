#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace plad {

/// H x W x C float image, values in [0, 1], row-major and channel-interleaved.
class ImageTensor {
public:
    ImageTensor() = default;
    /// Zero-filled image. Channels must be 1 or 3.
    ImageTensor(std::size_t height, std::size_t width, std::size_t channels);
    /// Takes ownership of `data`; validates length and value range.
    ImageTensor(std::size_t height, std::size_t width, std::size_t channels,
                std::vector<float> data);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    float at(std::size_t y, std::size_t x, std::size_t c) const {
        return data_[(y * width_ + x) * channels_ + c];
    }
    float& at(std::size_t y, std::size_t x, std::size_t c) {
        return data_[(y * width_ + x) * channels_ + c];
    }

    std::span<const float> data() const noexcept { return data_; }
    std::span<float> data() noexcept { return data_; }

    /// Throws if any element is non-finite or outside [0, 1].
    void validate() const;

    friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::size_t channels_ = 0;
    std::vector<float> data_;
};

inline constexpr std::size_t kCanonicalSize = 256;

ImageTensor resize_bilinear(const ImageTensor& img, std::size_t out_h, std::size_t out_w);

ImageTensor adjust_brightness(const ImageTensor& img, double factor);

/// Replicates a single-channel image to three channels; RGB passes through.
ImageTensor to_rgb(const ImageTensor& img);

/// Resize to the canonical 256x256 RGB model input.
ImageTensor to_canonical(const ImageTensor& img);

/// ITU-R BT.601 luma (0.299R + 0.587G + 0.114B), one value per pixel.
std::vector<float> luminance(const ImageTensor& img);

double mean_value(const ImageTensor& img);

}  // namespace plad
