#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "plad/image.hpp"

namespace plad {

/// grid_h x grid_w cells, each a `dim`-vector; row-major per cell.
struct FeatureGrid {
    std::size_t grid_h = 0;
    std::size_t grid_w = 0;
    std::size_t dim = 0;
    std::vector<float> data;

    std::size_t cells() const noexcept { return grid_h * grid_w; }
    std::span<const float> cell(std::size_t i) const { return {data.data() + i * dim, dim}; }
    bool same_shape(const FeatureGrid& o) const noexcept {
        return grid_h == o.grid_h && grid_w == o.grid_w && dim == o.dim;
    }

    friend bool operator==(const FeatureGrid&, const FeatureGrid&) = default;
};

enum class ExtractorKind : std::uint8_t { BuiltinDescriptor = 0, ImportedEmbeddings = 1 };

struct ExtractorConfig {
    ExtractorKind kind = ExtractorKind::BuiltinDescriptor;
    std::uint32_t base_grid = 32;
    std::vector<std::uint32_t> scales{8, 16, 32};
    std::string import_path;  // ImportedEmbeddings only

    /// Throws Error{Argument} unless base_grid and every scale divide 256 and
    /// scales are strictly ascending.
    void validate() const;

    friend bool operator==(const ExtractorConfig&, const ExtractorConfig&) = default;
};

/// Per-patch descriptor length at one scale: RGB mean, RGB std, 8 orientation bins.
inline constexpr std::size_t kValuesPerScale = 14;
inline constexpr std::size_t kOrientationBins = 8;

/// Multi-scale handcrafted descriptor of a canonical 256x256 RGB image.
FeatureGrid extract_builtin(const ImageTensor& img, const ExtractorConfig& cfg);

/// Turns images into feature grids under one ExtractorConfig. Imported
/// embeddings are loaded once at construction.
class FeatureExtractor {
public:
    explicit FeatureExtractor(ExtractorConfig cfg);

    const ExtractorConfig& config() const noexcept { return cfg_; }

    /// `key` names the image in the embedding file (its filename); ignored by
    /// the builtin descriptor.
    FeatureGrid extract(const ImageTensor& img, std::string_view key = {}) const;

private:
    ExtractorConfig cfg_;
    std::map<std::string, FeatureGrid, std::less<>> imported_;
};

/// Sorted channel indices retained by reduce_dims for (dim, keep, seed).
std::vector<std::uint32_t> select_channels(std::size_t dim, std::size_t keep, std::uint64_t seed);

/// Keeps only `channels` (sorted, in range) of every cell.
FeatureGrid project_channels(const FeatureGrid& grid, std::span<const std::uint32_t> channels);

/// Seeded random channel subset of size `keep`, identical for every cell and image.
FeatureGrid reduce_dims(const FeatureGrid& grid, std::size_t keep, std::uint64_t seed);

// Embedding import file: "PLEM" magic, u16 version 1, u32 entry count, then
// per entry {string name, u32 grid_h, u32 grid_w, u32 dim, float32 array},
// crc32 footer. Same framing as the model container.
std::map<std::string, FeatureGrid, std::less<>> read_embeddings(const std::filesystem::path& path);
std::map<std::string, FeatureGrid, std::less<>> parse_embeddings(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_embeddings(const std::map<std::string, FeatureGrid, std::less<>>& entries);

}  // namespace plad
