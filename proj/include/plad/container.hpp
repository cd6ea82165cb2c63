#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "plad/features.hpp"
#include "plad/padim.hpp"
#include "plad/patchcore.hpp"
#include "plad/postprocess.hpp"

namespace plad {

enum class Algorithm : std::uint8_t { PaDiM = 1, PatchCore = 2 };

const char* to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

/// A trained detector: everything needed to score a new image.
struct Model {
    Algorithm algorithm = Algorithm::PaDiM;
    ExtractorConfig extractor;
    Calibration calibration;
    double smoothing_sigma = kDefaultSmoothingSigma;
    std::variant<padim::GaussianBank, patchcore::MemoryBank> payload;

    friend bool operator==(const Model&, const Model&) = default;
};

inline constexpr std::uint16_t kContainerVersion = 1;

/// Model container, all integers and floats little-endian:
///   "PLAD" | u16 version | u8 algorithm_id
///   extractor: u8 kind | u32 base_grid | u32 n | u32 scales[n] | u32 len + path bytes
///   calibration: f64 threshold | f64 scale | f64 train_score_max | f64 train_score_median | f64 smoothing_sigma
///   payload (arrays are u64 count + float32 values):
///     PaDiM:     u32 grid_h | u32 grid_w | u32 dim | f64 epsilon | u64 reduce_seed | u32 n_train
///                | u32 k | u32 channels[k] | means | inv_cov
///     PatchCore: u32 dim | f64 coreset_ratio | u64 coreset_seed | u64 n_source | vectors
///   u32 crc32 of every preceding byte
std::vector<std::uint8_t> save(const Model& model);

/// Rejects bad magic, truncation (framing errors), CRC mismatch (corruption)
/// and unknown version/algorithm (unsupported). Never returns a partial model.
Model load(std::span<const std::uint8_t> bytes);

void save_file(const std::filesystem::path& path, const Model& model);
Model load_file(const std::filesystem::path& path);

}  // namespace plad
