#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plad/image.hpp"

namespace plad::synth {

enum class ProductCondition { Normal, GearDamage, MissingGear, ExtraGear, NotAnodised };
enum class SetupCondition { NoChange, DarkerEnvironment, TrayNotAligned, PartsTilt };

inline constexpr ProductCondition kDefects[] = {ProductCondition::GearDamage, ProductCondition::MissingGear,
                                                ProductCondition::ExtraGear, ProductCondition::NotAnodised};
inline constexpr SetupCondition kSetups[] = {SetupCondition::NoChange, SetupCondition::DarkerEnvironment,
                                             SetupCondition::TrayNotAligned, SetupCondition::PartsTilt};

/// Directory-style names: "good", "gear_damage", ... / "no_change", "darker_environment", ...
std::string_view to_string(ProductCondition c);
std::string_view to_string(SetupCondition c);
std::optional<ProductCondition> parse_product(std::string_view name);
std::optional<SetupCondition> parse_setup(std::string_view name);

/// Per-image photographic nuisance, always on.
struct Jitter {
    double max_shift_px = 2.0;
    double luminance = 0.03;
    double noise_sigma = 0.01;
};

/// Magnitudes of the perturbations. The defaults are visible at 256x256
/// without being trivial.
struct Perturbations {
    double darker_factor = 0.45;
    double tray_shift_x = 18.0;
    double tray_shift_y = 12.0;
    double tilt_degrees = 15.0;
    int removed_teeth = 2;
};

struct SceneSpec {
    std::uint64_t seed = 0;
    ProductCondition product = ProductCondition::Normal;
    SetupCondition setup = SetupCondition::NoChange;
    Jitter jitter{};
    Perturbations perturb{};

    bool anomalous() const noexcept { return product != ProductCondition::Normal; }
};

/// Renders a 256x256 RGB scene. Pure function of `spec`.
ImageTensor render(const SceneSpec& spec);

/// Single-channel mask (1 inside) of the pixels a product defect may alter,
/// under the same jitter and setup transform as render(). All zero for
/// Normal products.
ImageTensor defect_mask(const SceneSpec& spec);

struct ManifestEntry {
    std::string path;       // relative to dataset root, '/' separated
    std::string split;      // "train" or "test"
    std::string condition;  // directory name, e.g. "good", "missing_gear", "good_parts_tilt"
    std::string label;      // "normal" or "anomalous"
};

struct Manifest {
    std::vector<ManifestEntry> entries;  // sorted by path
};

struct DatasetOptions {
    /// Also emit every product x setup combination as test/<product>_<setup>.
    bool setup_grid = false;
    bool write_masks = true;
    Jitter jitter{};
    Perturbations perturb{};
};

/// Seed of one dataset image; independent of generation order.
std::uint64_t image_seed(std::uint64_t master_seed, std::string_view split, std::string_view condition,
                         std::size_t index);

/// Writes train/good, test/good, test/<defect> (and ground_truth/<defect>
/// masks) under `root` plus manifest.json.
Manifest generate_dataset(const std::filesystem::path& root, std::size_t n_train_normal,
                          std::size_t n_test_normal, std::size_t n_test_per_defect, std::uint64_t master_seed,
                          const DatasetOptions& options = {});

std::string manifest_json(const Manifest& manifest);

}  // namespace plad::synth
