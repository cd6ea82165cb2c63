#include "plad/synthgear.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>

#include "json.hpp"

#include "plad/error.hpp"
#include "plad/png_io.hpp"
#include "plad/rng.hpp"

namespace plad::synth {

namespace {

struct Color {
    float r, g, b;
};

// Scene palette.
constexpr Color kTable{0.30f, 0.27f, 0.24f};
constexpr Color kTray{0.56f, 0.60f, 0.64f};
constexpr Color kTrayRim{0.46f, 0.49f, 0.53f};
constexpr Color kCasingAnodised{0.13f, 0.13f, 0.17f};
constexpr Color kBoreAnodised{0.06f, 0.06f, 0.08f};
constexpr Color kCasingBare{0.88f, 0.88f, 0.85f};
constexpr Color kBoreBare{0.64f, 0.64f, 0.61f};
constexpr Color kPocket{0.20f, 0.36f, 0.28f};
constexpr Color kBrass{0.80f, 0.64f, 0.30f};

struct Rect {
    double x0, y0, x1, y1;
};

struct Gear {
    double cx, cy;
    double outer, root;
    int teeth;
};

constexpr Rect kTrayRect{20, 20, 236, 236};
constexpr double kTrayRimWidth = 3.0;
constexpr Rect kCasingRect{32, 36, 92, 220};
constexpr double kCasingCorner = 8.0;
constexpr std::array<std::array<double, 2>, 2> kBores{{{62, 80}, {62, 176}}};
constexpr double kBoreRadius = 14.0;
constexpr double kPocketMargin = 4.0;
constexpr double kHubRadius = 4.0;

constexpr Gear kMainGear{162, 78, 44, 32, 12};
constexpr Gear kGearA{130, 176, 28, 22, 12};
constexpr Gear kGearB{196, 184, 24, 19, 10};
// Free slot on the casing between the two bores.
constexpr Gear kExtraGear{62, 128, 22, 17, 10};
// Main-gear teeth removed by GearDamage start at this index.
constexpr int kDamagedToothStart = 3;

bool inside(const Rect& r, double x, double y) { return x >= r.x0 && x < r.x1 && y >= r.y0 && y < r.y1; }

bool inside_rounded(const Rect& r, double radius, double x, double y) {
    if (!inside(r, x, y)) return false;
    const double cx = std::clamp(x, r.x0 + radius, r.x1 - radius);
    const double cy = std::clamp(y, r.y0 + radius, r.y1 - radius);
    return (x - cx) * (x - cx) + (y - cy) * (y - cy) <= radius * radius;
}

double sq(double v) { return v * v; }

/// Whether (x, y) hits solid gear material. `rotation` in radians.
bool gear_solid(const Gear& g, double x, double y, double rotation, int missing_from, int missing_count) {
    const double dx = x - g.cx, dy = y - g.cy;
    const double r2 = dx * dx + dy * dy;
    if (r2 > g.outer * g.outer) return false;
    if (r2 <= kHubRadius * kHubRadius) return false;
    const double r = std::sqrt(r2);
    double theta = std::atan2(dy, dx) - rotation;
    const double two_pi = 2.0 * std::numbers::pi;
    theta = std::fmod(theta, two_pi);
    if (theta < 0) theta += two_pi;

    // Four lightening holes make rotation visible.
    const double hole_ring = 0.58 * g.root, hole_r = 0.18 * g.root;
    for (int k = 0; k < 4; ++k) {
        const double a = rotation + std::numbers::pi / 4 + k * std::numbers::pi / 2;
        if (sq(x - (g.cx + hole_ring * std::cos(a))) + sq(y - (g.cy + hole_ring * std::sin(a))) <= hole_r * hole_r)
            return false;
    }
    if (r <= g.root) return true;

    const double pitch = two_pi / g.teeth;
    const int tooth = static_cast<int>(theta / pitch) % g.teeth;
    const double phase = theta / pitch - std::floor(theta / pitch);
    if (missing_count > 0) {
        const int rel = ((tooth - missing_from) % g.teeth + g.teeth) % g.teeth;
        if (rel < missing_count) return false;
    }
    // Tapered tooth: full width at the root, narrowing toward the tip.
    const double t = (r - g.root) / (g.outer - g.root);
    const double half_width = 0.5 * (0.56 - 0.22 * t);
    return std::abs(phase - 0.5) <= half_width;
}

struct Layout {
    ProductCondition product;
    double rotation;  // gear tilt in radians
    int removed_teeth;
};

Color scene_color(const Layout& s, double x, double y) {
    const bool extra = s.product == ProductCondition::ExtraGear;
    if (extra && gear_solid(kExtraGear, x, y, s.rotation, 0, 0)) return kBrass;

    const int damaged_count = s.product == ProductCondition::GearDamage ? s.removed_teeth : 0;
    if (gear_solid(kMainGear, x, y, s.rotation, kDamagedToothStart, damaged_count)) return kBrass;
    if (s.product != ProductCondition::MissingGear && gear_solid(kGearA, x, y, s.rotation, 0, 0)) return kBrass;
    if (gear_solid(kGearB, x, y, s.rotation, 0, 0)) return kBrass;

    for (const Gear* g : {&kMainGear, &kGearA, &kGearB}) {
        if (sq(x - g->cx) + sq(y - g->cy) <= sq(g->outer + kPocketMargin)) return kPocket;
    }

    const bool bare = s.product == ProductCondition::NotAnodised;
    if (inside_rounded(kCasingRect, kCasingCorner, x, y)) {
        for (const auto& b : kBores)
            if (sq(x - b[0]) + sq(y - b[1]) <= kBoreRadius * kBoreRadius) return bare ? kBoreBare : kBoreAnodised;
        return bare ? kCasingBare : kCasingAnodised;
    }
    if (inside(kTrayRect, x, y)) {
        const Rect inner{kTrayRect.x0 + kTrayRimWidth, kTrayRect.y0 + kTrayRimWidth, kTrayRect.x1 - kTrayRimWidth,
                         kTrayRect.y1 - kTrayRimWidth};
        return inside(inner, x, y) ? kTray : kTrayRim;
    }
    return kTable;
}

struct Placement {
    double dx, dy;  // total content translation in pixels
    double lum;     // luminance jitter factor
};

constexpr int kSupersample = 3;

Placement draw_placement(const SceneSpec& spec, Rng& rng) {
    Placement p{};
    p.dx = rng.uniform(-spec.jitter.max_shift_px, spec.jitter.max_shift_px);
    p.dy = rng.uniform(-spec.jitter.max_shift_px, spec.jitter.max_shift_px);
    p.lum = 1.0 + rng.uniform(-spec.jitter.luminance, spec.jitter.luminance);
    if (spec.setup == SetupCondition::TrayNotAligned) {
        p.dx += spec.perturb.tray_shift_x;
        p.dy += spec.perturb.tray_shift_y;
    }
    return p;
}

double rotation_of(const SceneSpec& spec) {
    return spec.setup == SetupCondition::PartsTilt ? spec.perturb.tilt_degrees * std::numbers::pi / 180.0 : 0.0;
}

bool in_defect_region(const SceneSpec& spec, double x, double y) {
    auto in_disk = [&](const Gear& g, double margin) {
        return sq(x - g.cx) + sq(y - g.cy) <= sq(g.outer + margin);
    };
    switch (spec.product) {
        case ProductCondition::Normal: return false;
        case ProductCondition::GearDamage: return in_disk(kMainGear, 0.0);
        case ProductCondition::MissingGear: return in_disk(kGearA, 0.0);
        case ProductCondition::ExtraGear: return in_disk(kExtraGear, 0.0);
        case ProductCondition::NotAnodised: return inside(kCasingRect, x, y);
    }
    return false;
}

}  // namespace

std::string_view to_string(ProductCondition c) {
    switch (c) {
        case ProductCondition::Normal: return "good";
        case ProductCondition::GearDamage: return "gear_damage";
        case ProductCondition::MissingGear: return "missing_gear";
        case ProductCondition::ExtraGear: return "extra_gear";
        case ProductCondition::NotAnodised: return "not_anodised";
    }
    return "good";
}

std::string_view to_string(SetupCondition c) {
    switch (c) {
        case SetupCondition::NoChange: return "no_change";
        case SetupCondition::DarkerEnvironment: return "darker_environment";
        case SetupCondition::TrayNotAligned: return "tray_not_aligned";
        case SetupCondition::PartsTilt: return "parts_tilt";
    }
    return "no_change";
}

std::optional<ProductCondition> parse_product(std::string_view name) {
    for (auto c : {ProductCondition::Normal, ProductCondition::GearDamage, ProductCondition::MissingGear,
                   ProductCondition::ExtraGear, ProductCondition::NotAnodised})
        if (to_string(c) == name) return c;
    return std::nullopt;
}

std::optional<SetupCondition> parse_setup(std::string_view name) {
    for (auto c : kSetups)
        if (to_string(c) == name) return c;
    return std::nullopt;
}

ImageTensor render(const SceneSpec& spec) {
    Rng rng(spec.seed);
    const Placement place = draw_placement(spec, rng);
    const Layout layout{spec.product, rotation_of(spec), spec.perturb.removed_teeth};

    const std::size_t n = kCanonicalSize;
    ImageTensor img(n, n, 3);
    const double inv_samples = 1.0 / (kSupersample * kSupersample);
    for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
            double r = 0, g = 0, b = 0;
            for (int sy = 0; sy < kSupersample; ++sy) {
                for (int sx = 0; sx < kSupersample; ++sx) {
                    const double px = static_cast<double>(x) + (sx + 0.5) / kSupersample - place.dx;
                    const double py = static_cast<double>(y) + (sy + 0.5) / kSupersample - place.dy;
                    const Color c = scene_color(layout, px, py);
                    r += c.r;
                    g += c.g;
                    b += c.b;
                }
            }
            img.at(y, x, 0) = static_cast<float>(r * inv_samples);
            img.at(y, x, 1) = static_cast<float>(g * inv_samples);
            img.at(y, x, 2) = static_cast<float>(b * inv_samples);
        }
    }

    double gain = place.lum;
    if (spec.setup == SetupCondition::DarkerEnvironment) gain *= spec.perturb.darker_factor;
    // Noise is drawn for every element in a fixed order so the stream does not
    // depend on scene content.
    for (float& v : img.data()) {
        const double noisy = static_cast<double>(v) * gain + spec.jitter.noise_sigma * rng.normal();
        v = static_cast<float>(std::clamp(noisy, 0.0, 1.0));
    }
    return img;
}

ImageTensor defect_mask(const SceneSpec& spec) {
    Rng rng(spec.seed);
    const Placement place = draw_placement(spec, rng);
    const std::size_t n = kCanonicalSize;
    ImageTensor mask(n, n, 1);
    if (!spec.anomalous()) return mask;
    for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
            bool hit = false;
            for (int sy = 0; sy < kSupersample && !hit; ++sy)
                for (int sx = 0; sx < kSupersample && !hit; ++sx)
                    hit = in_defect_region(spec, static_cast<double>(x) + (sx + 0.5) / kSupersample - place.dx,
                                           static_cast<double>(y) + (sy + 0.5) / kSupersample - place.dy);
            mask.at(y, x, 0) = hit ? 1.0f : 0.0f;
        }
    }
    return mask;
}

std::uint64_t image_seed(std::uint64_t master_seed, std::string_view split, std::string_view condition,
                         std::size_t index) {
    std::uint64_t h = hash_combine(master_seed, fnv1a64(split));
    h = hash_combine(h, fnv1a64(condition));
    return hash_combine(h, static_cast<std::uint64_t>(index));
}

namespace {

struct Job {
    std::string rel_path;
    std::string mask_path;  // empty when no mask
    std::string split;
    std::string condition;
    SceneSpec spec;
};

std::string indexed_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%03zu", i);
    return buf;
}

}  // namespace

Manifest generate_dataset(const std::filesystem::path& root, std::size_t n_train_normal,
                          std::size_t n_test_normal, std::size_t n_test_per_defect, std::uint64_t master_seed,
                          const DatasetOptions& options) {
    if (n_train_normal < 1 || n_test_normal < 1 || n_test_per_defect < 1)
        fail(ErrorKind::Argument, "dataset counts must be at least 1");

    std::vector<Job> jobs;
    auto add = [&](std::string split, std::string condition, ProductCondition product, SetupCondition setup,
                   std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) {
            Job job;
            const std::string name = indexed_name(i);
            job.rel_path = split + "/" + condition + "/" + name + ".png";
            if (options.write_masks && product != ProductCondition::Normal)
                job.mask_path = "ground_truth/" + condition + "/" + name + "_mask.png";
            job.spec.seed = image_seed(master_seed, split, condition, i);
            job.spec.product = product;
            job.spec.setup = setup;
            job.spec.jitter = options.jitter;
            job.spec.perturb = options.perturb;
            job.split = split;
            job.condition = condition;
            jobs.push_back(std::move(job));
        }
    };

    add("train", "good", ProductCondition::Normal, SetupCondition::NoChange, n_train_normal);
    add("test", "good", ProductCondition::Normal, SetupCondition::NoChange, n_test_normal);
    for (auto defect : kDefects)
        add("test", std::string(to_string(defect)), defect, SetupCondition::NoChange, n_test_per_defect);
    if (options.setup_grid) {
        for (auto setup : kSetups) {
            if (setup == SetupCondition::NoChange) continue;
            const std::string suffix = "_" + std::string(to_string(setup));
            add("test", "good" + suffix, ProductCondition::Normal, setup, n_test_normal);
            for (auto defect : kDefects)
                add("test", std::string(to_string(defect)) + suffix, defect, setup, n_test_per_defect);
        }
    }

    std::error_code ec;
    for (const auto& job : jobs) {
        for (const auto& rel : {job.rel_path, job.mask_path}) {
            if (rel.empty()) continue;
            const auto dir = (root / rel).parent_path();
            std::filesystem::create_directories(dir, ec);
            if (ec) fail(ErrorKind::Io, "cannot create directory " + dir.string() + ": " + ec.message());
        }
    }

    std::string first_error;
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t j = 0; j < static_cast<std::int64_t>(jobs.size()); ++j) {
        const Job& job = jobs[static_cast<std::size_t>(j)];
        try {
            write_png(root / job.rel_path, render(job.spec));
            if (!job.mask_path.empty()) write_png(root / job.mask_path, defect_mask(job.spec));
        } catch (const std::exception& e) {
#pragma omp critical(plad_generate_error)
            if (first_error.empty()) first_error = e.what();
        }
    }
    if (!first_error.empty()) fail(ErrorKind::Io, first_error);

    Manifest manifest;
    for (const auto& job : jobs)
        manifest.entries.push_back({job.rel_path, job.split, job.condition,
                                    job.spec.anomalous() ? "anomalous" : "normal"});
    std::sort(manifest.entries.begin(), manifest.entries.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });

    const auto manifest_path = root / "manifest.json";
    std::ofstream out(manifest_path, std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + manifest_path.string());
    out << manifest_json(manifest) << '\n';
    if (!out) fail(ErrorKind::Io, "write failed: " + manifest_path.string());
    return manifest;
}

std::string manifest_json(const Manifest& manifest) {
    nlohmann::json files = nlohmann::json::array();
    for (const auto& e : manifest.entries)
        files.push_back({{"path", e.path}, {"split", e.split}, {"condition", e.condition}, {"label", e.label}});
    return nlohmann::json{{"files", files}}.dump(2);
}

}  // namespace plad::synth
