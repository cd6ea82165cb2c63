#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "plad/image.hpp"
#include "plad/png_io.hpp"
#include "plad/synthgear.hpp"
#include "test_util.hpp"

using namespace plad;
using namespace plad::synth;
namespace fs = std::filesystem;

namespace {

SceneSpec scene(ProductCondition p, SetupCondition s = SetupCondition::NoChange, std::uint64_t seed = 7) {
    SceneSpec spec;
    spec.seed = seed;
    spec.product = p;
    spec.setup = s;
    return spec;
}

double mean_luma(const ImageTensor& img) {
    const auto l = luminance(img);
    double acc = 0;
    for (float v : l) acc += v;
    return acc / static_cast<double>(l.size());
}

std::vector<fs::path> pngs_under(const fs::path& dir) {
    std::vector<fs::path> out;
    if (!fs::exists(dir)) return out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST(Render, ShapeAndRange) {
    const ImageTensor img = render(scene(ProductCondition::Normal));
    EXPECT_EQ(img.height(), 256u);
    EXPECT_EQ(img.width(), 256u);
    EXPECT_EQ(img.channels(), 3u);
    EXPECT_NO_THROW(img.validate());
}

TEST(Render, Deterministic) {
    for (auto p : {ProductCondition::Normal, ProductCondition::GearDamage, ProductCondition::NotAnodised})
        for (auto s : kSetups) EXPECT_EQ(render(scene(p, s)), render(scene(p, s)));
}

TEST(Render, SeedsDiffer) {
    EXPECT_NE(render(scene(ProductCondition::Normal, SetupCondition::NoChange, 1)),
              render(scene(ProductCondition::Normal, SetupCondition::NoChange, 2)));
}

TEST(Render, DarkerEnvironmentRatio) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const double normal = mean_luma(render(scene(ProductCondition::Normal, SetupCondition::NoChange, seed)));
        const double dark =
            mean_luma(render(scene(ProductCondition::Normal, SetupCondition::DarkerEnvironment, seed)));
        EXPECT_NEAR(dark / normal, 0.45, 0.02);
    }
}

TEST(Render, MissingGearDiffConfinedToOneGearBox) {
    const ImageTensor normal = render(scene(ProductCondition::Normal));
    const ImageTensor missing = render(scene(ProductCondition::MissingGear));
    std::size_t y0 = 256, y1 = 0, x0 = 256, x1 = 0, changed = 0;
    for (std::size_t y = 0; y < 256; ++y)
        for (std::size_t x = 0; x < 256; ++x)
            for (std::size_t c = 0; c < 3; ++c)
                if (normal.at(y, x, c) != missing.at(y, x, c)) {
                    ++changed;
                    y0 = std::min(y0, y);
                    y1 = std::max(y1, y);
                    x0 = std::min(x0, x);
                    x1 = std::max(x1, x);
                }
    ASSERT_GT(changed, 0u);
    // One gear of outer radius <= 44 px (plus jitter) fits in a 96 px box.
    EXPECT_LE(y1 - y0, 96u);
    EXPECT_LE(x1 - x0, 96u);
}

TEST(Render, EveryDefectStaysInsideItsMask) {
    for (auto s : kSetups) {
        for (auto p : kDefects) {
            const ImageTensor normal = render(scene(ProductCondition::Normal, s));
            const ImageTensor defect = render(scene(p, s));
            const ImageTensor mask = defect_mask(scene(p, s));
            ASSERT_EQ(mask.channels(), 1u);
            std::size_t changed = 0, outside = 0;
            for (std::size_t y = 0; y < 256; ++y)
                for (std::size_t x = 0; x < 256; ++x)
                    for (std::size_t c = 0; c < 3; ++c)
                        if (normal.at(y, x, c) != defect.at(y, x, c)) {
                            ++changed;
                            if (mask.at(y, x, 0) == 0.0f) ++outside;
                        }
            EXPECT_GT(changed, 0u) << to_string(p) << "/" << to_string(s);
            EXPECT_EQ(outside, 0u) << to_string(p) << "/" << to_string(s);
        }
    }
}

TEST(Render, NormalMaskIsEmpty) {
    const ImageTensor mask = defect_mask(scene(ProductCondition::Normal));
    for (float v : mask.data()) ASSERT_EQ(v, 0.0f);
}

TEST(Render, TrayShiftMovesContent) {
    // Without nuisance jitter the misaligned scene is the aligned one shifted
    // by (+18, +12), away from the borders.
    SceneSpec a = scene(ProductCondition::Normal);
    a.jitter = Jitter{0.0, 0.0, 0.0};
    SceneSpec b = a;
    b.setup = SetupCondition::TrayNotAligned;
    const ImageTensor ia = render(a), ib = render(b);
    std::size_t mismatches = 0;
    for (std::size_t y = 12; y < 256; ++y)
        for (std::size_t x = 18; x < 256; ++x)
            for (std::size_t c = 0; c < 3; ++c)
                if (std::abs(ib.at(y, x, c) - ia.at(y - 12, x - 18, c)) > 1e-6f) ++mismatches;
    EXPECT_EQ(mismatches, 0u);
}

TEST(Names, RoundTrip) {
    for (auto p : {ProductCondition::Normal, ProductCondition::GearDamage, ProductCondition::MissingGear,
                   ProductCondition::ExtraGear, ProductCondition::NotAnodised})
        EXPECT_EQ(parse_product(to_string(p)), p);
    for (auto s : kSetups) EXPECT_EQ(parse_setup(to_string(s)), s);
    EXPECT_EQ(to_string(ProductCondition::Normal), "good");
    EXPECT_FALSE(parse_product("scratch").has_value());
}

TEST(ImageSeed, DependsOnEveryPart) {
    std::set<std::uint64_t> seeds = {image_seed(42, "train", "good", 0), image_seed(43, "train", "good", 0),
                                     image_seed(42, "test", "good", 0), image_seed(42, "train", "missing_gear", 0),
                                     image_seed(42, "train", "good", 1)};
    EXPECT_EQ(seeds.size(), 5u);
}

TEST(Dataset, ProtocolCountsAndLabels) {
    const auto root = test::scratch_dir("synth_counts");
    const Manifest m = generate_dataset(root, 15, 5, 5, 42);
    EXPECT_EQ(m.entries.size(), 40u);
    EXPECT_EQ(pngs_under(root / "train").size() + pngs_under(root / "test").size(), 40u);
    EXPECT_EQ(pngs_under(root / "train" / "good").size(), 15u);
    EXPECT_EQ(pngs_under(root / "test" / "good").size(), 5u);
    for (auto d : kDefects) EXPECT_EQ(pngs_under(root / "test" / std::string(to_string(d))).size(), 5u);
    EXPECT_TRUE(fs::exists(root / "manifest.json"));

    for (const auto& e : m.entries) {
        const bool good = e.condition == "good";
        EXPECT_EQ(e.label, good ? "normal" : "anomalous") << e.path;
        EXPECT_TRUE(fs::exists(root / e.path)) << e.path;
    }
    EXPECT_TRUE(std::is_sorted(m.entries.begin(), m.entries.end(),
                               [](const auto& a, const auto& b) { return a.path < b.path; }));
}

TEST(Dataset, RegenerationIsByteIdentical) {
    const auto a = test::scratch_dir("synth_regen_a");
    const auto b = test::scratch_dir("synth_regen_b");
    generate_dataset(a, 3, 2, 1, 9);
    generate_dataset(b, 3, 2, 1, 9);
    const auto fa = pngs_under(a), fb = pngs_under(b);
    ASSERT_EQ(fa.size(), fb.size());
    for (std::size_t i = 0; i < fa.size(); ++i) {
        EXPECT_EQ(fs::relative(fa[i], a), fs::relative(fb[i], b));
        EXPECT_EQ(read_file(fa[i]), read_file(fb[i])) << fa[i];
    }
    EXPECT_EQ(read_file(a / "manifest.json"), read_file(b / "manifest.json"));
}

TEST(Dataset, SetupGridKeepsNormalLabels) {
    const auto root = test::scratch_dir("synth_grid");
    DatasetOptions options;
    options.setup_grid = true;
    options.write_masks = false;
    const Manifest m = generate_dataset(root, 2, 1, 1, 5, options);
    std::size_t variants = 0;
    for (const auto& e : m.entries) {
        if (e.condition.rfind("good_", 0) == 0) {
            ++variants;
            EXPECT_EQ(e.label, "normal");
        }
    }
    EXPECT_EQ(variants, 3u);
    EXPECT_TRUE(fs::exists(root / "test" / "extra_gear_parts_tilt"));
    EXPECT_FALSE(fs::exists(root / "ground_truth"));
}
