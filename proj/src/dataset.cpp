#include "plad/dataset.hpp"

#include <algorithm>

#include "plad/error.hpp"
#include "plad/rng.hpp"

namespace plad {

namespace fs = std::filesystem;

namespace {

std::vector<fs::path> list_pngs(const fs::path& dir) {
    std::vector<fs::path> out;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ".png") out.push_back(entry.path());
    }
    if (ec) fail(ErrorKind::Io, "cannot list " + dir.string() + ": " + ec.message());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

std::size_t DatasetLayout::test_count() const {
    std::size_t n = test_normal.size();
    for (const auto& [_, files] : test_normal_variants) n += files.size();
    for (const auto& [_, files] : test_anomalous) n += files.size();
    return n;
}

bool is_normal_condition(const std::string& dir_name) {
    return dir_name == "good" || dir_name.rfind("good_", 0) == 0;
}

DatasetLayout scan_dataset(const fs::path& root) {
    DatasetLayout layout;
    layout.root = root;
    const fs::path train_dir = root / "train" / "good";
    if (!fs::is_directory(train_dir)) fail(ErrorKind::Io, "missing training directory " + train_dir.string());
    layout.train_normal = list_pngs(train_dir);
    if (layout.train_normal.empty()) fail(ErrorKind::Io, "no training images in " + train_dir.string());

    const fs::path test_dir = root / "test";
    if (!fs::is_directory(test_dir)) return layout;
    std::vector<fs::path> subdirs;
    for (const auto& entry : fs::directory_iterator(test_dir))
        if (entry.is_directory()) subdirs.push_back(entry.path());
    std::sort(subdirs.begin(), subdirs.end());
    for (const auto& dir : subdirs) {
        const std::string name = dir.filename().string();
        auto files = list_pngs(dir);
        if (name == "good") layout.test_normal = std::move(files);
        else if (is_normal_condition(name)) layout.test_normal_variants[name] = std::move(files);
        else layout.test_anomalous[name] = std::move(files);
    }
    return layout;
}

std::pair<std::vector<fs::path>, std::vector<fs::path>> split_train_test(const std::vector<fs::path>& normals,
                                                                         std::size_t n_train, std::uint64_t seed) {
    if (n_train >= normals.size())
        fail(ErrorKind::Argument, "n_train (" + std::to_string(n_train) + ") must be smaller than the " +
                                      std::to_string(normals.size()) + " available normals");
    std::vector<fs::path> shuffled = normals;
    Rng rng(seed);
    rng.shuffle(std::span<fs::path>(shuffled));
    std::vector<fs::path> train(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<fs::path> held(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train), shuffled.end());
    return {std::move(train), std::move(held)};
}

}  // namespace plad
