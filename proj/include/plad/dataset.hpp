#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace plad {

/// MVTec-style tree: train/good, test/good, test/<defect>. Test directories
/// named "good" or "good_<setup>" hold normal images; every other test
/// directory holds anomalous ones.
struct DatasetLayout {
    std::filesystem::path root;
    std::vector<std::filesystem::path> train_normal;
    std::vector<std::filesystem::path> test_normal;  // test/good
    std::map<std::string, std::vector<std::filesystem::path>> test_normal_variants;  // test/good_*
    std::map<std::string, std::vector<std::filesystem::path>> test_anomalous;

    std::size_t test_count() const;
};

bool is_normal_condition(const std::string& dir_name);

/// Scans `root`; file lists are sorted. Throws Error{Io} when train/good is
/// missing or empty.
DatasetLayout scan_dataset(const std::filesystem::path& root);

/// Seeded shuffle, first n_train for training, the rest held out.
std::pair<std::vector<std::filesystem::path>, std::vector<std::filesystem::path>> split_train_test(
    const std::vector<std::filesystem::path>& normals, std::size_t n_train, std::uint64_t seed);

}  // namespace plad
