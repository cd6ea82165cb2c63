#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "plad/error.hpp"
#include "plad/pipeline.hpp"
#include "plad/synthgear.hpp"

namespace plad {

namespace fs = std::filesystem;

std::vector<BenchRecord> bench(const BenchOptions& options) {
    if (options.sizes.empty() || options.algorithms.empty())
        fail(ErrorKind::Argument, "bench needs at least one size and one algorithm");
    if (options.work_dir.empty()) fail(ErrorKind::Argument, "bench needs a work directory");
    for (auto s : options.sizes)
        if (s < 4) fail(ErrorKind::Argument, "bench sizes must be at least 4 normal images");

    struct Plan {
        std::size_t size, n_train, n_test_normal, n_anomalous;
    };
    std::vector<Plan> plans;
    std::size_t max_size = 0, max_per_defect = 1;
    for (auto s : options.sizes) {
        const auto n_train = static_cast<std::size_t>(std::llround(2.0 * static_cast<double>(s) / 3.0));
        const std::size_t n_test = s - n_train;
        const auto n_anom = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(n_test) / 3.0)));
        plans.push_back({s, n_train, n_test, n_anom});
        max_size = std::max(max_size, s);
        max_per_defect = std::max(max_per_defect, (n_anom + 3) / 4);
    }

    // One dataset at the largest size; image seeds depend only on
    // (seed, split, condition, index), so smaller sizes are its prefixes.
    const fs::path root = options.work_dir / "bench_data";
    synth::DatasetOptions data_options;
    data_options.write_masks = false;
    synth::generate_dataset(root, max_size, 1, max_per_defect, options.seed, data_options);
    const DatasetLayout layout = scan_dataset(root);

    std::vector<BenchRecord> records;
    for (const auto& plan : plans) {
        const std::vector<fs::path> normals(layout.train_normal.begin(),
                                            layout.train_normal.begin() + static_cast<std::ptrdiff_t>(plan.size));
        const auto [train_files, held_out] = split_train_test(normals, plan.n_train, options.seed);

        std::vector<LabeledFile> test;
        for (const auto& p : held_out) test.push_back({p, 0});
        for (std::size_t i = 0; i < plan.n_anomalous; ++i) {
            const auto defect = synth::kDefects[i % 4];
            const auto& list = layout.test_anomalous.at(std::string(synth::to_string(defect)));
            test.push_back({list.at(i / 4), 1});
        }

        for (auto algo : options.algorithms) {
            TrainOptions train_options;
            train_options.algorithm = algo;
            train_options.seed = options.seed;
            const TrainResult trained = train_on(train_files, train_options);
            const Evaluation eval = evaluate_files(trained.model, test);

            BenchRecord r;
            r.algorithm = algo;
            r.dataset_size = plan.size;
            r.n_train = train_files.size();
            r.n_test = test.size();
            r.train_seconds = trained.train_seconds;
            r.inference_seconds_total = eval.report.timings.inference_seconds;
            r.inference_seconds_per_image = r.inference_seconds_total / static_cast<double>(test.size());
            r.peak_model_bytes = eval.report.peak_model_bytes;
            r.auroc = eval.report.auroc;
            r.f1_macro = eval.report.f1_macro;
            records.push_back(r);
        }
    }
    return records;
}

nlohmann::json to_json(const BenchRecord& r) {
    return {
        {"algorithm", to_string(r.algorithm)},
        {"algorithm_id", static_cast<int>(r.algorithm)},
        {"dataset_size", r.dataset_size},
        {"n_train", r.n_train},
        {"n_test", r.n_test},
        {"train_seconds", r.train_seconds},
        {"inference_seconds_total", r.inference_seconds_total},
        {"inference_seconds_per_image", r.inference_seconds_per_image},
        {"peak_model_bytes", r.peak_model_bytes},
        {"auroc", r.auroc},
        {"f1_macro", r.f1_macro},
    };
}

nlohmann::json bench_json(const std::vector<BenchRecord>& records) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : records) rows.push_back(to_json(r));
    return {{"records", rows}};
}

std::string bench_table(const std::vector<BenchRecord>& records) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-16s %8s %10s %12s %14s %14s %8s %8s\n", "model", "n_train", "train_s",
                  "inference_s", "per_image_s", "model_bytes", "auroc", "f1");
    out << line;
    for (const auto& r : records) {
        const std::string name = std::string(r.algorithm == Algorithm::PaDiM ? "PaDiM" : "PatchCore") + "(" +
                                 std::to_string(r.dataset_size) + ")";
        std::snprintf(line, sizeof line, "%-16s %8zu %10.3f %12.3f %14.4f %14llu %8.4f %8.4f\n", name.c_str(),
                      r.n_train, r.train_seconds, r.inference_seconds_total, r.inference_seconds_per_image,
                      static_cast<unsigned long long>(r.peak_model_bytes), r.auroc, r.f1_macro);
        out << line;
    }
    return out.str();
}

}  // namespace plad
