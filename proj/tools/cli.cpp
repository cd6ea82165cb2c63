#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "plad/error.hpp"
#include "plad/pipeline.hpp"
#include "plad/png_io.hpp"
#include "plad/synthgear.hpp"

namespace plad::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
    std::uint64_t seed = 42;
    bool quiet = false;
    bool json = false;
};

struct SynthArgs {
    std::string out;
    std::size_t train_normal = 15, test_normal = 5, per_defect = 5;
    bool setup_grid = false;
};

struct TrainArgs {
    std::string data, algo, out;
    std::optional<double> epsilon, coreset_ratio, sigma;
    std::optional<std::size_t> keep_dims;
};

struct ScoreArgs {
    std::string model, image, heatmap_out;
};

struct EvalArgs {
    std::string model, data, report, heatmap_dir;
    bool f1_optimal = false;
};

struct BenchArgs {
    std::string sizes = "20,50,80", algos = "padim,patchcore", out, work_dir;
};

template <typename T>
std::vector<T> split_list(const std::string& text, auto&& convert) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(convert(item));
    return out;
}

void write_json_file(const fs::path& path, const json& doc) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) fail(ErrorKind::Io, "cannot write " + path.string());
    f << doc.dump(2) << '\n';
    if (!f) fail(ErrorKind::Io, "write failed: " + path.string());
}

int cmd_synth(const SynthArgs& a, const Globals& g, std::ostream& out) {
    synth::DatasetOptions options;
    options.setup_grid = a.setup_grid;
    const auto manifest = synth::generate_dataset(a.out, a.train_normal, a.test_normal, a.per_defect, g.seed, options);
    if (g.json) {
        out << json{{"root", a.out}, {"files", manifest.entries.size()}, {"manifest", (fs::path(a.out) / "manifest.json").string()}}.dump()
            << '\n';
    } else if (!g.quiet) {
        out << "wrote " << manifest.entries.size() << " images under " << a.out << '\n';
    }
    return kExitOk;
}

int cmd_train(const TrainArgs& a, const Globals& g, std::ostream& out) {
    TrainOptions options;
    options.algorithm = parse_algorithm(a.algo);
    options.seed = g.seed;
    if (a.epsilon) options.epsilon = *a.epsilon;
    if (a.coreset_ratio) options.coreset_ratio = *a.coreset_ratio;
    if (a.sigma) options.smoothing_sigma = *a.sigma;
    options.keep_dims = a.keep_dims;
    const DatasetLayout layout = scan_dataset(a.data);
    const TrainResult result = train(layout, options);
    const auto bytes = save(result.model);
    write_file(a.out, bytes);
    if (g.json) {
        out << json{{"model", a.out},
                    {"algorithm", to_string(options.algorithm)},
                    {"n_train", layout.train_normal.size()},
                    {"train_seconds", result.train_seconds},
                    {"model_bytes", bytes.size()},
                    {"threshold", result.model.calibration.threshold}}
                   .dump()
            << '\n';
    } else if (!g.quiet) {
        out << "trained " << to_string(options.algorithm) << " on " << layout.train_normal.size() << " images in "
            << result.train_seconds << " s; model " << bytes.size() << " bytes -> " << a.out << '\n';
    }
    return kExitOk;
}

int cmd_score(const ScoreArgs& a, const Globals&, std::ostream& out) {
    const Model model = load_file(a.model);
    const FeatureExtractor extractor(model.extractor);
    const ImageScore s = score_file(model, extractor, a.image);
    const Verdict v = verdict(s.score, model.calibration);
    if (!a.heatmap_out.empty())
        write_png(a.heatmap_out, render_heatmap(s.smoothed, load_canonical(a.image), model.calibration));
    out << json{{"path", a.image},
                {"label", to_string(v.label)},
                {"confidence_pct", v.confidence},
                {"image_score", v.image_score}}
               .dump()
        << '\n';
    return v.label == Label::Anomalous ? kExitAnomalous : kExitOk;
}

int cmd_eval(const EvalArgs& a, const Globals& g, std::ostream& out) {
    const Model model = load_file(a.model);
    const DatasetLayout layout = scan_dataset(a.data);
    EvalOptions options;
    options.f1_optimal_threshold = a.f1_optimal;
    if (!a.heatmap_dir.empty()) options.heatmap_dir = a.heatmap_dir;
    const Evaluation eval = evaluate_files(model, labeled_test_files(layout), options);
    const json report = metrics::to_json(eval.report);
    write_json_file(a.report, report);
    if (g.json) {
        out << report.dump() << '\n';
    } else if (!g.quiet) {
        const auto& r = eval.report;
        out << "images " << eval.images.size() << "  auroc " << r.auroc << "  f1_macro " << r.f1_macro << "  (tp "
            << r.confusion.tp << ", fp " << r.confusion.fp << ", fn " << r.confusion.fn << ", tn " << r.confusion.tn
            << ")\nreport -> " << a.report << '\n';
    }
    return kExitOk;
}

int cmd_bench(const BenchArgs& a, const Globals& g, std::ostream& out) {
    BenchOptions options;
    options.seed = g.seed;
    options.sizes = split_list<std::size_t>(a.sizes, [](const std::string& s) { return std::stoul(s); });
    options.algorithms = split_list<Algorithm>(a.algos, [](const std::string& s) { return parse_algorithm(s); });
    const bool temp_dir = a.work_dir.empty();
    options.work_dir = temp_dir ? fs::temp_directory_path() / ("plad_bench_" + std::to_string(g.seed)) : fs::path(a.work_dir);
    const auto records = bench(options);
    if (temp_dir) {
        std::error_code ec;
        fs::remove_all(options.work_dir, ec);
    }
    const json doc = bench_json(records);
    write_json_file(a.out, doc);
    if (g.json) out << doc.dump() << '\n';
    else if (!g.quiet) out << bench_table(records);
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Patch-based visual anomaly detection (PaDiM, PatchCore)", "plad"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    app.add_flag("--quiet", g.quiet, "Suppress progress output");
    app.add_flag("--json", g.json, "Print exactly one JSON document to stdout");
    app.fallthrough();

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic gear-tray dataset");
    synth->add_option("--out", synth_args.out, "Dataset root")->required();
    synth->add_option("--train-normal", synth_args.train_normal)->check(CLI::PositiveNumber)->capture_default_str();
    synth->add_option("--test-normal", synth_args.test_normal)->check(CLI::PositiveNumber)->capture_default_str();
    synth->add_option("--per-defect", synth_args.per_defect)->check(CLI::PositiveNumber)->capture_default_str();
    synth->add_flag("--setup-grid", synth_args.setup_grid, "Also emit every product x setup combination");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Fit a model on train/good");
    train_cmd->add_option("--data", train_args.data, "Dataset root")->required()->check(CLI::ExistingDirectory);
    train_cmd->add_option("--algo", train_args.algo)->required()->check(CLI::IsMember({"padim", "patchcore"}));
    train_cmd->add_option("--out", train_args.out, "Model container path")->required();
    auto* eps = train_cmd->add_option("--epsilon", train_args.epsilon, "PaDiM covariance regularization")
                    ->check(CLI::PositiveNumber);
    auto* ratio = train_cmd->add_option("--coreset-ratio", train_args.coreset_ratio, "PatchCore coreset fraction")
                      ->check(CLI::Range(0.0, 1.0));
    eps->excludes(ratio);
    auto* keep = train_cmd->add_option("--keep-dims", train_args.keep_dims, "PaDiM random channel subset size")
                     ->check(CLI::PositiveNumber);
    keep->excludes(ratio);
    train_cmd->add_option("--sigma", train_args.sigma, "Score-map smoothing (cells)")->check(CLI::NonNegativeNumber);

    ScoreArgs score_args;
    auto* score = app.add_subcommand("score", "Score one image; exit 3 when anomalous");
    score->add_option("--model", score_args.model)->required()->check(CLI::ExistingFile);
    score->add_option("--image", score_args.image)->required()->check(CLI::ExistingFile);
    score->add_option("--heatmap-out", score_args.heatmap_out, "Write the heatmap overlay PNG here");

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Evaluate a model on a dataset's test split");
    eval->add_option("--model", eval_args.model)->required()->check(CLI::ExistingFile);
    eval->add_option("--data", eval_args.data)->required()->check(CLI::ExistingDirectory);
    eval->add_option("--report", eval_args.report, "EvalReport JSON path")->required();
    eval->add_option("--heatmap-dir", eval_args.heatmap_dir, "Write per-image heatmaps here");
    eval->add_flag("--f1-optimal", eval_args.f1_optimal, "Use the F1-optimal threshold on this labeled set");

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "Train/evaluate across dataset sizes");
    bench_cmd->add_option("--sizes", bench_args.sizes)->capture_default_str();
    bench_cmd->add_option("--algos", bench_args.algos)->capture_default_str();
    bench_cmd->add_option("--out", bench_args.out, "Bench JSON path")->required();
    bench_cmd->add_option("--work-dir", bench_args.work_dir, "Keep generated datasets here");

    std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(rest.begin(), rest.end());
    try {
        app.parse(rest);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    // Remaining semantic checks before any filesystem work.
    if (train_cmd->parsed()) {
        const bool padim = train_args.algo == "padim";
        if (padim && train_args.coreset_ratio) {
            err << "error: --coreset-ratio applies to patchcore only\n\n" << train_cmd->help();
            return kExitUsage;
        }
        if (!padim && (train_args.epsilon || train_args.keep_dims)) {
            err << "error: --epsilon/--keep-dims apply to padim only\n\n" << train_cmd->help();
            return kExitUsage;
        }
        if (train_args.coreset_ratio && *train_args.coreset_ratio <= 0.0) {
            err << "error: --coreset-ratio must be in (0, 1]\n";
            return kExitUsage;
        }
    }
    if (bench_cmd->parsed()) {
        try {
            split_list<std::size_t>(bench_args.sizes, [](const std::string& s) {
                std::size_t pos = 0;
                const auto v = std::stoul(s, &pos);
                if (pos != s.size() || v < 4) throw std::invalid_argument(s);
                return v;
            });
            split_list<Algorithm>(bench_args.algos, [](const std::string& s) { return parse_algorithm(s); });
        } catch (const std::exception&) {
            err << "error: --sizes must be integers >= 4 and --algos padim/patchcore\n\n" << bench_cmd->help();
            return kExitUsage;
        }
    }

    try {
        if (synth->parsed()) return cmd_synth(synth_args, g, out);
        if (train_cmd->parsed()) return cmd_train(train_args, g, out);
        if (score->parsed()) return cmd_score(score_args, g, out);
        if (eval->parsed()) return cmd_eval(eval_args, g, out);
        if (bench_cmd->parsed()) return cmd_bench(bench_args, g, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace plad::cli
