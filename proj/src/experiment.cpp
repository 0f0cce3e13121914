#include "ttpudr/experiment.hpp"

#include "ttpudr/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

namespace ttpudr::exp {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string method_name(Method m) {
    switch (m) {
        case Method::kTtpudr:
            return "ttpudr";
        case Method::kPca:
            return "pca";
        case Method::kLpp:
            return "lpp";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    if (name == "ttpudr") {
        return Method::kTtpudr;
    }
    if (name == "pca") {
        return Method::kPca;
    }
    if (name == "lpp") {
        return Method::kLpp;
    }
    throw ConfigError("unknown method '" + name + "' (ttpudr, pca, lpp)");
}

void ExperimentSpec::validate() const {
    if (dataset_path.empty()) {
        throw ConfigError("no dataset path given");
    }
    if (methods.empty()) {
        throw ConfigError("no methods selected");
    }
    if (target_dims.empty()) {
        throw ConfigError("empty target-dimension sweep");
    }
    for (Index d : target_dims) {
        if (d < 1) {
            throw ConfigError("target dimensions must be positive");
        }
    }
    if (shuffles < 1) {
        throw ConfigError("need at least one shuffle");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train fraction must lie in (0, 1)");
    }
    if (noise.fraction < 0.0 || noise.fraction > 1.0) {
        throw ConfigError("noise fraction must lie in [0, 1]");
    }
    if (max_outer_iters < 1) {
        throw ConfigError("outer iteration cap must be at least 1");
    }
    solver.validate();
}

namespace {

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : value) {
        if (ch == ',' || ch == ' ' || ch == '\t') {
            if (!cur.empty()) {
                parts.push_back(cur);
                cur.clear();
            }
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) {
        parts.push_back(cur);
    }
    return parts;
}

std::vector<Index> parse_dims(const std::string& value) {
    std::vector<Index> dims;
    for (const std::string& part : split_list(value)) {
        const auto colon = part.find(':');
        try {
            if (colon == std::string::npos) {
                dims.push_back(std::stoll(part));
            } else {
                const Index lo = std::stoll(part.substr(0, colon));
                const Index hi = std::stoll(part.substr(colon + 1));
                if (hi < lo) {
                    throw ConfigError("descending range '" + part + "'");
                }
                for (Index d = lo; d <= hi; ++d) {
                    dims.push_back(d);
                }
            }
        } catch (const std::invalid_argument&) {
            throw ConfigError("bad dimension token '" + part + "'");
        }
    }
    return dims;
}

bool parse_bool(const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no" || value == "off") {
        return false;
    }
    throw ConfigError("expected a boolean, got '" + value + "'");
}

double parse_double(const std::string& value) {
    try {
        return std::stod(value);
    } catch (const std::exception&) {
        throw ConfigError("expected a number, got '" + value + "'");
    }
}

long parse_long(const std::string& value) {
    try {
        return std::stol(value);
    } catch (const std::exception&) {
        throw ConfigError("expected an integer, got '" + value + "'");
    }
}

}  // namespace

void apply_spec_key(ExperimentSpec& spec, const std::string& key, const std::string& value) {
    if (key == "data") {
        spec.dataset_path = value;
    } else if (key == "format") {
        spec.format = io::parse_format(value);
    } else if (key == "shape") {
        spec.shape.clear();
        for (const auto& p : split_list(value)) {
            spec.shape.push_back(parse_long(p));
        }
    } else if (key == "methods" || key == "method") {
        spec.methods.clear();
        for (const auto& p : split_list(value)) {
            spec.methods.push_back(parse_method(p));
        }
    } else if (key == "dims" || key == "target_dims") {
        spec.target_dims = parse_dims(value);
    } else if (key == "shuffles") {
        spec.shuffles = static_cast<int>(parse_long(value));
    } else if (key == "train_fraction") {
        spec.train_fraction = parse_double(value);
    } else if (key == "stratified") {
        spec.stratified = parse_bool(value);
    } else if (key == "noise_fraction") {
        spec.noise.fraction = parse_double(value);
    } else if (key == "noise_placement") {
        if (value == "fixed") {
            spec.noise.placement = eval::NoisePlacement::kFixed;
        } else if (value == "random") {
            spec.noise.placement = eval::NoisePlacement::kRandom;
        } else {
            throw ConfigError("noise placement must be 'fixed' or 'random'");
        }
    } else if (key == "noise_min") {
        spec.noise.min_value = parse_double(value);
    } else if (key == "noise_max") {
        spec.noise.max_value = parse_double(value);
    } else if (key == "ranks") {
        spec.ranks.clear();
        for (const auto& p : split_list(value)) {
            spec.ranks.push_back(parse_long(p));
        }
    } else if (key == "neighbors") {
        spec.neighbors = static_cast<int>(parse_long(value));
    } else if (key == "kernel_width") {
        spec.kernel_width = parse_double(value);
    } else if (key == "epsilon") {
        spec.epsilon = parse_double(value);
    } else if (key == "outer_iters") {
        spec.max_outer_iters = static_cast<int>(parse_long(value));
    } else if (key == "outer_tolerance") {
        spec.outer_tolerance = parse_double(value);
    } else if (key == "inner_iters") {
        spec.solver.max_inner_iters = static_cast<int>(parse_long(value));
    } else if (key == "grad_tolerance") {
        spec.solver.gradient_tolerance = parse_double(value);
    } else if (key == "lpp_preproject") {
        spec.lpp_preproject = parse_bool(value);
    } else if (key == "out_dir") {
        spec.output_dir = value;
    } else if (key == "seed") {
        spec.seed = static_cast<std::uint64_t>(parse_long(value));
    } else {
        throw ConfigError("unknown spec key '" + key + "'");
    }
}

ExperimentSpec load_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open spec file " + path);
    }
    ExperimentSpec spec;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.resize(hash);
        }
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        apply_spec_key(spec, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return spec;
}

namespace {

ordered_json spec_to_json(const ExperimentSpec& spec) {
    ordered_json j;
    j["data"] = spec.dataset_path;
    j["format"] = spec.format == io::DatasetFormat::kCsv
                      ? "csv"
                      : (spec.format == io::DatasetFormat::kRawTensor ? "raw" : "image-dir");
    j["shape"] = spec.shape;
    std::vector<std::string> methods;
    methods.reserve(spec.methods.size());
    for (Method m : spec.methods) {
        methods.push_back(method_name(m));
    }
    j["methods"] = methods;
    j["dims"] = spec.target_dims;
    j["shuffles"] = spec.shuffles;
    j["train_fraction"] = spec.train_fraction;
    j["stratified"] = spec.stratified;
    j["noise_fraction"] = spec.noise.fraction;
    j["noise_placement"] =
        spec.noise.placement == eval::NoisePlacement::kFixed ? "fixed" : "random";
    if (spec.noise.min_value) {
        j["noise_min"] = *spec.noise.min_value;
    }
    if (spec.noise.max_value) {
        j["noise_max"] = *spec.noise.max_value;
    }
    j["ranks"] = spec.ranks;
    j["neighbors"] = spec.neighbors;
    j["kernel_width"] = spec.kernel_width;
    j["epsilon"] = spec.epsilon;
    j["outer_iters"] = spec.max_outer_iters;
    j["outer_tolerance"] = spec.outer_tolerance;
    j["inner_iters"] = spec.solver.max_inner_iters;
    j["grad_tolerance"] = spec.solver.gradient_tolerance;
    j["lpp_preproject"] = spec.lpp_preproject;
    j["seed"] = spec.seed;
    return j;
}

struct CellWork {
    Index dim;
    int shuffle;
    Method method;
};

struct CellOutput {
    CellResult result;
    std::optional<TrainTrace> trace;
    std::optional<eval::ConfusionMatrix> confusion;
};

Matrix project_samples(const TTMap& map, const std::vector<DenseTensor>& samples) {
    Matrix feats(map.target_dim(), static_cast<Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        feats.col(static_cast<Index>(i)) = apply(map, samples[i]);
    }
    return feats;
}

CellOutput run_cell(const ExperimentSpec& spec, const eval::LabeledDataset& data,
                    const CellWork& work, double noise_min, double noise_max) {
    CellOutput out;
    out.result.dim = work.dim;
    out.result.shuffle = work.shuffle;
    out.result.method = work.method;
    const auto shuffle_u = static_cast<std::uint64_t>(work.shuffle);
    const auto method_u = static_cast<std::uint64_t>(work.method);
    const std::uint64_t split_seed = rng::derive(spec.seed, {1, shuffle_u}).next_u64();
    const std::uint64_t noise_seed = rng::derive(spec.seed, {2, shuffle_u}).next_u64();
    out.result.cell_seed =
        rng::derive(spec.seed, {3, static_cast<std::uint64_t>(work.dim), shuffle_u, method_u})
            .next_u64();

    try {
        eval::SplitResult sp = eval::split(data, spec.train_fraction, split_seed, spec.stratified);
        if (spec.noise.fraction > 0.0) {
            eval::NoiseSettings ns;
            ns.fraction = spec.noise.fraction;
            ns.placement = spec.noise.placement;
            ns.min_value = noise_min;
            ns.max_value = noise_max;
            ns.seed = noise_seed;
            sp.train = eval::inject_block_noise(sp.train, ns);
        }

        Matrix train_feats;
        Matrix test_feats;
        const Index input_dim = data.samples.front().size();
        if (work.method == Method::kTtpudr) {
            TrainConfig cfg;
            cfg.ranks = spec.ranks;
            cfg.target_dim = work.dim;
            cfg.neighbors = spec.neighbors;
            cfg.kernel_width = spec.kernel_width;
            cfg.epsilon = spec.epsilon;
            cfg.max_outer_iters = spec.max_outer_iters;
            cfg.outer_tolerance = spec.outer_tolerance;
            cfg.solver = spec.solver;
            cfg.seed = out.result.cell_seed;
            FitResult fr = fit(sp.train.samples, cfg);
            train_feats = project_samples(fr.map, sp.train.samples);
            test_feats = project_samples(fr.map, sp.test.samples);
            out.result.param_count = fr.map.param_count();
            out.trace = std::move(fr.trace);
        } else if (work.method == Method::kPca) {
            const eval::PcaModel model = eval::pca_fit(sp.train.as_columns(), work.dim);
            train_feats = model.transform(sp.train.as_columns());
            test_feats = model.transform(sp.test.as_columns());
            out.result.param_count = input_dim * work.dim;
        } else {
            const Matrix train_cols = sp.train.as_columns();
            const AffinityGraph graph =
                build_affinity(train_cols, spec.neighbors, spec.kernel_width);
            eval::LppOptions options;
            options.pca_preproject = spec.lpp_preproject;
            if (options.pca_preproject) {
                options.preproject_dim =
                    std::min(sp.train.sample_count() - data.num_classes, input_dim);
            }
            const eval::LppModel model = eval::lpp_fit(train_cols, graph, work.dim, options);
            train_feats = model.transform(train_cols);
            test_feats = model.transform(sp.test.as_columns());
            out.result.param_count = input_dim * work.dim;
        }

        const std::vector<int> predicted =
            eval::knn1_classify(train_feats, sp.train.labels, test_feats);
        out.confusion =
            eval::ConfusionMatrix::from_predictions(sp.test.labels, predicted, data.num_classes);
        out.result.metrics = eval::compute_metrics(*out.confusion);
        out.result.ok = true;
    } catch (const std::exception& e) {
        out.result.ok = false;
        out.result.error = e.what();
    }
    return out;
}

std::string cell_stem(const CellResult& r) {
    return method_name(r.method) + "_d" + std::to_string(r.dim) + "_s" +
           std::to_string(r.shuffle);
}

void write_cell_files(const ExperimentSpec& spec, const ordered_json& spec_json,
                      const CellOutput& out) {
    const fs::path dir(spec.output_dir);
    const std::string stem = cell_stem(out.result);

    ordered_json j;
    j["method"] = method_name(out.result.method);
    j["target_dim"] = out.result.dim;
    j["shuffle"] = out.result.shuffle;
    j["cell_seed"] = out.result.cell_seed;
    j["status"] = out.result.ok ? "ok" : "error";
    if (!out.result.ok) {
        j["error"] = out.result.error;
    } else {
        j["param_count"] = out.result.param_count;
        j["metrics"] = {{"oa", out.result.metrics.oa},
                        {"aa", out.result.metrics.aa},
                        {"kc_paper", out.result.metrics.kc_paper},
                        {"kc_cohen", out.result.metrics.kc_cohen}};
        std::vector<std::vector<int>> confusion;
        for (Index r = 0; r < out.confusion->counts.rows(); ++r) {
            std::vector<int> row;
            for (Index c = 0; c < out.confusion->counts.cols(); ++c) {
                row.push_back(out.confusion->counts(r, c));
            }
            confusion.push_back(std::move(row));
        }
        j["confusion"] = confusion;
    }
    j["spec"] = spec_json;

    std::ofstream jf(dir / ("run_" + stem + ".json"));
    jf << j.dump(2) << "\n";

    if (out.confusion) {
        io::save_confusion_csv(*out.confusion, (dir / ("confusion_" + stem + ".csv")).string());
    }
    if (out.trace) {
        std::ofstream tf(dir / ("trace_" + stem + ".csv"));
        tf.precision(17);
        tf << "iteration,objective,surrogate,defect,seconds\n";
        tf << "0," << out.trace->initial_objective << ",,,\n";
        for (std::size_t i = 0; i < out.trace->objective.size(); ++i) {
            tf << (i + 1) << "," << out.trace->objective[i] << "," << out.trace->surrogate[i]
               << "," << out.trace->defect[i] << "," << out.trace->seconds[i] << "\n";
        }
    }
}

int pool_size() {
    if (const char* env = std::getenv("TTPUDR_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) {
            return n;
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const eval::LabeledDataset data =
        io::load_dataset(spec.dataset_path, spec.format, spec.shape);

    double noise_min = 0.0;
    double noise_max = 0.0;
    if (spec.noise.fraction > 0.0) {
        noise_min = spec.noise.min_value.value_or(
            [&] {
                double v = data.samples.front().data().front();
                for (const auto& s : data.samples) {
                    for (double x : s.data()) {
                        v = std::min(v, x);
                    }
                }
                return v;
            }());
        noise_max = spec.noise.max_value.value_or(
            [&] {
                double v = data.samples.front().data().front();
                for (const auto& s : data.samples) {
                    for (double x : s.data()) {
                        v = std::max(v, x);
                    }
                }
                return v;
            }());
    }

    fs::create_directories(spec.output_dir);

    std::vector<CellWork> work;
    for (Index dim : spec.target_dims) {
        for (int s = 0; s < spec.shuffles; ++s) {
            for (Method m : spec.methods) {
                work.push_back(CellWork{dim, s, m});
            }
        }
    }

    std::vector<CellOutput> outputs(work.size());
    std::atomic<std::size_t> next{0};
    const int threads = std::min<int>(pool_size(), static_cast<int>(work.size()));
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= work.size()) {
                return;
            }
            outputs[i] = run_cell(spec, data, work[i], noise_min, noise_max);
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int i = 0; i < threads; ++i) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    const ordered_json spec_json = spec_to_json(spec);
    for (const CellOutput& out : outputs) {
        write_cell_files(spec, spec_json, out);
    }

    // aggregate over shuffles: mean metrics per (method, dim)
    std::ofstream agg(fs::path(spec.output_dir) / "aggregate.csv");
    agg.precision(17);
    agg << "method,dim,runs_ok,runs_failed,mean_oa,mean_aa,mean_kc_paper,mean_kc_cohen,"
           "mean_param_count\n";
    std::ofstream plot(fs::path(spec.output_dir) / "plot_oa.csv");
    plot.precision(17);
    plot << "dim";
    for (Method m : spec.methods) {
        plot << ",oa_" << method_name(m);
    }
    plot << "\n";

    for (Index dim : spec.target_dims) {
        plot << dim;
        for (Method m : spec.methods) {
            int ok = 0;
            int failed = 0;
            double oa = 0.0;
            double aa = 0.0;
            double kp = 0.0;
            double kcn = 0.0;
            double pc = 0.0;
            for (const CellOutput& out : outputs) {
                if (out.result.dim != dim || out.result.method != m) {
                    continue;
                }
                if (!out.result.ok) {
                    ++failed;
                    continue;
                }
                ++ok;
                oa += out.result.metrics.oa;
                aa += out.result.metrics.aa;
                kp += out.result.metrics.kc_paper;
                kcn += out.result.metrics.kc_cohen;
                pc += static_cast<double>(out.result.param_count);
            }
            agg << method_name(m) << "," << dim << "," << ok << "," << failed;
            if (ok > 0) {
                agg << "," << oa / ok << "," << aa / ok << "," << kp / ok << "," << kcn / ok
                    << "," << pc / ok;
                plot << "," << oa / ok;
            } else {
                agg << ",,,,,";
                plot << ",";
            }
            agg << "\n";
        }
        plot << "\n";
    }

    ExperimentResult result;
    result.output_dir = spec.output_dir;
    for (CellOutput& out : outputs) {
        result.cells.push_back(std::move(out.result));
    }
    return result;
}

}  // namespace ttpudr::exp
