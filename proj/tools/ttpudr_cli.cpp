#include "ttpudr/dataset_io.hpp"
#include "ttpudr/experiment.hpp"
#include "ttpudr/trainer.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace ttpudr;

struct DataArgs {
    std::string path;
    std::string format = "raw";
    std::vector<Index> shape;
};

void add_data_options(CLI::App* cmd, DataArgs& args) {
    cmd->add_option("--data", args.path, "dataset path")->required();
    cmd->add_option("--format", args.format, "csv | raw | image-dir");
    cmd->add_option("--shape", args.shape, "tensor mode sizes (csv datasets)");
}

eval::LabeledDataset load(const DataArgs& args) {
    return io::load_dataset(args.path, io::parse_format(args.format), args.shape);
}

void write_affinity_csv(const Matrix& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open " + path + " for writing");
    }
    out.precision(17);
    for (Index i = 0; i < s.rows(); ++i) {
        for (Index j = 0; j < s.cols(); ++j) {
            out << (j ? "," : "") << s(i, j);
        }
        out << "\n";
    }
}

int run(int argc, char** argv) {
    CLI::App app{"TTPUDR: tensor-train parameterized robust locality preserving projections"};
    app.require_subcommand(1);

    // ---- fit ----
    auto* fit_cmd = app.add_subcommand("fit", "train a TT map on a dataset");
    DataArgs fit_data;
    add_data_options(fit_cmd, fit_data);
    TrainConfig cfg;
    std::string model_out = "model.ttm";
    std::string trace_out;
    std::string affinity_out;
    fit_cmd->add_option("--ranks", cfg.ranks, "internal TT ranks R_1..R_{n-1}");
    fit_cmd->add_option("--target-dim", cfg.target_dim, "reduced dimension R_n");
    fit_cmd->add_option("--neighbors", cfg.neighbors, "kNN neighbor count");
    fit_cmd->add_option("--kernel-width", cfg.kernel_width, "heat kernel width t");
    fit_cmd->add_option("--epsilon", cfg.epsilon, "reweighting denominator guard");
    fit_cmd->add_option("--iters", cfg.max_outer_iters, "outer iteration cap");
    fit_cmd->add_option("--tol", cfg.outer_tolerance, "outer convergence tolerance");
    fit_cmd->add_option("--inner-iters", cfg.solver.max_inner_iters, "inner solver cap");
    fit_cmd->add_option("--grad-tol", cfg.solver.gradient_tolerance, "inner gradient tolerance");
    fit_cmd->add_option("--seed", cfg.seed, "RNG seed");
    fit_cmd->add_option("--out", model_out, "output model path");
    fit_cmd->add_option("--trace", trace_out, "training trace CSV path");
    fit_cmd->add_option("--dump-affinity", affinity_out,
                        "write S (and final S~) as CSV with this prefix");

    // ---- transform ----
    auto* transform_cmd = app.add_subcommand("transform", "project a dataset with a saved model");
    DataArgs tr_data;
    add_data_options(transform_cmd, tr_data);
    std::string tr_model;
    std::string tr_out = "features.csv";
    transform_cmd->add_option("--model", tr_model, "TT model path")->required();
    transform_cmd->add_option("--out", tr_out, "output features CSV");

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "single train/test evaluation run");
    DataArgs ev_data;
    add_data_options(eval_cmd, ev_data);
    std::vector<std::string> ev_overrides;
    std::string ev_method = "ttpudr";
    exp::ExperimentSpec ev_spec;
    eval_cmd->add_option("--method", ev_method, "ttpudr | pca | lpp");
    eval_cmd->add_option("--target-dim", ev_spec.target_dims, "reduced dimension(s)");
    eval_cmd->add_option("--set", ev_overrides, "spec overrides as key=value")->take_all();
    eval_cmd->add_option("--out-dir", ev_spec.output_dir, "report directory");
    eval_cmd->add_option("--seed", ev_spec.seed, "master seed");

    // ---- sweep ----
    auto* sweep_cmd = app.add_subcommand("sweep", "run a full experiment spec");
    std::string sweep_config;
    std::vector<std::string> sweep_overrides;
    sweep_cmd->add_option("--config", sweep_config, "key = value spec file")->required();
    sweep_cmd->add_option("--set", sweep_overrides, "spec overrides as key=value")->take_all();

    // ---- noise ----
    auto* noise_cmd = app.add_subcommand("noise", "inject salt-and-pepper block noise");
    DataArgs nz_data;
    add_data_options(noise_cmd, nz_data);
    eval::NoiseSettings nz;
    bool nz_random = false;
    bool have_min = false;
    bool have_max = false;
    std::string nz_out = "noised.bin";
    noise_cmd->add_option("--fraction", nz.fraction, "fraction of images to corrupt");
    noise_cmd->add_option("--block", nz.block, "block side length");
    noise_cmd->add_flag("--random-placement", nz_random, "uniform random block placement");
    noise_cmd->add_option("--min", nz.min_value, "pepper value (default: dataset min)")
        ->each([&](const std::string&) { have_min = true; });
    noise_cmd->add_option("--max", nz.max_value, "salt value (default: dataset max)")
        ->each([&](const std::string&) { have_max = true; });
    noise_cmd->add_option("--seed", nz.seed, "RNG seed");
    noise_cmd->add_option("--out", nz_out, "output raw dataset path");

    // ---- model inspect ----
    auto* model_cmd = app.add_subcommand("model", "model utilities");
    auto* inspect_cmd = model_cmd->add_subcommand("inspect", "print model structure");
    std::string in_model;
    inspect_cmd->add_option("--model", in_model, "TT model path")->required();
    model_cmd->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    if (fit_cmd->parsed()) {
        const auto data = load(fit_data);
        const AffinityGraph graph = build_affinity(data.samples, cfg.neighbors, cfg.kernel_width);
        if (!affinity_out.empty()) {
            write_affinity_csv(graph.S, affinity_out + "_S.csv");
        }
        const FitResult result = fit(data.samples, graph, cfg);
        save_ttmap_file(result.map, model_out);
        if (!affinity_out.empty()) {
            const ReweightedGraph rw = reweight(graph, result.map, data.samples, cfg.epsilon);
            write_affinity_csv(rw.S, affinity_out + "_Stilde.csv");
        }
        if (!trace_out.empty()) {
            std::ofstream tf(trace_out);
            tf.precision(17);
            tf << "iteration,objective,surrogate,defect,seconds\n";
            tf << "0," << result.trace.initial_objective << ",,,\n";
            for (std::size_t i = 0; i < result.trace.objective.size(); ++i) {
                tf << (i + 1) << "," << result.trace.objective[i] << ","
                   << result.trace.surrogate[i] << "," << result.trace.defect[i] << ","
                   << result.trace.seconds[i] << "\n";
            }
        }
        std::cout << "fit: " << data.sample_count() << " samples, objective "
                  << result.trace.initial_objective << " -> "
                  << (result.trace.objective.empty() ? result.trace.initial_objective
                                                     : result.trace.objective.back())
                  << (result.trace.converged ? " (converged)" : "") << ", model " << model_out
                  << "\n";
        return 0;
    }

    if (transform_cmd->parsed()) {
        const auto data = load(tr_data);
        const TTMap map = load_ttmap_file(tr_model);
        Matrix feats(map.target_dim(), data.sample_count());
        for (Index i = 0; i < data.sample_count(); ++i) {
            feats.col(i) = apply(map, data.samples[static_cast<std::size_t>(i)]);
        }
        io::save_matrix_csv(feats, tr_out);
        std::cout << "transform: wrote " << data.sample_count() << " feature rows to " << tr_out
                  << "\n";
        return 0;
    }

    if (eval_cmd->parsed() || sweep_cmd->parsed()) {
        exp::ExperimentSpec spec;
        if (sweep_cmd->parsed()) {
            spec = exp::load_spec_file(sweep_config);
            for (const std::string& kv : sweep_overrides) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) {
                    throw ConfigError("--set expects key=value, got '" + kv + "'");
                }
                exp::apply_spec_key(spec, kv.substr(0, eq), kv.substr(eq + 1));
            }
        } else {
            spec = ev_spec;
            spec.dataset_path = ev_data.path;
            spec.format = io::parse_format(ev_data.format);
            spec.shape = ev_data.shape;
            spec.methods = {exp::parse_method(ev_method)};
            for (const std::string& kv : ev_overrides) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) {
                    throw ConfigError("--set expects key=value, got '" + kv + "'");
                }
                exp::apply_spec_key(spec, kv.substr(0, eq), kv.substr(eq + 1));
            }
        }
        const exp::ExperimentResult result = exp::run_experiment(spec);
        int failed = 0;
        for (const auto& cell : result.cells) {
            std::cout << exp::method_name(cell.method) << " dim=" << cell.dim
                      << " shuffle=" << cell.shuffle << ": ";
            if (cell.ok) {
                std::cout << "OA=" << cell.metrics.oa << " AA=" << cell.metrics.aa
                          << " params=" << cell.param_count << "\n";
            } else {
                std::cout << "FAILED (" << cell.error << ")\n";
                ++failed;
            }
        }
        std::cout << "reports written to " << result.output_dir << "\n";
        return failed == static_cast<int>(result.cells.size()) && failed > 0 ? 4 : 0;
    }

    if (noise_cmd->parsed()) {
        auto data = load(nz_data);
        if (!have_min || !have_max) {
            double lo = data.samples.front().data().front();
            double hi = lo;
            for (const auto& s : data.samples) {
                for (double x : s.data()) {
                    lo = std::min(lo, x);
                    hi = std::max(hi, x);
                }
            }
            if (!have_min) {
                nz.min_value = lo;
            }
            if (!have_max) {
                nz.max_value = hi;
            }
        }
        nz.placement = nz_random ? eval::NoisePlacement::kRandom : eval::NoisePlacement::kFixed;
        const auto noised = eval::inject_block_noise(data, nz);
        io::save_raw_dataset(noised, nz_out);
        std::cout << "noise: corrupted "
                  << static_cast<Index>(std::ceil(nz.fraction * data.sample_count() - 1e-9))
                  << " of " << data.sample_count() << " images, wrote " << nz_out << "\n";
        return 0;
    }

    if (inspect_cmd->parsed()) {
        const TTMap map = load_ttmap_file(in_model);
        std::cout << "cores: " << map.order() << "\n";
        for (Index k = 0; k < map.order(); ++k) {
            const TTCore& c = map.core(k);
            std::cout << "  core " << k << ": " << c.left_rank() << " x " << c.mode_size()
                      << " x " << c.right_rank() << " (gram defect " << c.gram_defect() << ")\n";
        }
        std::cout << "input dim: " << map.input_size() << "\n";
        std::cout << "target dim: " << map.target_dim() << "\n";
        std::cout << "parameters: " << map.param_count() << "\n";
        std::cout << "chain orthonormality defect: " << orthonormality_defect(map) << "\n";
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ttpudr::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ttpudr::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const ttpudr::ShapeError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const ttpudr::Error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
