#pragma once

#include "ttpudr/dataset_io.hpp"
#include "ttpudr/evalbench.hpp"
#include "ttpudr/trainer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ttpudr::exp {

enum class Method { kTtpudr, kPca, kLpp };

std::string method_name(Method m);
Method parse_method(const std::string& name);

struct NoiseSpec {
    double fraction = 0.0;  // 0 disables
    eval::NoisePlacement placement = eval::NoisePlacement::kFixed;
    /// When unset, extreme values are the dataset's global min/max.
    std::optional<double> min_value;
    std::optional<double> max_value;
};

/// Fully resolved description of one experiment: dataset, methods, the
/// target-dimension sweep, shuffles, split, noise, and hyperparameters.
struct ExperimentSpec {
    std::string dataset_path;
    io::DatasetFormat format = io::DatasetFormat::kRawTensor;
    std::vector<Index> shape;  // required for csv without a header line

    std::vector<Method> methods{Method::kTtpudr};
    std::vector<Index> target_dims{2};
    int shuffles = 1;
    double train_fraction = 0.6;
    bool stratified = true;
    NoiseSpec noise;

    std::vector<Index> ranks;  // TT ranks R_1..R_{n-1}
    int neighbors = 4;
    double kernel_width = 1.0;
    double epsilon = 1e-8;
    int max_outer_iters = 15;
    double outer_tolerance = 1e-6;
    stiefel::SolverSettings solver;
    bool lpp_preproject = false;

    std::string output_dir = ".";
    std::uint64_t seed = 1;

    void validate() const;
};

/// Parse "key = value" lines ('#' comments) into a spec, starting from the
/// defaults. Unknown keys are an error.
ExperimentSpec load_spec_file(const std::string& path);

/// Apply one key=value assignment (also used for CLI flag overrides).
void apply_spec_key(ExperimentSpec& spec, const std::string& key, const std::string& value);

struct CellResult {
    Index dim = 0;
    int shuffle = 0;
    Method method = Method::kPca;
    bool ok = false;
    std::string error;
    eval::Metrics metrics;
    Index param_count = 0;
    std::uint64_t cell_seed = 0;
};

struct ExperimentResult {
    std::vector<CellResult> cells;  // ordered dim-major, then shuffle, then method
    std::string output_dir;
};

/// Run every (dim, shuffle, method) cell: split, optionally noise the
/// training side, fit, project, 1NN, metrics. Cells run on a work pool
/// (TTPUDR_THREADS); outputs are written in deterministic order afterwards.
/// Per-cell failures are recorded, not fatal.
ExperimentResult run_experiment(const ExperimentSpec& spec);

}  // namespace ttpudr::exp
