#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "driftnet/composition.hpp"
#include "driftnet/theory.hpp"
#include "driftnet/trainer.hpp"

namespace driftnet {

// All problems found in a config, joined into one message; `issues` keeps
// them separately for tooling.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(std::vector<std::string> problems);
    std::vector<std::string> issues;
};

struct ModelConfig {
    // additive | product-of-splines | single-layer-polynomial; the default
    // pairs with the default smoothness block (q = 0, one stage).
    std::string recipe = "single-layer-polynomial";
    int dim = 1;
    int coord = 1;            // 1-based drift component to estimate
    double radial_rate = 0.5; // inward pull r of the confinement
    double noise = 1.0;       // sigma in S = sigma * I
    std::vector<double> coeffs;  // polynomial recipe only; empty -> seeded draw
};

struct GridCell {
    std::int64_t n = 0;
    double delta = 0.0;
};

struct ArchitectureConfig {
    std::string source = "auto";  // auto (selection rule) | explicit
    double sup_bound = 0.0;       // 0 -> max(1, holder_k)
    TheoryConstants constants;    // used when source == auto
    int depth = 0;                // used when source == explicit
    int width = 0;
    std::int64_t sparsity = 0;
};

struct EvalConfig {
    std::int64_t copies = 16;  // independent paths for the generalization risk
    int substeps = 0;          // 0 -> ceil(delta/micro_step), clamped to [1, 50]
    double micro_step = 0.002;
};

struct SeedsConfig {
    std::uint64_t base = 1;
    int count = 1;
};

struct ExperimentConfig {
    ModelConfig model;
    ClassParams smoothness;
    std::vector<GridCell> grid;
    TrainConfig train;
    ArchitectureConfig architecture;
    EvalConfig eval;
    SeedsConfig seeds;
    std::string out_dir = "out";
};

// Parses and validates a config. Unknown keys are rejected (with a spelling
// suggestion when one key is a near miss), every violation is collected
// before throwing, and omitted keys take the documented defaults.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& file);

// Canonical serialized form: fixed key order, all defaults materialized.
// parse_config_text(canonical_text(c)) reproduces c exactly.
std::string canonical_text(const ExperimentConfig& cfg);

// Micro-step policy: substeps override, else ceil(delta/micro_step) in [1, 50].
int resolve_substeps(const EvalConfig& eval, double delta);

}  // namespace driftnet
