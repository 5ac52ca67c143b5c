#pragma once

#include <Eigen/Core>

namespace corrthermo {

// Process-wide numerical policy. Mutate only at startup (scenario runs may use
// worker threads that read these concurrently).
struct Config {
    // Largest composite Hilbert-space dimension tensor products may produce.
    Eigen::Index max_total_dimension = 4096;
    // Run density-matrix validity checks when states are constructed.
    bool validate_states = true;
    // Eigenvalues below this are treated as zero inside logarithms.
    double entropy_clamp = 1e-12;
    // |dS| below this makes temperature ratios undefined.
    double rate_threshold = 1e-12;
};

Config& config();

// Apply environment overrides (CORRTHERMO_MAX_DIM). Called by the CLI; safe to
// call more than once.
void load_config_from_env();

}  // namespace corrthermo
