#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "corrthermo/dephasing_qubit.hpp"
#include "corrthermo/dynamics.hpp"
#include "corrthermo/linalg.hpp"
#include "corrthermo/thermalizing_qubit.hpp"

namespace corrthermo {

struct GridSpec {
    double t0 = 0.0;
    double t1 = 1.0;
    Index steps = 200;
};

struct BathStateSpec {
    enum class Kind { thermal, vacuum, explicit_diagonal };
    Kind kind = Kind::thermal;
    std::vector<double> diagonal;  // occupation-basis weights, explicit only
};

struct ThermalizingParams {
    double omega0 = 1.0;
    double lambda = 0.1;
    double beta = 1.0;
    double spectral_decay = 1.0;
};

struct CustomParams {
    Index dim_s = 2;
    Index dim_b = 3;
    double interaction_scale = 0.3;
};

struct ScenarioDocument {
    enum class Model { thermalizing, dephasing, custom_bipartite };
    enum class InitialKind { random_correlated, random_product };

    Model model = Model::dephasing;
    ThermalizingParams thermalizing;
    DephasingSpec dephasing;
    CustomParams custom;

    std::array<double, 3> qubit_bloch = {0.6, 0.0, 0.5};
    BathStateSpec bath_state;
    InitialKind custom_initial = InitialKind::random_correlated;

    double alpha_s = 1.0;
    GridSpec grid;
    std::vector<std::string> outputs = {"ledger", "summary"};
    std::uint64_t seed = 0;
};

ScenarioDocument parse_scenario(const std::string& text);
std::string serialize_scenario(const ScenarioDocument& doc);

// Deterministic scenario RNG: xorshift-fed Box-Muller, bit-stable across
// standard libraries (std distributions are implementation-defined).
class ScenarioRng {
  public:
    explicit ScenarioRng(std::uint64_t seed);
    double uniform();  // [0, 1)
    double gaussian();
    Cplx complex_gaussian();

  private:
    std::uint64_t state_;
    std::uint64_t next_word();
};

Matrix seeded_hermitian(Index dim, ScenarioRng& rng);  // unit spectral norm
Matrix seeded_density(Index dim, ScenarioRng& rng);    // Ginibre ensemble

struct LedgerRow {
    double tau = 0.0;
    double u_s = 0.0, u_b = 0.0, u_chi = 0.0, u_tot = 0.0;
    double q_s = 0.0, q_b = 0.0, w_s = 0.0, w_b = 0.0;
    double s_s = 0.0, s_b = 0.0, s_sb = 0.0, s_chi = 0.0;
    std::optional<double> t_pseudo_s, t_pseudo_b, t_ext_s, t_ext_b;
    std::optional<double> sigma_s, sigma_b;
};

struct RunResult {
    std::vector<LedgerRow> rows;
    LedgerTotals totals;
    ResidualMaxima residuals;
    std::string csv;
    std::string summary;
};

RunResult run_scenario(const ScenarioDocument& doc);

std::string format_ledger_csv(const std::vector<LedgerRow>& rows);

struct ToleranceProfile {
    double abs_tol = 1e-6;
    double rel_tol = 1e-6;
    double leakage_tol = 1e-6;
};

struct ColumnDeviation {
    std::string column;
    double max_abs = 0.0;
    double max_rel = 0.0;
    bool pass = true;
};

struct CompareReport {
    bool pass = true;
    std::string failure_cause;
    std::vector<ColumnDeviation> columns;
    std::string json;
    std::string text;
};

// Rerun the scenario and hold it against its closed-form description.
// Throws ScenarioError for the custom model, which has no oracle.
CompareReport compare_analytic(const ScenarioDocument& doc,
                               const ToleranceProfile& profile = {});

struct SweepEntry {
    double value = 0.0;
    std::string ledger_filename;
    double oracle_residual = 0.0;  // max abs column deviation vs oracle
    bool has_oracle = false;
};

struct SweepResult {
    std::vector<SweepEntry> entries;
    std::vector<double> residual_ratios;  // consecutive oracle residuals
    std::string summary;
};

// Run one scenario per value of `parameter` (lambda, alpha_s, ...), writing
// ledgers into out_dir concurrently and atomically.
SweepResult run_sweep(const ScenarioDocument& doc, const std::string& parameter,
                      const std::vector<double>& values,
                      const std::string& out_dir);

// Atomic file write: temp file in the target directory, then rename.
void write_file_atomic(const std::string& path, const std::string& bytes);

}  // namespace corrthermo
