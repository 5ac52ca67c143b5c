// Acceptance gate: one line per criterion with the measured values against
// the pinned tolerances; exit status 0 only when every criterion passes.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "corrthermo/accounting.hpp"
#include "corrthermo/dephasing_qubit.hpp"
#include "corrthermo/dynamics.hpp"
#include "corrthermo/errors.hpp"
#include "corrthermo/linalg.hpp"
#include "corrthermo/quadrature.hpp"
#include "corrthermo/scenario.hpp"
#include "corrthermo/thermalizing_qubit.hpp"

#ifndef ACCEPTANCE_SCENARIO_DIR
#define ACCEPTANCE_SCENARIO_DIR "scenarios"
#endif

using namespace corrthermo;

namespace {

struct Gate {
    int failures = 0;
    void report(int index, const std::string& name, bool pass,
                const std::string& detail) {
        std::printf("[%2d] %s  %s: %s\n", index, pass ? "PASS" : "FAIL",
                    name.c_str(), detail.c_str());
        std::fflush(stdout);
        if (!pass) ++failures;
    }
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError("cannot read " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Deterministic qubit (x) qutrit testbed, matching the property-test ensemble:
// unit-spectral-norm local Hamiltonians, scaled Hermitian interaction.
struct RandomSystem {
    CompositeLayout layout;
    BipartiteSystem system;
    Matrix rho_correlated;
    Matrix rho_product;
};

RandomSystem random_system(std::uint64_t seed) {
    ScenarioRng rng(seed);
    CompositeLayout layout(2, 3);
    Matrix h_s = seeded_hermitian(2, rng);
    Matrix h_b = seeded_hermitian(3, rng);
    Matrix h_int = 0.3 * seeded_hermitian(layout.total(), rng);
    Matrix rho_corr = seeded_density(layout.total(), rng);
    Matrix rho_prod =
        tensor_product(seeded_density(2, rng), seeded_density(3, rng));
    return RandomSystem{layout,
                        BipartiteSystem(Operator::hermitian(h_s, "H_S"),
                                        Operator::hermitian(h_b, "H_B"),
                                        Operator::hermitian(h_int, "H_int"),
                                        layout),
                        rho_corr, rho_prod};
}

template <typename Body>
void guarded(Gate& gate, int index, const std::string& name, Body&& body) {
    try {
        body();
    } catch (const std::exception& err) {
        gate.report(index, name, false, std::string("exception: ") +
                                            err.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::string scenario_dir =
        argc > 1 ? argv[1] : std::string(ACCEPTANCE_SCENARIO_DIR);
    Gate gate;

    // ---------------------------------------------------------------- 1 & 2
    try {
        auto t0 = std::chrono::steady_clock::now();
        double node_res = 0.0, integrated = 0.0;
        double antisym = 0.0, heat = 0.0;
        for (std::uint64_t seed = 1; seed <= 50; ++seed) {
            RandomSystem rs = random_system(seed);
            TimeGrid grid(0.0, 0.5, 1000);
            ThermoLedger led =
                build_ledger(rs.system, rs.rho_correlated, grid);
            node_res = std::max({node_res, led.residuals.first_law_s,
                                 led.residuals.first_law_b});
            integrated = std::max(
                {integrated,
                 std::abs(led.totals.delta_u_s - led.totals.delta_q_s -
                          led.totals.delta_w_s),
                 std::abs(led.totals.delta_u_b - led.totals.delta_q_b -
                          led.totals.delta_w_b)});
            antisym = std::max(antisym, led.residuals.work_antisymmetry);
            heat = std::max(heat, led.residuals.heat_balance);
        }
        double secs = seconds_since(t0);
        gate.report(1, "per-node and integrated first law",
                    node_res <= 1e-9 && integrated <= 1e-6 && secs < 10.0,
                    "50 random correlated 2x3 systems, 1000 steps to tau=0.5: "
                    "max node residual " + num(node_res) + " (tol 1e-09), "
                    "max integrated mismatch " + num(integrated) +
                    " (tol 1e-06), " + num(secs) + " s (limit 10 s)");
        gate.report(2, "work antisymmetry and three-way heat balance",
                    antisym <= 1e-12 && heat <= 1e-9,
                    "same ensemble: max |dW_S+dW_B| " + num(antisym) +
                    " (tol 1e-12), max |dQ_S+dQ_B+dQ_chi| " + num(heat) +
                    " (tol 1e-09)");
    } catch (const std::exception& err) {
        gate.report(1, "per-node and integrated first law", false,
                    std::string("exception: ") + err.what());
        gate.report(2, "work antisymmetry and three-way heat balance", false,
                    std::string("exception: ") + err.what());
    }

    // ------------------------------------------------------------------- 3
    guarded(gate, 3, "nonnegative mutual information, conserved joint entropy",
            [&] {
        double min_mi = 0.0, ssb_drift = 0.0;
        for (std::uint64_t seed = 1; seed <= 50; ++seed) {
            RandomSystem rs = random_system(seed);
            TimeGrid grid(0.0, 0.5, 500);
            ThermoLedger led = build_ledger(rs.system, rs.rho_product, grid);
            min_mi =
                std::min(min_mi, led.residuals.min_mutual_information);
            double s0 = led.snapshots.front().s_sb;
            for (const ThermoSnapshot& s : led.snapshots)
                ssb_drift = std::max(ssb_drift, std::abs(s.s_sb - s0));
        }
        gate.report(3, "nonnegative mutual information, conserved joint entropy",
                    min_mi >= -1e-9 && ssb_drift <= 1e-9,
                    "50 random product initializations: min S_chi " +
                    num(min_mi) + " (floor -1e-09), max |S_SB(tau)-S_SB(0)| " +
                    num(ssb_drift) + " (tol 1e-09)");
    });

    // ------------------------------------------------------------------- 4
    guarded(gate, 4, "split-weight invariance and energy sum rule", [&] {
        RandomSystem rs = random_system(3);
        TimeGrid grid(0.0, 0.5, 200);
        const std::array<double, 4> alphas{-2.0, 0.0, 0.5, 1.0};
        std::vector<ThermoLedger> ledgers;
        for (double a : alphas) {
            AccountingOptions opt;
            opt.split.alpha_s = a;
            ledgers.push_back(
                build_ledger(rs.system, rs.rho_correlated, grid, opt));
        }
        const ThermoLedger& base = ledgers.back();  // alpha_s = 1
        double invariance = 0.0, sum_rule = 0.0;
        for (std::size_t v = 0; v < ledgers.size(); ++v) {
            for (std::size_t k = 0; k < base.snapshots.size(); ++k) {
                const ThermoSnapshot& a = ledgers[v].snapshots[k];
                const ThermoSnapshot& b = base.snapshots[k];
                invariance = std::max(
                    {invariance, std::abs(a.rates.dq_s - b.rates.dq_s),
                     std::abs(a.rates.dq_b - b.rates.dq_b),
                     std::abs(a.s_s - b.s_s), std::abs(a.s_b - b.s_b),
                     std::abs(a.s_sb - b.s_sb), std::abs(a.s_chi - b.s_chi),
                     std::abs(a.u_tot - b.u_tot)});
                sum_rule = std::max(
                    sum_rule, std::abs(a.u_s + a.u_b + a.u_chi - a.u_tot));
            }
        }
        gate.report(4, "split-weight invariance and energy sum rule",
                    invariance <= 1e-10 && sum_rule <= 1e-10,
                    "alpha_s in {-2, 0, 0.5, 1}: max deviation of "
                    "heat/entropy/U_tot/S_chi " + num(invariance) +
                    " (tol 1e-10), max |U_S+U_B+U_chi-U_tot| " +
                    num(sum_rule) + " (tol 1e-10)");
    });

    // ------------------------------------------------------------------- 5
    guarded(gate, 5, "weak-coupling relaxation against the closed form", [&] {
        auto t0 = std::chrono::steady_clock::now();
        ExchangeQubitSpec spec;
        spec.omega0 = 1.0;
        spec.lambda = 0.2;
        spec.beta = 1.0;
        spec.spectral_density = ohmic_spectral_density();
        EmissionRates rates = emission_rates(spec);
        double gt = rates.gamma_tilde;
        LindbladGenerator gen = thermalizing_generator(spec, rates);
        std::array<double, 3> bloch0{0.3, 0.0, 0.3};
        Matrix rho0 = qubit_from_bloch(bloch0);

        TimeGrid grid(0.0, 10.0 / gt, 10000);
        std::vector<Matrix> states = propagate_lindblad(gen, rho0, grid);
        double traj_dist = 0.0;
        for (Index k = 0; k < grid.nodes(); ++k)
            traj_dist = std::max(
                traj_dist,
                trace_distance(states[static_cast<std::size_t>(k)],
                               analytic_reduced_state(spec, rates, bloch0,
                                                      grid.node(k))));

        TimeGrid longer(0.0, 20.0 / gt, 20000);
        std::vector<Matrix> late = propagate_lindblad(gen, rho0, longer);
        Matrix gibbs = gibbs_state(0.5 * spec.omega0 * sigma_z(), spec.beta);
        double gibbs_dist = trace_distance(late.back(), gibbs);
        double secs = seconds_since(t0);
        gate.report(5, "weak-coupling relaxation against the closed form",
                    traj_dist <= 1e-6 && gibbs_dist <= 1e-3 && secs < 5.0,
                    "lambda=0.2: max trace distance to the analytic flow "
                    "over 10 relaxation times " + num(traj_dist) +
                    " (tol 1e-06), distance to the Gibbs state at 20 "
                    "relaxation times " + num(gibbs_dist) +
                    " (tol 1e-03), " + num(secs) + " s (limit 5 s)");
    });

    // ------------------------------------------------------------------- 6
    guarded(gate, 6, "perturbative consistency of the joint evolution", [&] {
        auto t0 = std::chrono::steady_clock::now();
        ExchangeQubitSpec spec;
        spec.omega0 = 1.0;
        spec.beta = 1.5;
        spec.modes = {{0.8, Cplx(0.5, 0.0)}, {1.3, Cplx(0.4, 0.0)}};
        spec.n_max = 3;
        Matrix rho_s0 = qubit_from_bloch({0.6, 0.0, 0.5});
        auto residual = [&](double lambda) {
            ExchangeQubitSpec s = spec;
            s.lambda = lambda;
            ExchangeQubitModel model = make_exchange_qubit(s);
            Matrix rho0 =
                tensor_product(rho_s0, thermal_bath_state(model));
            TimeGrid grid(0.0, 0.8, 8);
            std::vector<JointState> exact =
                propagate_exact(model.system, rho0, grid);
            double worst = 0.0;
            for (Index k = 0; k <= grid.steps; ++k) {
                PerturbativeJointStates dy = dyson_second_order(
                    model, rho_s0, grid.node(k));
                worst = std::max(
                    worst,
                    (dy.rho_sb - exact[static_cast<std::size_t>(k)].rho_sb())
                        .cwiseAbs()
                        .maxCoeff());
            }
            return worst;
        };
        double r_strong = residual(0.04);
        double r_weak = residual(0.02);
        double ratio = r_strong / r_weak;
        double secs = seconds_since(t0);
        gate.report(6, "perturbative consistency of the joint evolution",
                    ratio >= 5.5 && ratio <= 10.5 && secs < 30.0,
                    "two thermal modes, tau<=0.8: second-order residuals " +
                    num(r_strong) + " (lambda 0.04) and " + num(r_weak) +
                    " (lambda 0.02), ratio " + num(ratio) +
                    " (window [5.5, 10.5], cubic scaling predicts 8), " +
                    num(secs) + " s (limit 30 s)");
    });

    // ------------------------------------------------------------------- 7
    guarded(gate, 7, "temperature estimators on the relaxing qubit", [&] {
        ExchangeQubitSpec spec;
        spec.omega0 = 1.0;
        spec.lambda = 0.2;
        spec.beta = 1.0;
        spec.spectral_density = ohmic_spectral_density();
        EmissionRates rates = emission_rates(spec);
        double gt = rates.gamma_tilde;

        // (a) coherence-free start: the full pipeline's late-time pseudo-
        // temperature of the qubit approaches the bath temperature.
        ScenarioDocument doc = parse_scenario(R"({
          "model": "thermalizing",
          "parameters": {"omega0": 1.0, "lambda": 0.2, "beta": 1.0},
          "initial_state": {"qubit_bloch": [0.0, 0.0, 0.3]},
          "grid": {"t0": 0.0, "t1": 50.0, "steps": 2000},
          "seed": 0
        })");
        RunResult run = run_scenario(doc);
        double t_pseudo_rel = run.rows.back().t_pseudo_s.has_value()
                                  ? std::abs(*run.rows.back().t_pseudo_s *
                                                 spec.beta - 1.0)
                                  : 1.0;

        // (b) coherent start: finite-difference du/ds along the analytic
        // trajectory against the asymptotic closed form.
        std::array<double, 3> bloch0{0.3, 0.0, 0.3};
        double inv_asym =
            asymptotic_inverse_pseudo_temperature(spec, bloch0);
        Matrix h_bare = 0.5 * spec.omega0 * sigma_z();
        double tau_late = 12.0 / gt, delta = 1e-4;
        Matrix plus =
            analytic_reduced_state(spec, rates, bloch0, tau_late + delta);
        Matrix minus =
            analytic_reduced_state(spec, rates, bloch0, tau_late - delta);
        double ds =
            (von_neumann_entropy(plus) - von_neumann_entropy(minus)) /
            (2.0 * delta);
        double du = ((plus - minus) * h_bare).trace().real() / (2.0 * delta);
        double asym_rel = std::abs(ds / du / inv_asym - 1.0);

        // (c) bath-side pseudo-temperature identity T_B * dS_B = dU_B.
        LongTimeBathRates bath = longtime_bath_rates(
            spec, rates, qubit_from_bloch({0.4, -0.3, 0.1}));
        double identity_rel =
            std::abs(bath.t_pseudo_b * bath.ds_b / bath.du_b - 1.0);

        // (d) extended temperature of the nearly relaxed qubit.
        double inv_ext = inverse_extended_temperature(
            spec.omega0, analytic_bloch(spec, rates, bloch0, 50.0));
        double ext_rel = std::abs(inv_ext / spec.beta - 1.0);

        gate.report(7, "temperature estimators on the relaxing qubit",
                    t_pseudo_rel <= 1e-2 && asym_rel <= 1e-2 &&
                        identity_rel <= 1e-8 && ext_rel <= 1e-2,
                    "relative errors: late-time pseudo-temperature " +
                    num(t_pseudo_rel) + " (tol 1e-02), coherent asymptotic "
                    "formula " + num(asym_rel) + " (tol 1e-02), bath-rate "
                    "identity " + num(identity_rel) + " (tol 1e-08), "
                    "extended temperature " + num(ext_rel) + " (tol 1e-02)");
    });

    // ------------------------------------------------------------------- 8
    guarded(gate, 8, "joint dephasing against the conserved-sector solution",
            [&] {
        DephasingSpec spec;
        spec.kind = DephasingSpec::BathKind::discrete;
        spec.omega0 = 1.0;
        spec.lambda = 0.1;
        spec.beta = 1.0;
        spec.modes = {{1.0, Cplx(0.6, 0.0)}};
        spec.n_max = 30;
        DephasingModel model = make_dephasing_qubit(spec);
        Matrix rho_s0 = qubit_from_bloch({0.6, 0.0, 0.5});
        Matrix rho_b0 = model.bath.thermal_state(spec.beta);
        Matrix rho0 = tensor_product(rho_s0, rho_b0);
        TimeGrid grid(0.0, 3.0, 60);
        std::vector<JointState> states =
            propagate_exact(model.system, rho0, grid);
        double coh0 = std::abs(rho_s0(0, 1));
        double p0 = rho_s0(0, 0).real(), p1 = rho_s0(1, 1).real();

        double coh_err = 0.0, pop_err = 0.0, dq_s_max = 0.0, leakage = 0.0;
        for (Index k = 0; k <= grid.steps; ++k) {
            const JointState& st = states[static_cast<std::size_t>(k)];
            double tau = grid.node(k);
            DephasingKernels kern = dephasing_kernels(spec, tau);
            double envelope =
                coh0 * std::exp(-8.0 * spec.lambda * spec.lambda *
                                kern.big_gamma);
            coh_err = std::max(
                coh_err, std::abs(std::abs(st.rho_s()(0, 1)) - envelope));
            pop_err = std::max(
                {pop_err, std::abs(st.rho_s()(0, 0).real() - p0),
                 std::abs(st.rho_s()(1, 1).real() - p1)});
            FluxRates rates = flux_rates(model.system, st, EnergySplit{});
            dq_s_max = std::max(dq_s_max, std::abs(rates.dq_s));
            leakage = std::max(
                leakage,
                exact_reduced_states(model, rho_s0, tau).truncation_leakage);
        }
        gate.report(8, "joint dephasing against the conserved-sector solution",
                    leakage <= 1e-6 && coh_err <= 1e-6 && pop_err <= 1e-12 &&
                        dq_s_max <= 1e-12,
                    "one mode, 31 levels, tau<=3: truncation leakage " +
                    num(leakage) + " (tol 1e-06), coherence envelope error " +
                    num(coh_err) + " (tol 1e-06), population drift " +
                    num(pop_err) + " (tol 1e-12), max |dQ_S| " +
                    num(dq_s_max) + " (tol 1e-12)");
    });

    // ------------------------------------------------------------------- 9
    guarded(gate, 9, "dephasing bookkeeping identities", [&] {
        DephasingSpec spec;
        spec.kind = DephasingSpec::BathKind::discrete;
        spec.omega0 = 1.0;
        spec.lambda = 0.1;
        spec.beta = 1.0;
        spec.modes = {{1.0, Cplx(0.6, 0.0)}};
        spec.n_max = 30;
        Matrix rho_s0 = qubit_from_bloch({0.6, 0.0, 0.5});
        double identity = 0.0;
        for (double tau : {0.4, 1.1, 2.6}) {
            DephasingThermo th = closed_form_thermo(spec, rho_s0, tau);
            identity = std::max({identity, std::abs(th.dq_b + th.du_chi),
                                 std::abs(th.ds_b - spec.beta * th.dq_b)});
        }

        ScenarioDocument doc = parse_scenario(
            read_file(scenario_dir + "/dephasing_continuum.json"));
        RunResult run = run_scenario(doc);
        double sigma_b_max = 0.0;
        bool sigma_b_set = true;
        for (const LedgerRow& row : run.rows) {
            if (!row.sigma_b.has_value()) sigma_b_set = false;
            else sigma_b_max = std::max(sigma_b_max, std::abs(*row.sigma_b));
        }

        // Independent route for the continuum displacement kernel: adaptive
        // quadrature of exp(-eps w) sin^2(w tau / 2) versus the closed form
        // the ledger uses, tau^2 / (2 eps (eps^2 + tau^2)).
        DephasingSpec cont;
        cont.kind = DephasingSpec::BathKind::ohmic_continuum;
        cont.ohmic_epsilon = 1.0;
        cont.beta = 1.0;
        double delta_err = 0.0;
        for (double tau : {0.5, 1.0, 2.7}) {
            double eps = cont.ohmic_epsilon;
            QuadratureResult quad = integrate_to_infinity(
                [eps, tau](double w) {
                    double s = std::sin(0.5 * w * tau);
                    return std::exp(-eps * w) * s * s;
                },
                0.0, eps, 1e-12, {1.0 / tau}, 2.0 * M_PI / tau);
            delta_err = std::max(
                delta_err,
                std::abs(dephasing_kernels(cont, tau).big_delta - quad.value));
        }
        gate.report(9, "dephasing bookkeeping identities",
                    identity <= 1e-10 && sigma_b_set && sigma_b_max == 0.0 &&
                        delta_err <= 1e-9,
                    "max |dQ_B+dU_chi| and |dS_B-beta dQ_B| " + num(identity) +
                    " (tol 1e-10), max |Sigma_B_rate| over the shipped "
                    "continuum run " + num(sigma_b_max) +
                    " (must be exactly 0), displacement-kernel quadrature "
                    "vs closed form " + num(delta_err) + " (tol 1e-09)");
    });

    // ------------------------------------------------------------------ 10
    guarded(gate, 10, "markovian dephasing limit", [&] {
        DephasingSpec slope;
        slope.kind = DephasingSpec::BathKind::ohmic_continuum;
        slope.beta = 1.0;
        slope.ohmic_epsilon = 0.05;
        double tau_late = 50.0;
        double gamma_late = dephasing_kernels(slope, tau_late).big_gamma;
        double slope_rel =
            std::abs(gamma_late / (M_PI * tau_late / (2.0 * slope.beta)) -
                     1.0);

        DephasingSpec weak;
        weak.kind = DephasingSpec::BathKind::ohmic_continuum;
        weak.omega0 = 1.0;
        weak.lambda = 0.05;
        weak.beta = 1.0;
        weak.ohmic_epsilon = 0.05;
        double rate = markovian_dephasing_rate(weak);
        LindbladGenerator gen = dephasing_generator(weak);
        Matrix rho0 = qubit_from_bloch({0.6, 0.0, 0.5});
        TimeGrid grid(0.0, 4.0, 800);
        std::vector<Matrix> states = propagate_lindblad(gen, rho0, grid);
        double coh_err = 0.0, pop_err = 0.0;
        for (Index k = 0; k <= grid.steps; ++k) {
            const Matrix& rho = states[static_cast<std::size_t>(k)];
            double expected =
                0.3 * std::exp(-rate * grid.node(k));
            coh_err = std::max(coh_err,
                               std::abs(std::abs(rho(0, 1)) - expected));
            pop_err = std::max(pop_err,
                               std::abs(rho(0, 0).real() - 0.75));
        }
        gate.report(10, "markovian dephasing limit",
                    slope_rel <= 2e-2 && coh_err <= 1e-8 && pop_err <= 1e-12,
                    "late-time kernel slope off by " + num(slope_rel) +
                    " (tol 2e-02 relative), exponential-decay envelope "
                    "error " + num(coh_err) + " (tol 1e-08), population "
                    "drift " + num(pop_err) + " (tol 1e-12)");
    });

    // ------------------------------------------------------------------ 11
    guarded(gate, 11, "deterministic rendering of the shipped scenarios", [&] {
        const std::array<const char*, 4> names{
            "thermalizing.json", "dephasing_continuum.json",
            "dephasing_discrete.json", "custom_bipartite.json"};
        int identical = 0;
        for (const char* name : names) {
            ScenarioDocument doc =
                parse_scenario(read_file(scenario_dir + "/" + name));
            RunResult first = run_scenario(doc);
            RunResult second = run_scenario(doc);
            if (first.csv == second.csv && first.summary == second.summary)
                ++identical;
        }
        gate.report(11, "deterministic rendering of the shipped scenarios",
                    identical == 4,
                    "byte-identical ledger and summary pairs: " +
                    std::to_string(identical) + " of 4");
    });

    if (gate.failures == 0) {
        std::printf("all 11 acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d acceptance criteria failed\n", gate.failures);
    return 1;
}
