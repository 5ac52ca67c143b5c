#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "corrthermo/config.hpp"
#include "corrthermo/errors.hpp"
#include "corrthermo/scenario.hpp"

namespace {

using corrthermo::LedgerRow;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw corrthermo::ScenarioError("cannot read scenario file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
    if (!v) return nullptr;
    return *v;
}

std::string ledger_json(const std::vector<LedgerRow>& rows) {
    nlohmann::ordered_json j;
    j["columns"] = {"tau",        "U_S",        "U_B",     "U_chi",
                    "U_tot",      "Q_S_rate",   "Q_B_rate", "W_S_rate",
                    "W_B_rate",   "S_S",        "S_B",      "S_SB",
                    "S_chi",      "T_pseudo_S", "T_pseudo_B", "T_ext_S",
                    "T_ext_B",    "Sigma_S_rate", "Sigma_B_rate"};
    nlohmann::ordered_json out_rows = nlohmann::ordered_json::array();
    for (const LedgerRow& r : rows) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (double v : {r.tau, r.u_s, r.u_b, r.u_chi, r.u_tot, r.q_s, r.q_b,
                         r.w_s, r.w_b, r.s_s, r.s_b, r.s_sb, r.s_chi})
            row.push_back(v);
        for (const auto& v : {r.t_pseudo_s, r.t_pseudo_b, r.t_ext_s, r.t_ext_b,
                              r.sigma_s, r.sigma_b})
            row.push_back(optional_json(v));
        out_rows.push_back(row);
    }
    j["rows"] = out_rows;
    return j.dump(2) + "\n";
}

bool wants(const std::vector<std::string>& outputs, const char* name) {
    return std::find(outputs.begin(), outputs.end(), name) != outputs.end();
}

int dispatch(const std::string& command, const std::string& scenario_path,
             const std::string& out_dir, const std::string& format,
             bool has_alpha, double alpha_override, bool has_out,
             const std::string& param, const std::vector<double>& values,
             const corrthermo::ToleranceProfile& profile) {
    corrthermo::ScenarioDocument doc =
        corrthermo::parse_scenario(read_file(scenario_path));
    if (has_alpha) doc.alpha_s = alpha_override;

    if (command == "validate") {
        std::cout << "scenario valid\n";
        return 0;
    }

    if (command == "run") {
        corrthermo::RunResult result = corrthermo::run_scenario(doc);
        std::filesystem::create_directories(out_dir);
        std::vector<std::string> written;
        if (wants(doc.outputs, "ledger")) {
            if (format == "csv") {
                corrthermo::write_file_atomic(out_dir + "/ledger.csv",
                                              result.csv);
                written.push_back("ledger.csv");
            } else {
                corrthermo::write_file_atomic(out_dir + "/ledger.json",
                                              ledger_json(result.rows));
                written.push_back("ledger.json");
            }
        }
        if (wants(doc.outputs, "summary")) {
            corrthermo::write_file_atomic(out_dir + "/summary.json",
                                          result.summary);
            written.push_back("summary.json");
        }
        std::cout << result.rows.size() << " rows";
        for (const std::string& name : written) std::cout << " " << name;
        std::cout << "\n";
        return 0;
    }

    if (command == "compare") {
        corrthermo::CompareReport report =
            corrthermo::compare_analytic(doc, profile);
        std::cout << report.text;
        if (has_out) {
            std::filesystem::create_directories(out_dir);
            corrthermo::write_file_atomic(out_dir + "/compare_report.json",
                                          report.json);
        }
        return report.pass ? 0 : 1;
    }

    // sweep
    corrthermo::SweepResult sweep =
        corrthermo::run_sweep(doc, param, values, out_dir);
    std::cout << sweep.summary;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    corrthermo::load_config_from_env();

    CLI::App app{"bipartite quantum-thermodynamics ledgers"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = ".";
    std::string format = "csv";
    std::string param;
    std::vector<double> values;
    double alpha_override = 1.0;
    corrthermo::ToleranceProfile profile;

    CLI::App* run = app.add_subcommand("run", "evolve and write the ledger");
    CLI::App* compare = app.add_subcommand(
        "compare", "hold a run against its closed-form description");
    CLI::App* sweep =
        app.add_subcommand("sweep", "run one scenario per parameter value");
    CLI::App* validate =
        app.add_subcommand("validate", "parse and check a scenario file");

    for (CLI::App* sub : {run, compare, sweep, validate}) {
        sub->add_option("--scenario", scenario_path, "scenario JSON file")
            ->required();
        if (sub != validate) {
            sub->add_option("--alpha-s", alpha_override,
                            "override the energy-split weight");
            sub->add_option("--out", out_dir, "output directory");
        }
    }
    run->add_option("--format", format, "ledger file format")
        ->check(CLI::IsMember({"csv", "json"}));
    compare->add_option("--abs-tol", profile.abs_tol, "column pass threshold");
    compare->add_option("--rel-tol", profile.rel_tol, "column pass threshold");
    compare->add_option("--leakage-tol", profile.leakage_tol,
                        "bath truncation threshold");
    sweep->add_option("--param", param, "parameter to sweep")->required();
    sweep->add_option("--values", values, "sweep values")
        ->required()
        ->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    bool is_validate = sub->get_name() == "validate";
    bool has_alpha = !is_validate && sub->count("--alpha-s") > 0;
    bool has_out = !is_validate && sub->count("--out") > 0;

    try {
        return dispatch(sub->get_name(), scenario_path, out_dir, format,
                        has_alpha, alpha_override, has_out, param, values,
                        profile);
    } catch (const corrthermo::ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const corrthermo::StateValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const corrthermo::DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const corrthermo::NonHermitianError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const corrthermo::InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 3;
    } catch (const corrthermo::StepSizeError& e) {
        std::cerr << "convergence failure: " << e.what()
                  << " (suggested step " << e.suggested_dt << ")\n";
        return 4;
    } catch (const corrthermo::ConvergenceError& e) {
        std::cerr << "convergence failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
