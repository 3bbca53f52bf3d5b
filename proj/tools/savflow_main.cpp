#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "savflow/harness.hpp"

using namespace savflow;

namespace {

std::vector<double> parse_ladder(const std::string& s) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        std::string item = s.substr(pos, comma == std::string::npos ? std::string::npos
                                                                    : comma - pos);
        try {
            std::size_t used = 0;
            double v = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument("trailing");
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError("--dt-ladder: bad entry '" + item + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::vector<std::string> split_names(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        out.push_back(s.substr(pos, comma == std::string::npos ? std::string::npos
                                                               : comma - pos));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

RunConfig load_config(const std::string& config_path, const std::string& scenario,
                      const std::vector<std::string>& overrides) {
    if (config_path.empty() == scenario.empty())
        throw ConfigError("exactly one of --config / --scenario is required");
    RunConfig cfg = config_path.empty() ? scenario_config(scenario)
                                        : parse_config_file(config_path);
    for (const auto& o : overrides) apply_override(cfg, o);
    validate_config(cfg);
    return cfg;
}

void cmd_run(const RunConfig& cfg) {
    RunArtifacts art = run_config(cfg);
    const EnergyRecord& last = art.records.back();
    std::printf("run: %s, %ld steps to t = %.6g\n", to_string(cfg.scheme).c_str(),
                last.step, last.t);
    std::printf("  E_original = %.10g  E_modified = %.10g  R = %.10g\n",
                last.E_original, last.E_modified, last.R);
    std::printf("  energy csv: %s\n", art.csv_path.c_str());
    for (const auto& p : art.snapshot_paths)
        std::printf("  snapshot: %s\n", p.c_str());
    if (art.disc_fallbacks)
        std::printf("  note: %ld rsav steps used the lambda = 1 fallback\n",
                    art.disc_fallbacks);
}

void cmd_converge(const RunConfig& cfg, const std::string& ladder_str, bool self_ref,
                  int refine) {
    std::vector<double> ladder = parse_ladder(ladder_str);
    OrderEstimate est = run_convergence(
        cfg, ladder,
        self_ref ? ConvergenceReference::fine_dt_self_reference
                 : ConvergenceReference::manufactured,
        refine, /*write_outputs=*/true);
    std::printf("convergence: %s, %zu rungs\n", to_string(cfg.scheme).c_str(),
                est.dt.size());
    for (std::size_t i = 0; i < est.dt.size(); ++i) {
        std::printf("  dt = %-12.6g error = %-14.8g", est.dt[i], est.error[i]);
        if (i) std::printf(" order = %.3f", est.pairwise[i - 1]);
        std::printf("\n");
    }
    std::printf("  fitted order = %.3f\n", est.fitted);
}

void cmd_compare(const RunConfig& base, const std::string& schemes_str,
                 const std::string& column) {
    CompareColumn col;
    if (column == "diagnostic") col = CompareColumn::diagnostic;
    else if (column == "e_original") col = CompareColumn::e_original;
    else if (column == "e_modified") col = CompareColumn::e_modified;
    else if (column == "r") col = CompareColumn::r;
    else throw ConfigError("--column: expected diagnostic|e_original|e_modified|r");

    std::vector<std::string> names = split_names(schemes_str);
    if (names.size() < 2) throw ConfigError("--schemes: need at least two names");
    std::vector<std::vector<EnergyRecord>> runs;
    for (const auto& name : names) {
        RunConfig cfg = base;
        cfg.scheme = scheme_from_name(name);
        cfg.out_dir = base.out_dir + "/" + name;
        validate_config(cfg);
        runs.push_back(run_config(cfg).records);
    }
    ComparisonTable tab = compare_runs(runs, names, col);
    std::string path = base.out_dir + "/compare_" + column + ".csv";
    write_comparison_csv(tab, path);
    std::printf("compare (%s), %zu records each\n", column.c_str(), tab.time.size());
    for (std::size_t c = 0; c < names.size(); ++c)
        std::printf("  %-12s max |%s| = %.10g\n", names[c].c_str(), column.c_str(),
                    tab.max_abs[c]);
    std::printf("  table: %s\n", path.c_str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"savflow: auxiliary-variable integrators for gradient flows "
                 "and incompressible Navier-Stokes"};
    app.require_subcommand(1);

    std::string config_path, scenario, ladder_str, schemes_str;
    std::string column = "diagnostic";
    std::vector<std::string> overrides;
    bool self_ref = false;
    int refine = 8;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "INI run configuration file");
        cmd->add_option("--scenario", scenario, "preset scenario name");
        cmd->add_option("--override", overrides, "section.key=value (repeatable)");
    };
    CLI::App* run_cmd = app.add_subcommand("run", "advance one configured run");
    add_common(run_cmd);
    CLI::App* conv_cmd = app.add_subcommand("converge", "dt-ladder order study");
    add_common(conv_cmd);
    conv_cmd->add_option("--dt-ladder", ladder_str, "comma list, strictly decreasing")
        ->required();
    conv_cmd->add_flag("--self-reference", self_ref,
                       "compare against a fine-dt run instead of the manufactured solution");
    conv_cmd->add_option("--refine", refine, "self-reference refinement factor");
    CLI::App* cmp_cmd = app.add_subcommand("compare", "one run under several schemes");
    add_common(cmp_cmd);
    cmp_cmd->add_option("--schemes", schemes_str, "comma list of scheme names")
        ->required();
    cmp_cmd->add_option("--column", column, "diagnostic|e_original|e_modified|r");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2; // command-line mistakes are config errors
    }

    try {
        RunConfig cfg = load_config(config_path, scenario, overrides);
        if (run_cmd->parsed()) cmd_run(cfg);
        else if (conv_cmd->parsed()) cmd_converge(cfg, ladder_str, self_ref, refine);
        else cmd_compare(cfg, schemes_str, column);
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
