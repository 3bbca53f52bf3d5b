#include "savflow/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "savflow/spectral.hpp"

namespace savflow {

namespace {

std::string fmt_time(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

// Run f(0..n-1) on up to thread_cap() workers; the first exception wins.
template <class F>
void parallel_for(std::size_t n, F f) {
    const std::size_t workers = std::min<std::size_t>(
        static_cast<std::size_t>(thread_cap()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!err) err = std::current_exception();
                    return;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-30) throw NumericError("order fit: degenerate ladder");
    return (n * sxy - sx * sy) / denom;
}

} // namespace

int thread_cap() {
    if (const char* env = std::getenv("SAVFLOW_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v >= 1) return static_cast<int>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

Model model_from_config(const RunConfig& cfg) {
    std::array<double, max_dim> ext{};
    std::array<int, max_dim> mod{};
    for (int a = 0; a < cfg.dim; ++a) {
        ext[a] = cfg.extents[a];
        mod[a] = cfg.modes[a];
    }
    PeriodicGrid grid = build_grid(cfg.dim, ext, mod);
    Model m = make_model(cfg.model, grid, cfg.params, cfg.C, cfg.C0);
    m.forcing = resolved_forcing(cfg);
    m.dealias_rule = cfg.dealias;
    return m;
}

SchemeConfig scheme_from_config(const RunConfig& cfg) {
    SchemeConfig sc;
    sc.kind = cfg.scheme;
    sc.k = cfg.k;
    sc.dt = cfg.dt;
    sc.t0 = cfg.t0;
    sc.eta = cfg.eta;
    sc.exponent_override = cfg.exponent_override;
    sc.startup = cfg.startup;
    sc.startup_substeps = cfg.startup_substeps;
    sc.sav_denominator = cfg.sav_denominator;
    return sc;
}

PreparedRun prepare_run(const RunConfig& cfg) {
    validate_config(cfg);
    PreparedRun run{model_from_config(cfg), {}};
    SchemeConfig sc = scheme_from_config(cfg);
    IcParams icp = cfg.ic_params;
    icp.t0 = cfg.t0;
    if (cfg.model == ModelKind::navier_stokes) {
        VectorField u0 = make_initial_velocity(cfg.ic, run.model.grid, icp);
        run.state = init_state(run.model, sc, u0);
    } else {
        ScalarField phi0 = make_initial_scalar(cfg.ic, run.model.grid, icp, cfg.seed);
        run.state = init_state(run.model, sc, phi0);
    }
    return run;
}

RunArtifacts run_config(const RunConfig& cfg, bool write_outputs) {
    PreparedRun run = prepare_run(cfg);
    RunArtifacts art;
    const long n_total = total_steps(cfg);
    const bool ns = cfg.model == ModelKind::navier_stokes;

    std::vector<double> pending = cfg.snapshot_times;
    std::sort(pending.begin(), pending.end());
    auto snap = [&](const SchemeState& st, double t_label) {
        if (!write_outputs) return;
        std::string base = cfg.out_dir + "/";
        if (ns) {
            std::string up = base + "u_t" + fmt_time(t_label) + ".savf1";
            write_snapshot(up, "u", st.u(), st.time);
            art.snapshot_paths.push_back(up);
            if (!st.pressure.data.empty()) {
                std::string pp = base + "p_t" + fmt_time(t_label) + ".savf1";
                write_snapshot(pp, "p", st.pressure, st.time);
                art.snapshot_paths.push_back(pp);
            }
        } else {
            std::string fp = base + "phi_t" + fmt_time(t_label) + ".savf1";
            write_snapshot(fp, "phi", st.phi(), st.time);
            art.snapshot_paths.push_back(fp);
        }
    };

    art.records.push_back(initial_record(run.state, run.model));
    while (!pending.empty() && pending.front() < run.state.time + 0.5 * cfg.dt) {
        snap(run.state, pending.front());
        pending.erase(pending.begin());
    }

    const long remaining = n_total - run.state.step_index;
    advance(run.state, run.model, remaining,
            [&](const SchemeState& before, const SchemeState& after) {
                art.records.push_back(audit_step(before, after, run.model));
                if (after.diag.disc_fallback) ++art.disc_fallbacks;
                while (!pending.empty() &&
                       std::abs(after.time - pending.front()) <= 0.5 * cfg.dt) {
                    snap(after, pending.front());
                    pending.erase(pending.begin());
                }
            });

    if (write_outputs) {
        write_text_file(cfg.out_dir + "/effective_config.ini", serialize_config(cfg));
        art.csv_path = cfg.out_dir + "/" + cfg.csv;
        write_energy_csv(art.records, art.csv_path);
        if (cfg.plot_scripts) {
            emit_energy_plot(cfg.out_dir + "/plot_energy.py", {cfg.csv},
                             "energy.png");
            if (!art.snapshot_paths.empty()) {
                std::vector<std::string> names;
                for (const auto& p : art.snapshot_paths)
                    names.push_back(p.substr(cfg.out_dir.size() + 1));
                emit_field_plot(cfg.out_dir + "/plot_fields.py", names);
            }
        }
    }
    return art;
}

OrderEstimate run_convergence(const RunConfig& cfg, const std::vector<double>& ladder,
                              ConvergenceReference ref, int self_refine,
                              bool write_outputs) {
    if (ladder.empty()) throw ConfigError("convergence: empty dt ladder");
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (!(ladder[i] > 0.0)) throw ConfigError("convergence: dt must be positive");
        if (i && !(ladder[i] < ladder[i - 1]))
            throw ConfigError("convergence: ladder must be strictly decreasing");
    }
    if (ref == ConvergenceReference::manufactured &&
        resolved_forcing(cfg) != ForcingKind::manufactured)
        throw ConfigError("convergence: manufactured reference needs manufactured forcing");
    if (self_refine < 2) throw ConfigError("convergence: self_refine must be >= 2");

    const bool ns = cfg.model == ModelKind::navier_stokes;
    const double t_end = cfg.t0 + cfg.T;

    auto run_at = [&](double dt) {
        RunConfig rc = cfg;
        rc.dt = dt;
        PreparedRun run = prepare_run(rc);
        advance(run.state, run.model, total_steps(rc) - run.state.step_index);
        return run;
    };

    ScalarField ref_phi;
    VectorField ref_u;
    if (ref == ConvergenceReference::fine_dt_self_reference) {
        PreparedRun fine = run_at(ladder.back() / self_refine);
        if (ns) ref_u = fine.state.u();
        else ref_phi = fine.state.phi();
    }

    OrderEstimate est;
    est.dt = ladder;
    est.error.assign(ladder.size(), 0.0);
    parallel_for(ladder.size(), [&](std::size_t i) {
        PreparedRun run = run_at(ladder[i]);
        if (ns) {
            VectorField diff = sub(run.state.u(),
                                   ref == ConvergenceReference::manufactured
                                       ? exact_velocity(run.model.grid, t_end)
                                       : ref_u);
            est.error[i] = norm_l2(diff);
        } else {
            ScalarField diff = sub(run.state.phi(),
                                   ref == ConvergenceReference::manufactured
                                       ? exact_scalar(run.model.grid, t_end)
                                       : ref_phi);
            est.error[i] = norm_l2(diff);
        }
    });

    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (!(est.error[i] > 0.0))
            throw NumericError("convergence: nonpositive error on rung " +
                               std::to_string(i));
        lx.push_back(std::log(ladder[i]));
        ly.push_back(std::log(est.error[i]));
    }
    for (std::size_t i = 1; i < ladder.size(); ++i)
        est.pairwise.push_back((ly[i - 1] - ly[i]) / (lx[i - 1] - lx[i]));
    est.fitted = least_squares_slope(lx, ly);

    if (write_outputs) {
        std::string base = "convergence_" + to_string(cfg.scheme) + ".csv";
        write_convergence_csv(est.dt, est.error, est.pairwise,
                              cfg.out_dir + "/" + base);
        if (cfg.plot_scripts)
            emit_convergence_plot(cfg.out_dir + "/plot_convergence.py", {base});
    }
    return est;
}

std::vector<std::string> scenario_names() {
    return {"ac_caseA", "ac_caseB", "ch_caseA", "ch_caseB",
            "pfc_2d",   "pfc_3d",   "ns_caseA", "ns_shear"};
}

RunConfig scenario_config(const std::string& name) {
    RunConfig c; // AC Case A manufactured run is the baseline
    c.out_dir = "out_" + name;
    if (name == "ac_caseA") {
        c.model = ModelKind::allen_cahn;
        c.params.M = 1.0;
        c.params.alpha0 = 1e-4;
        c.ic = IcTag::manufactured;
        c.modes = {64, 64};
        c.extents = {2.0, 2.0};
        c.scheme = SchemeKind::eop_gsav;
        c.k = 2;
        c.dt = 1e-2;
        c.T = 0.5;
    } else if (name == "ac_caseB") {
        c.model = ModelKind::allen_cahn;
        c.params.M = 1.0;
        c.params.alpha0 = 1e-4;
        c.ic = IcTag::star;
        c.ic_params.alpha = 1e-4;
        c.modes = {128, 128};
        c.extents = {1.0, 1.0};
        c.scheme = SchemeKind::eop_gsav;
        c.k = 2;
        c.dt = 1e-3;
        c.T = 200.0;
        c.snapshot_times = {10.0, 50.0, 100.0, 200.0};
    } else if (name == "ch_caseA") {
        c.model = ModelKind::cahn_hilliard;
        c.params.M = 0.005;
        c.params.alpha0 = 0.04;
        c.params.eps = 1.0;
        c.ic = IcTag::manufactured;
        c.modes = {64, 64};
        c.extents = {2.0, 2.0};
        c.scheme = SchemeKind::eop_gsav;
        c.k = 2;
        c.dt = 1e-2;
        c.T = 0.5;
    } else if (name == "ch_caseB") {
        c.model = ModelKind::cahn_hilliard;
        c.params.M = 1e-6;
        c.params.alpha0 = 1.0;
        c.params.eps = 0.01;
        c.ic = IcTag::circle_array;
        c.modes = {256, 256}; // desk scale; reference setup uses 512^2
        c.extents = {2.0, 2.0};
        c.scheme = SchemeKind::eop_gsav;
        c.k = 2;
        c.dt = 1e-3;
        c.T = 10.0;
        c.snapshot_times = {1.0, 5.0, 10.0};
    } else if (name == "pfc_2d") {
        c.model = ModelKind::pfc;
        c.params.M = 1.0;
        c.params.beta = 1.0;
        c.params.eps = 0.25;
        c.ic = IcTag::crystallites;
        c.modes = {256, 256}; // desk scale; reference setup uses 1024^2
        c.extents = {800.0, 800.0};
        c.scheme = SchemeKind::eop_gsav;
        c.k = 2;
        c.dt = 0.02;
        c.T = 300.0; // desk scale; reference horizon is 2000
        c.snapshot_times = {0.0, 100.0, 200.0, 300.0};
    } else if (name == "pfc_3d") {
        c.model = ModelKind::pfc;
        c.params.M = 1.0;
        c.params.beta = 1.0;
        c.params.eps = 0.56;
        c.ic = IcTag::uniform_random;
        c.ic_params.phi_bar = 0.35;
        c.ic_params.amp = 0.01;
        c.seed = 1;
        c.dim = 3;
        c.modes = {48, 48, 48}; // desk scale; reference setup uses 64^3
        c.extents = {50.0, 50.0, 50.0};
        c.scheme = SchemeKind::eop_gsav;
        c.k = 2;
        c.dt = 0.1;
        c.T = 500.0; // desk scale; reference horizon is 3000
        c.snapshot_times = {250.0, 500.0};
    } else if (name == "ns_caseA") {
        c.model = ModelKind::navier_stokes;
        c.params.nu = 1.0;
        c.ic = IcTag::manufactured;
        c.modes = {40, 40};
        c.extents = {2.0, 2.0};
        c.scheme = SchemeKind::ns_eop_gsav;
        c.k = 2;
        c.t0 = 2.0;
        c.dt = 1e-2;
        c.T = 1.0;
    } else if (name == "ns_shear") {
        c.model = ModelKind::navier_stokes;
        c.params.nu = 1e-4;
        c.ic = IcTag::shear_layer;
        c.ic_params.rho = 30.0;
        c.ic_params.perturb = 0.05;
        c.modes = {128, 128};
        c.extents = {1.0, 1.0};
        c.scheme = SchemeKind::ns_eop_gsav;
        c.k = 2;
        c.dt = 6e-4;
        c.T = 1.2;
        c.snapshot_times = {0.8, 1.0, 1.2};
    } else {
        throw ConfigError("unknown scenario '" + name + "'");
    }
    validate_config(c);
    return c;
}

} // namespace savflow
