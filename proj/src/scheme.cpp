#include "savflow/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "savflow/spectral.hpp"

namespace savflow {

bool is_ns_scheme(SchemeKind k) { return k == SchemeKind::ns_eop_gsav; }

bool is_cn_scheme(SchemeKind k) {
    return k == SchemeKind::rsav_cn || k == SchemeKind::eop_sav_cn;
}

int scheme_order(const SchemeConfig& cfg) {
    return is_cn_scheme(cfg.kind) ? 2 : cfg.k;
}

namespace {

bool is_sqrt_family(SchemeKind k) {
    return k == SchemeKind::sav_bdf || is_cn_scheme(k);
}

struct StepResult {
    ScalarField phi;
    VectorField u;
    ScalarField pressure;
    double r = 0.0;
    double r2 = 0.0;
    StepDiagnostics diag;
};

// R^{n+1} = A_k(R^n)/alpha + ... needs the weighted R history.
double weighted_r(const std::vector<double>& w, const std::deque<double>& r_hist) {
    double s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * r_hist[j];
    return s;
}

VectorField vlincomb(const std::vector<double>& w, const std::deque<VectorField>& hist) {
    VectorField r(hist[0].grid(), hist[0].components());
    for (std::size_t j = 0; j < w.size(); ++j) add_scaled(r, w[j], hist[j]);
    return r;
}

// SAV/IMEX-BDFk: phi and R coupled through b = F'(phi_hat)/sqrt(E1(phi_hat)+C);
// superposition phi^{n+1} = phi_a + R^{n+1} phi_b with the scalar closure
// R [alpha (1 - (b,phi_b)/2)] = A_k(R^n) + (b, alpha phi_a - A_k(phi^n))/2.
// The closure denominator is >= alpha because (b, phi_b) <= 0.
StepResult sav_bdf_step(const SchemeState& s, const Model& m, const BdfTable& tb,
                        double dt) {
    ScalarField hat = lincomb(tb.hat, s.hist);
    ScalarField Ak = lincomb(tb.A, s.hist);
    double AkR = weighted_r(tb.A, s.r_hist);

    double e1h = nonlinear_energy(m, hat) + m.C;
    if (!(e1h > 0.0)) throw NumericError("sav step: E1(phi_hat) + C is not positive");
    double beta = std::sqrt(e1h);
    ScalarField b = fprime(m, hat);
    for (double& v : b.data) v /= beta;

    ScalarField Gb = apply_op(m.G, b);
    ScalarField rhs = Ak;
    ScalarField fnew;
    const bool forced = m.forcing == ForcingKind::manufactured;
    if (forced) {
        fnew = manufactured_forcing_scalar(m, s.time + dt);
        add_scaled(rhs, dt, fnew);
    }
    ScalarField phi_a = solve_shifted(tb.alpha, dt, m.G, m.L, rhs);
    ScalarField phi_b = solve_shifted(tb.alpha, dt, m.G, m.L, scaled(Gb, -dt));

    double denom = tb.alpha * (1.0 - 0.5 * inner_product(b, phi_b));
    if (std::abs(denom) < 1e-14)
        throw NumericError("sav step: singular scalar closure");
    ScalarField tmp = scaled(phi_a, tb.alpha);
    add_scaled(tmp, -1.0, Ak);
    double rnew = (AkR + 0.5 * inner_product(b, tmp)) / denom;

    StepResult out;
    out.phi = std::move(phi_a);
    add_scaled(out.phi, rnew, phi_b);
    out.r = rnew;
    out.r2 = rnew * rnew;

    ScalarField mu = apply_op(m.L, out.phi);
    add_scaled(mu, rnew, b);
    out.diag.r_prev = s.r;
    out.diag.r_tilde = rnew;
    out.diag.dissipation = inner_product(apply_op(m.G, mu), mu);
    out.diag.forcing_work = forced ? inner_product(fnew, mu) : 0.0;
    return out;
}

// Crank-Nicolson step I shared by rsav_cn and eop_sav_cn, then the respective
// step II. The discrete identity
//   1/2 (L phi^{n+1}, phi^{n+1}) + R~^2 - 1/2 (L phi^n, phi^n) - (R^n)^2
//     = -dt (G mu_h, mu_h) + dt (f_h, mu_h)
// holds exactly; its fp residual is recorded for auditing.
StepResult cn_step(const SchemeState& s, const Model& m, double dt) {
    const ScalarField& phi0 = s.hist[0];
    const bool have2 = s.hist.size() >= 2;
    ScalarField hat = have2 ? lincomb({1.5, -0.5}, s.hist) : phi0;

    double e1h;
    if (s.cfg.sav_denominator == SavDenominator::bdf && have2)
        e1h = nonlinear_energy(m, lincomb({2.0, -1.0}, s.hist)) + m.C;
    else
        e1h = nonlinear_energy(m, hat) + m.C;
    if (!(e1h > 0.0)) throw NumericError("cn step: E1(phi_hat) + C is not positive");
    double beta = std::sqrt(e1h);
    ScalarField b = fprime(m, hat);
    for (double& v : b.data) v /= beta;

    DiagonalOperator GL = m.G * m.L;
    ScalarField Gb = apply_op(m.G, b);
    ScalarField rhs = phi0;
    add_scaled(rhs, -0.5 * dt, apply_op(GL, phi0));
    add_scaled(rhs, -0.5 * dt * s.r, Gb);
    ScalarField fhalf;
    const bool forced = m.forcing == ForcingKind::manufactured;
    if (forced) {
        fhalf = manufactured_forcing_scalar(m, s.time + 0.5 * dt);
        add_scaled(rhs, dt, fhalf);
    }
    ScalarField phi_a = solve_shifted(1.0, 0.5 * dt, m.G, m.L, rhs);
    ScalarField phi_b = solve_shifted(1.0, 0.5 * dt, m.G, m.L, scaled(Gb, -0.5 * dt));

    double denom = 1.0 - 0.5 * inner_product(b, phi_b);
    if (std::abs(denom) < 1e-14)
        throw NumericError("cn step: singular scalar closure");
    double r_tilde = (s.r + 0.5 * inner_product(b, sub(phi_a, phi0))) / denom;

    StepResult out;
    out.phi = std::move(phi_a);
    add_scaled(out.phi, r_tilde, phi_b);

    ScalarField mu = scaled(apply_op(m.L, add(out.phi, phi0)), 0.5);
    add_scaled(mu, 0.5 * (r_tilde + s.r), b);
    double diss = inner_product(apply_op(m.G, mu), mu);
    double fw = forced ? inner_product(fhalf, mu) : 0.0;

    double lq1 = 0.5 * inner_product(apply_op(m.L, out.phi), out.phi);
    double lq0 = 0.5 * inner_product(apply_op(m.L, phi0), phi0);
    out.diag.r_prev = s.r;
    out.diag.r_tilde = r_tilde;
    out.diag.dissipation = diss;
    out.diag.forcing_work = fw;
    out.diag.identity_residual =
        (lq1 + r_tilde * r_tilde) - (lq0 + s.r2) + dt * diss - dt * fw;

    double e1_next = nonlinear_energy(m, out.phi) + m.C;
    out.diag.e1_next = e1_next;

    if (s.cfg.kind == SchemeKind::eop_sav_cn) {
        // (s^{n+1})^2 = 1/2 (L phi^n, phi^n) - 1/2 (L phi^{n+1}, phi^{n+1}) + (R^n)^2
        // equals R~^2 + dt (G mu, mu) - dt (f, mu); a value below -1e-12 means
        // the step-I identity was violated upstream.
        double s2 = lq0 - lq1 + s.r2;
        if (s2 < 0.0) {
            if (s2 >= -1e-12) s2 = 0.0;
            else throw NumericError("eop step: negative energy radicand");
        }
        out.diag.s2 = s2;
        if (e1_next <= s2) {
            out.r2 = e1_next; // original energy restored
            out.diag.branch_original = true;
        } else {
            out.r2 = s2;
        }
        out.r = std::sqrt(out.r2);
    } else {
        // Relaxation R <- lam R~ + (1-lam) r with the smallest lam in [0,1]
        // keeping the dissipation surplus: a lam^2 + b lam + c <= 0,
        //   a = (R~-r)^2, b = 2(R~-r) r, c = r^2 - R~^2 - dt eta (G mu, mu).
        // lam = 1 is always feasible (a+b+c = -dt eta (G mu, mu) <= 0).
        if (!(e1_next > 0.0))
            throw NumericError("rsav step: E1(phi^{n+1}) + C is not positive");
        double rcap = std::sqrt(e1_next);
        double aq = (r_tilde - rcap) * (r_tilde - rcap);
        double bq = 2.0 * (r_tilde - rcap) * rcap;
        double cq = e1_next - r_tilde * r_tilde - dt * s.cfg.eta * diss;
        double lam;
        if (aq <= 1e-14) {
            lam = 0.0;
        } else {
            double disc = bq * bq - 4.0 * aq * cq;
            if (disc < 0.0) { // fp-only: disc = 4 (R~-r)^2 (R~^2 + dt eta d) >= 0 exactly
                lam = 1.0;
                out.diag.disc_fallback = true;
            } else {
                lam = std::clamp((-bq - std::sqrt(disc)) / (2.0 * aq), 0.0, 1.0);
            }
        }
        out.diag.lambda0 = lam;
        out.r = lam * r_tilde + (1.0 - lam) * rcap;
        out.r2 = out.r * out.r;
    }
    return out;
}

// GSAV/BDFk: linear solve for phi_bar with the explicit nonlinearity, closed
// form R~ = R^n / (1 + dt (D - W)/E(phi_bar)), then phi^{n+1} = eta_p phi_bar
// with eta_p = 1 - (1 - xi)^p, p = k+1 (xi = R~/E(phi_bar)). eop_gsav adds
// R^{n+1} = min(R^n, E(phi^{n+1}) + C0).
StepResult gsav_step(const SchemeState& s, const Model& m, const BdfTable& tb,
                     double dt) {
    ScalarField hat = lincomb(tb.hat, s.hist);
    ScalarField Ak = lincomb(tb.A, s.hist);
    ScalarField fp = fprime(m, hat);

    ScalarField rhs = Ak;
    add_scaled(rhs, -dt, apply_op(m.G, fp));
    ScalarField fnew;
    const bool forced = m.forcing == ForcingKind::manufactured;
    if (forced) {
        fnew = manufactured_forcing_scalar(m, s.time + dt);
        add_scaled(rhs, dt, fnew);
    }
    ScalarField phi_bar = solve_shifted(tb.alpha, dt, m.G, m.L, rhs);

    ScalarField mu = apply_op(m.L, phi_bar);
    add_scaled(mu, 1.0, fp);
    double diss = inner_product(apply_op(m.G, mu), mu);
    double fw = forced ? inner_product(fnew, mu) : 0.0;

    double ebar = total_energy(m, phi_bar) + m.C0;
    if (!(ebar > 0.0))
        throw NumericError("gsav step: E(phi_bar) + C0 is not positive");
    double denom = 1.0 + dt * (diss - fw) / ebar;
    if (!(denom > 0.0))
        throw NumericError("gsav step: R update denominator is not positive");
    double r_tilde = s.r / denom;
    double xi = r_tilde / ebar;
    int p = s.cfg.exponent_override > 0 ? s.cfg.exponent_override : tb.k + 1;
    double factor = 1.0 - std::pow(1.0 - xi, p);

    StepResult out;
    out.phi = scaled(phi_bar, factor);
    out.diag.r_prev = s.r;
    out.diag.r_tilde = r_tilde;
    out.diag.xi = xi;
    out.diag.dissipation = diss;
    out.diag.forcing_work = fw;
    out.diag.identity_residual = r_tilde - s.r + dt * xi * (diss - fw);

    if (s.cfg.kind == SchemeKind::eop_gsav) {
        double e_next = total_energy(m, out.phi) + m.C0;
        out.diag.e_next = e_next;
        if (e_next <= s.r) {
            out.r = e_next;
            out.diag.branch_original = true;
        } else {
            out.r = s.r;
        }
    } else {
        out.r = r_tilde;
    }
    out.r2 = out.r * out.r;
    return out;
}

// Navier-Stokes member of the EOP-GSAV family. The advective term enters
// Leray-projected, so the velocity solve decouples componentwise into
// (alpha I - dt nu lap) u_bar = A_k(u) - dt P(B.grad B) + dt P f and u_bar
// stays divergence-free mode-by-mode. The velocity scaling exponent is k.
// Pressure is recovered afterwards from lap p = -div(u.grad u), zero-mean.
StepResult ns_step(const SchemeState& s, const Model& m, const BdfTable& tb,
                   double dt) {
    const PeriodicGrid& g = m.grid;
    const int nc = s.vhist[0].components();
    VectorField uh = vlincomb(tb.hat, s.vhist);
    VectorField Ak = vlincomb(tb.A, s.vhist);

    auto advection = [&](const VectorField& u) {
        VectorField adv(g, nc);
        for (int i = 0; i < nc; ++i) {
            for (int j = 0; j < nc; ++j) {
                ScalarField du = partial(u.comp[i], j);
                for (std::size_t idx = 0; idx < du.size(); ++idx)
                    adv.comp[i][idx] += u.comp[j][idx] * du[idx];
            }
            adv.comp[i] = dealias(adv.comp[i], m.dealias_rule);
        }
        return adv;
    };

    VectorField rhs = Ak;
    add_scaled(rhs, -dt, leray_project(advection(uh)));
    VectorField fnew;
    const bool forced = m.forcing == ForcingKind::manufactured;
    if (forced) {
        fnew = manufactured_forcing_velocity(m, s.time + dt);
        add_scaled(rhs, dt, leray_project(fnew));
    }
    VectorField ubar(g, nc);
    for (int c = 0; c < nc; ++c)
        ubar.comp[c] = solve_shifted(tb.alpha, dt, m.G, m.L, rhs.comp[c]);

    double diss = 0.0; // nu ||grad u_bar||^2 = sum_c (u_bar_c, -nu lap u_bar_c)
    for (int c = 0; c < nc; ++c)
        diss += inner_product(apply_op(m.L, ubar.comp[c]), ubar.comp[c]);
    double fw = forced ? inner_product(fnew, ubar) : 0.0;

    double ebar = total_energy(m, ubar) + m.C0;
    if (!(ebar > 0.0))
        throw NumericError("ns step: E(u_bar) + C0 is not positive");
    double denom = 1.0 + dt * (diss - fw) / ebar;
    if (!(denom > 0.0))
        throw NumericError("ns step: R update denominator is not positive");
    double r_tilde = s.r / denom;
    double xi = r_tilde / ebar;
    int p = s.cfg.exponent_override > 0 ? s.cfg.exponent_override : tb.k;
    double factor = 1.0 - std::pow(1.0 - xi, p);

    StepResult out;
    out.u = scaled(ubar, factor);
    out.diag.r_prev = s.r;
    out.diag.r_tilde = r_tilde;
    out.diag.xi = xi;
    out.diag.dissipation = diss;
    out.diag.forcing_work = fw;
    out.diag.identity_residual = r_tilde - s.r + dt * xi * (diss - fw);

    double e_next = total_energy(m, out.u) + m.C0;
    out.diag.e_next = e_next;
    if (e_next <= s.r) {
        out.r = e_next;
        out.diag.branch_original = true;
    } else {
        out.r = s.r;
    }
    out.r2 = out.r * out.r;

    out.pressure = solve_poisson_zero_mean(scaled(divergence(advection(out.u)), -1.0));
    return out;
}

StepResult dispatch_step(const SchemeState& s, const Model& m, const BdfTable& tb,
                         double dt) {
    switch (s.cfg.kind) {
    case SchemeKind::sav_bdf: return sav_bdf_step(s, m, tb, dt);
    case SchemeKind::rsav_cn:
    case SchemeKind::eop_sav_cn: return cn_step(s, m, dt);
    case SchemeKind::gsav_bdf:
    case SchemeKind::eop_gsav: return gsav_step(s, m, tb, dt);
    case SchemeKind::ns_eop_gsav: return ns_step(s, m, tb, dt);
    }
    throw ConfigError("unknown scheme kind");
}

std::size_t history_cap(const SchemeConfig& cfg) {
    return std::max<std::size_t>(static_cast<std::size_t>(cfg.k), 2);
}

void commit(SchemeState& s, StepResult&& res, double dt) {
    const std::size_t cap = history_cap(s.cfg);
    if (is_ns_scheme(s.cfg.kind)) {
        s.vhist.push_front(std::move(res.u));
        while (s.vhist.size() > cap) s.vhist.pop_back();
        s.pressure = std::move(res.pressure);
    } else {
        s.hist.push_front(std::move(res.phi));
        while (s.hist.size() > cap) s.hist.pop_back();
    }
    s.r_hist.push_front(res.r);
    while (s.r_hist.size() > cap) s.r_hist.pop_back();
    s.r = res.r;
    s.r2 = res.r2;
    s.diag = res.diag;
    s.step_index += 1;
    s.time += dt;
}

// One dt-sized startup slot via the order-1 member of the same family,
// optionally refined into 2^j substeps. Only the final substep field enters
// the history; R carries through all substeps.
void startup_slot(SchemeState& s, const Model& m) {
    const int nsub = 1 << std::max(0, s.cfg.startup_substeps);
    const double h = s.cfg.dt / nsub;
    const BdfTable t1 = bdf_table(1);
    SchemeState tmp = s;
    for (int i = 0; i < nsub; ++i)
        commit(tmp, dispatch_step(tmp, m, t1, h), h);
    if (is_ns_scheme(s.cfg.kind)) {
        s.vhist.push_front(tmp.vhist.front());
        while (s.vhist.size() > history_cap(s.cfg)) s.vhist.pop_back();
        s.pressure = std::move(tmp.pressure);
    } else {
        s.hist.push_front(tmp.hist.front());
        while (s.hist.size() > history_cap(s.cfg)) s.hist.pop_back();
    }
    s.r_hist.push_front(tmp.r);
    while (s.r_hist.size() > history_cap(s.cfg)) s.r_hist.pop_back();
    s.r = tmp.r;
    s.r2 = tmp.r2;
    s.diag = tmp.diag;
    s.step_index += 1;
    s.time = s.cfg.t0 + static_cast<double>(s.step_index) * s.cfg.dt;
}

void validate_scheme(const Model& m, const SchemeConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw ConfigError("scheme: dt must be positive");
    if (is_ns_scheme(cfg.kind) != (m.kind == ModelKind::navier_stokes))
        throw ConfigError("scheme/model mismatch: ns_eop_gsav pairs with navier_stokes only");
    if (cfg.kind == SchemeKind::sav_bdf && (cfg.k < 1 || cfg.k > 2))
        throw ConfigError("sav_bdf: k must be 1 or 2");
    if (is_cn_scheme(cfg.kind) && cfg.k != 2)
        throw ConfigError("cn schemes are fixed at order 2 (set k = 2)");
    if (cfg.k < 1 || cfg.k > 4) throw ConfigError("scheme: k out of range 1..4");
    if (!(cfg.eta > 0.0) || cfg.eta > 1.0)
        throw ConfigError("scheme: eta must lie in (0, 1]");
    if (cfg.startup_substeps < 0 || cfg.startup_substeps > 16)
        throw ConfigError("scheme: startup_substeps out of range 0..16");
    if (cfg.startup == StartupMethod::exact_history &&
        m.forcing != ForcingKind::manufactured)
        throw ConfigError("exact_history startup needs the manufactured solution");
}

} // namespace

SchemeState init_state(Model& m, const SchemeConfig& cfg, const ScalarField& phi0) {
    validate_scheme(m, cfg);
    if (is_ns_scheme(cfg.kind))
        throw ConfigError("ns_eop_gsav needs a velocity initial condition");
    SchemeState s;
    s.cfg = cfg;
    s.time = cfg.t0;

    double e0 = total_energy(m, phi0);
    if (m.C0_auto) {
        m.C0 = std::max(0.0, 1.0 - e0);
        m.C0_auto = false;
    }
    s.hist.push_front(phi0);
    if (is_sqrt_family(cfg.kind)) {
        double e1 = nonlinear_energy(m, phi0) + m.C;
        if (!(e1 > 0.0)) throw ConfigError("E1(phi0) + C must be positive");
        s.r2 = e1;
        s.r = std::sqrt(e1);
    } else {
        double r0 = e0 + m.C0;
        if (!(r0 > 0.0)) throw ConfigError("E(phi0) + C0 must be positive");
        s.r = r0;
        s.r2 = r0 * r0;
    }
    s.r_hist.push_front(s.r);

    const std::size_t need = is_cn_scheme(cfg.kind) ? 2 : static_cast<std::size_t>(cfg.k);
    if (cfg.startup == StartupMethod::exact_history && need > 1) {
        for (std::size_t j = 1; j < need; ++j) {
            ScalarField phij = exact_scalar(m.grid, cfg.t0 + static_cast<double>(j) * cfg.dt);
            double rj;
            if (is_sqrt_family(cfg.kind)) {
                s.r2 = nonlinear_energy(m, phij) + m.C;
                if (!(s.r2 > 0.0)) throw ConfigError("E1 + C must be positive along the seeded history");
                rj = std::sqrt(s.r2);
            } else {
                rj = total_energy(m, phij) + m.C0;
                s.r2 = rj * rj;
            }
            s.hist.push_front(std::move(phij));
            s.r_hist.push_front(rj);
            s.r = rj;
        }
        while (s.hist.size() > history_cap(cfg)) s.hist.pop_back();
        while (s.r_hist.size() > history_cap(cfg)) s.r_hist.pop_back();
        s.step_index = static_cast<long>(need) - 1;
        s.time = cfg.t0 + static_cast<double>(s.step_index) * cfg.dt;
    }
    return s;
}

SchemeState init_state(Model& m, const SchemeConfig& cfg, const VectorField& u0) {
    validate_scheme(m, cfg);
    if (!is_ns_scheme(cfg.kind))
        throw ConfigError("scalar schemes need a scalar initial condition");
    SchemeState s;
    s.cfg = cfg;
    s.time = cfg.t0;

    double e0 = total_energy(m, u0);
    if (m.C0_auto) {
        m.C0 = std::max(0.0, 1.0 - e0);
        m.C0_auto = false;
    }
    s.vhist.push_front(u0);
    double r0 = e0 + m.C0;
    if (!(r0 > 0.0)) throw ConfigError("E(u0) + C0 must be positive");
    s.r = r0;
    s.r2 = r0 * r0;
    s.r_hist.push_front(s.r);

    const std::size_t need = static_cast<std::size_t>(cfg.k);
    if (cfg.startup == StartupMethod::exact_history && need > 1) {
        for (std::size_t j = 1; j < need; ++j) {
            VectorField uj = exact_velocity(m.grid, cfg.t0 + static_cast<double>(j) * cfg.dt);
            double rj = total_energy(m, uj) + m.C0;
            s.vhist.push_front(std::move(uj));
            s.r_hist.push_front(rj);
            s.r = rj;
            s.r2 = rj * rj;
        }
        while (s.vhist.size() > history_cap(cfg)) s.vhist.pop_back();
        while (s.r_hist.size() > history_cap(cfg)) s.r_hist.pop_back();
        s.step_index = static_cast<long>(need) - 1;
        s.time = cfg.t0 + static_cast<double>(s.step_index) * cfg.dt;
    }
    return s;
}

void step(SchemeState& s, const Model& m) {
    const std::size_t have = is_ns_scheme(s.cfg.kind) ? s.vhist.size() : s.hist.size();
    const std::size_t need = is_cn_scheme(s.cfg.kind)
                                 ? 1
                                 : static_cast<std::size_t>(s.cfg.k);
    if (have < need) {
        startup_slot(s, m);
        return;
    }
    const int k_eff = is_cn_scheme(s.cfg.kind) ? 1 : s.cfg.k;
    commit(s, dispatch_step(s, m, bdf_table(k_eff), s.cfg.dt), s.cfg.dt);
    s.time = s.cfg.t0 + static_cast<double>(s.step_index) * s.cfg.dt;
}

void advance(SchemeState& s, const Model& m, long n_steps, const StepObserver& obs) {
    for (long i = 0; i < n_steps; ++i) {
        if (obs) {
            SchemeState before = s;
            step(s, m);
            obs(before, s);
        } else {
            step(s, m);
        }
    }
}

} // namespace savflow
