#pragma once
// Auxiliary-variable time integrators for L2/H^-1 gradient flows and
// incompressible Navier-Stokes.
//
// Families:
//   sav_bdf     IMEX-BDF1/2 with R ~ sqrt(E1 + C); phi and R solved jointly
//               by superposition (phi = phi_a + R phi_b, scalar closure).
//   rsav_cn     Crank-Nicolson step I plus relaxation R <- lam R~ + (1-lam) r
//               with the smallest feasible lam in [0,1].
//   eop_sav_cn  Same step I; R^2 <- min(s^2, E1 + C) restores the original
//               energy whenever it is admissible.
//   gsav_bdf    BDFk (k=1..4) with R ~ E_total + C0; explicit nonlinearity,
//               scalar relaxation xi = R~ / E(phi_bar), phi scaled by
//               1 - (1-xi)^{k+1}.
//   eop_gsav    gsav_bdf plus R <- min(R^n, E(phi^{n+1}) + C0).
//   ns_eop_gsav Velocity form of eop_gsav: Leray-projected advection,
//               componentwise Helmholtz solves, phi scaled by 1 - (1-xi)^k,
//               pressure recovered from a zero-mean Poisson solve.
//
// History vectors are newest-first: hist[0] is the current field. Startup for
// k >= 2 either seeds the history from the manufactured solution
// (exact_history) or runs the order-1 member of the same family, optionally
// with dt/2^j substeps (cold_bdf1_substeps). The CN schemes degrade their
// extrapolation to phi_hat = phi^n on the first step and need no startup.

#include <deque>
#include <functional>

#include "savflow/bdf.hpp"
#include "savflow/model.hpp"

namespace savflow {

enum class SchemeKind { sav_bdf, rsav_cn, eop_sav_cn, gsav_bdf, eop_gsav, ns_eop_gsav };
enum class StartupMethod { cold_bdf1_substeps, exact_history };
// Argument of the sqrt(E1 + C) denominator in the CN nonlinear direction:
// the half-step extrapolation 3/2 phi^n - 1/2 phi^{n-1} or 2 phi^n - phi^{n-1}.
enum class SavDenominator { extrapolated, bdf };

struct SchemeConfig {
    SchemeKind kind = SchemeKind::eop_gsav;
    int k = 2;                 // BDF order; CN schemes are order 2 regardless
    double dt = 1e-2;
    double t0 = 0.0;
    double eta = 0.95;         // RSAV dissipation fraction in (0, 1]
    int exponent_override = 0; // 0: default (k+1 for flows, k for NS)
    StartupMethod startup = StartupMethod::cold_bdf1_substeps;
    int startup_substeps = 0;  // j: 2^j substeps per startup slot
    SavDenominator sav_denominator = SavDenominator::extrapolated;
};

// Per-step scalars kept for auditing; meaning depends on the scheme.
struct StepDiagnostics {
    double lambda0 = 0.0;          // rsav_cn relaxation weight
    double s2 = 0.0;               // eop_sav_cn: (s^{n+1})^2
    double e1_next = 0.0;          // eop_sav_cn: E1(phi^{n+1}) + C
    double xi = 1.0;               // gsav family ratio R~ / E(phi_bar)
    double r_tilde = 0.0;          // pre-relaxation auxiliary value
    double e_next = 0.0;           // eop_gsav/ns: E(phi^{n+1}) + C0
    double r_prev = 0.0;           // R^n entering the step
    bool branch_original = false;  // EOP min rule picked the true energy
    bool disc_fallback = false;    // rsav_cn discriminant < 0 in fp, lam = 1
    double dissipation = 0.0;      // (G mu, mu) resp. nu ||grad u||^2
    double forcing_work = 0.0;     // (f, mu) resp. (f, u_bar)
    double identity_residual = 0.0; // CN energy identity / GSAV R-update residual
};

struct SchemeState {
    SchemeConfig cfg;
    std::deque<ScalarField> hist;  // newest first; empty for NS
    std::deque<VectorField> vhist; // newest first; NS only
    std::deque<double> r_hist;     // R^n, R^{n-1}, ...
    double r = 0.0;                // current auxiliary value R^n  (= r_hist[0])
    double r2 = 0.0;               // R^2 bookkeeping for the sqrt-family schemes
    long step_index = 0;
    double time = 0.0;
    StepDiagnostics diag;          // diagnostics of the latest computed step
    ScalarField pressure;          // ns_eop_gsav: latest recovered pressure

    const ScalarField& phi() const { return hist.front(); }
    const VectorField& u() const { return vhist.front(); }
};

bool is_ns_scheme(SchemeKind k);
bool is_cn_scheme(SchemeKind k);
// Formal order of accuracy (CN schemes: 2, BDF families: k).
int scheme_order(const SchemeConfig& cfg);

// Seed the state from an initial field. Resolves model.C0 when C0_auto and
// checks E1(phi0) + C > 0 for the sqrt family. With exact_history the full
// k-deep history is filled from the manufactured solution and time starts at
// t0 + (k-1) dt.
SchemeState init_state(Model& model, const SchemeConfig& cfg, const ScalarField& phi0);
SchemeState init_state(Model& model, const SchemeConfig& cfg, const VectorField& u0);

// Advance one dt (startup slots included). Throws NumericError on solver
// breakdown, nonpositive energy denominators, or an EOP radicand below -1e-12.
void step(SchemeState& state, const Model& model);

// before holds the state at t^n, after at t^{n+1}.
using StepObserver = std::function<void(const SchemeState& before, const SchemeState& after)>;
void advance(SchemeState& state, const Model& model, long n_steps,
             const StepObserver& obs = {});

} // namespace savflow
