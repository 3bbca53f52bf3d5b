#pragma once
// Concrete model instances: Allen-Cahn, Cahn-Hilliard, phase-field crystal,
// and incompressible Navier-Stokes. Each gradient flow is described by its
// quadratic-part operator L, mobility G, nonlinear density F/F', and the
// shift constants for the auxiliary-variable formulations. Also houses the
// initial conditions and the closed-form manufactured solutions/forcings.

#include <cstdint>
#include <optional>

#include "savflow/spectral.hpp"

namespace savflow {

enum class ModelKind { allen_cahn, cahn_hilliard, pfc, navier_stokes };

struct ModelParams {
    double M = 1.0;      // mobility
    double alpha0 = 1e-4; // AC/CH gradient coefficient
    double eps = 1.0;    // CH well scale / PFC undercooling
    double beta = 1.0;   // PFC operator shift
    double nu = 1.0;     // NS viscosity
};

enum class ForcingKind { none, manufactured };

struct Model {
    ModelKind kind = ModelKind::allen_cahn;
    PeriodicGrid grid;
    ModelParams p;
    DiagonalOperator L; // AC/CH: -alpha0*lap; PFC: (lap+beta)^2; NS: -nu*lap
    DiagonalOperator G; // AC: M*I; CH/PFC: -M*lap; NS: I
    double C = 1.0;     // shift so E1 + C > 0
    double C0 = 0.0;    // total-energy shift (resolved at init when auto)
    bool C0_auto = true;
    ForcingKind forcing = ForcingKind::none;
    DealiasRule dealias_rule = DealiasRule::none;
};

Model make_model(ModelKind kind, const PeriodicGrid& grid, const ModelParams& p,
                 std::optional<double> C = std::nullopt,
                 std::optional<double> C0 = std::nullopt);

// Pointwise double-well density and derivative for the scalar models.
double density_F(const Model& m, double v);
double density_Fprime(const Model& m, double v);

// F'(phi) evaluated pointwise, then filtered by the model's dealias rule.
ScalarField fprime(const Model& m, const ScalarField& phi);

double nonlinear_energy(const Model& m, const ScalarField& phi); // E1 = int F
double total_energy(const Model& m, const ScalarField& phi);     // 1/2(L phi,phi)+E1
double total_energy(const Model& m, const VectorField& u);       // 1/2 ||u||^2

double field_mean(const ScalarField& f);

// --- initial conditions -----------------------------------------------------

enum class IcTag { manufactured, star, circle_array, crystallites, shear_layer,
                   uniform_random };

struct IcParams {
    double t0 = 0.0;        // manufactured: start time
    double alpha = 1e-4;    // star: alpha in sqrt(2*alpha)
    double r0 = 0.085;      // circle_array: circle radius
    double eps = 0.01;      // circle_array: interface width scale
    double phi_bar = 0.285; // crystallites / uniform_random: mean density
    double c1 = 0.446;      // crystallites: amplitude
    double c2 = 0.66;       // crystallites: lattice wavenumber
    double rho = 30.0;      // shear_layer: layer width parameter
    double perturb = 0.05;  // shear_layer: perturbation size
    double amp = 0.01;      // uniform_random: noise amplitude
};

ScalarField make_initial_scalar(IcTag tag, const PeriodicGrid& grid,
                                const IcParams& p, std::uint64_t seed = 0);
VectorField make_initial_velocity(IcTag tag, const PeriodicGrid& grid,
                                  const IcParams& p);

// --- manufactured solutions (closed form) ------------------------------------
// Scalar models: phi(x,y,t) = exp(sin(pi x) sin(pi y)) sin(t).
// NS: u1 =  pi exp(sin(pi x)+sin(pi y)) cos(pi y) sin^2(t),
//     u2 = -pi exp(sin(pi x)+sin(pi y)) cos(pi x) sin^2(t),
//     p  =  exp(cos(pi x) sin(pi y)) sin^2(t).

ScalarField exact_scalar(const PeriodicGrid& grid, double t);
VectorField exact_velocity(const PeriodicGrid& grid, double t);
ScalarField exact_pressure(const PeriodicGrid& grid, double t);

// Forcing that makes the exact solution solve the model equations; all
// derivatives are hand-derived closed forms (no finite differences).
ScalarField manufactured_forcing_scalar(const Model& m, double t);
VectorField manufactured_forcing_velocity(const Model& m, double t);

} // namespace savflow
