#include "savflow/model.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace savflow {

Model make_model(ModelKind kind, const PeriodicGrid& grid, const ModelParams& p,
                 std::optional<double> C, std::optional<double> C0) {
    Model m;
    m.kind = kind;
    m.grid = grid;
    m.p = p;
    DiagonalOperator lap = laplacian_op(grid);
    DiagonalOperator id = identity_op(grid);
    switch (kind) {
    case ModelKind::allen_cahn:
        m.L = -p.alpha0 * lap;
        m.G = p.M * id;
        m.C = 1.0;
        break;
    case ModelKind::cahn_hilliard:
        m.L = -p.alpha0 * lap;
        m.G = -p.M * lap;
        m.C = 1.0;
        break;
    case ModelKind::pfc: {
        DiagonalOperator shifted = lap + p.beta * id;
        m.L = shifted * shifted;
        m.G = -p.M * lap;
        double volume = 1.0;
        for (int a = 0; a < grid.dim; ++a) volume *= grid.extent[a];
        m.C = (p.eps * p.eps / 4.0) * volume + 1.0; // F >= -eps^2/4 pointwise
        break;
    }
    case ModelKind::navier_stokes:
        m.L = -p.nu * lap; // per-component viscous operator; also nu||grad u||^2
        m.G = id;
        m.C = 1.0;
        break;
    }
    if (C) {
        if (*C < 0.0) throw ConfigError("model: C must be >= 0");
        m.C = *C;
    }
    if (C0) {
        if (*C0 < 0.0) throw ConfigError("model: C0 must be >= 0");
        m.C0 = *C0;
        m.C0_auto = false;
    }
    return m;
}

double density_F(const Model& m, double v) {
    switch (m.kind) {
    case ModelKind::allen_cahn: {
        double w = v * v - 1.0;
        return 0.25 * w * w;
    }
    case ModelKind::cahn_hilliard: {
        double w = v * v - 1.0;
        return 0.25 * w * w / (m.p.eps * m.p.eps);
    }
    case ModelKind::pfc:
        return 0.25 * v * v * v * v - 0.5 * m.p.eps * v * v;
    case ModelKind::navier_stokes:
        break;
    }
    throw ConfigError("density_F: not defined for this model kind");
}

double density_Fprime(const Model& m, double v) {
    switch (m.kind) {
    case ModelKind::allen_cahn:
        return v * v * v - v;
    case ModelKind::cahn_hilliard:
        return (v * v * v - v) / (m.p.eps * m.p.eps);
    case ModelKind::pfc:
        return v * v * v - m.p.eps * v;
    case ModelKind::navier_stokes:
        break;
    }
    throw ConfigError("density_Fprime: not defined for this model kind");
}

ScalarField fprime(const Model& m, const ScalarField& phi) {
    ScalarField r(phi.grid);
    for (std::size_t i = 0; i < phi.size(); ++i)
        r.data[i] = density_Fprime(m, phi.data[i]);
    return dealias(r, m.dealias_rule);
}

double nonlinear_energy(const Model& m, const ScalarField& phi) {
    double acc = 0.0;
    for (double v : phi.data) acc += density_F(m, v);
    return acc * phi.grid.cell_volume();
}

double total_energy(const Model& m, const ScalarField& phi) {
    return 0.5 * inner_product(phi, apply_op(m.L, phi)) +
           nonlinear_energy(m, phi);
}

double total_energy(const Model&, const VectorField& u) {
    return 0.5 * inner_product(u, u);
}

double field_mean(const ScalarField& f) {
    double acc = 0.0;
    for (double v : f.data) acc += v;
    return acc / static_cast<double>(f.size());
}

// --- initial conditions -----------------------------------------------------

namespace {

std::ostringstream fail(const char* tag) {
    std::ostringstream os;
    os << "make_initial(" << tag << "): ";
    return os;
}

} // namespace

ScalarField make_initial_scalar(IcTag tag, const PeriodicGrid& grid,
                                const IcParams& p, std::uint64_t seed) {
    switch (tag) {
    case IcTag::manufactured:
        return exact_scalar(grid, p.t0);
    case IcTag::star: {
        // tanh((1.5 + 1.2 cos(6 theta) - 2 pi r)/sqrt(2 alpha)) about the
        // domain center; theta, r the polar coordinates of (x,y).
        if (grid.dim != 2) throw ConfigError(fail("star").str() + "needs dim 2");
        ScalarField f(grid);
        const double cx = 0.5 * grid.extent[0], cy = 0.5 * grid.extent[1];
        const double w = std::sqrt(2.0 * p.alpha);
        std::size_t i = 0;
        for (int jx = 0; jx < grid.modes[0]; ++jx)
            for (int jy = 0; jy < grid.modes[1]; ++jy, ++i) {
                double dx = grid.coord(0, jx) - cx, dy = grid.coord(1, jy) - cy;
                double theta = std::atan2(dy, dx);
                double r = std::sqrt(dx * dx + dy * dy);
                f.data[i] =
                    std::tanh((1.5 + 1.2 * std::cos(6.0 * theta) - 2.0 * M_PI * r) / w);
            }
        return f;
    }
    case IcTag::circle_array: {
        // 80 - sum over a 9x9 lattice of tanh((|x - c_mn| - r0)/(sqrt(2) eps)),
        // centers (0.2 m, 0.2 n), m,n = 1..9.
        if (grid.dim != 2)
            throw ConfigError(fail("circle_array").str() + "needs dim 2");
        ScalarField f(grid);
        const double w = std::sqrt(2.0) * p.eps;
        std::size_t i = 0;
        for (int jx = 0; jx < grid.modes[0]; ++jx)
            for (int jy = 0; jy < grid.modes[1]; ++jy, ++i) {
                double x = grid.coord(0, jx), y = grid.coord(1, jy);
                double acc = 80.0;
                for (int mm = 1; mm <= 9; ++mm)
                    for (int nn = 1; nn <= 9; ++nn) {
                        double dx = x - 0.2 * mm, dy = y - 0.2 * nn;
                        acc -= std::tanh(
                            (std::sqrt(dx * dx + dy * dy) - p.r0) / w);
                    }
                f.data[i] = acc;
            }
        return f;
    }
    case IcTag::crystallites: {
        // Three perfectly initialized crystallites in 40x40 patches at fixed
        // centers, rotated by -pi/4, 0, pi/4; phi_bar elsewhere.
        if (grid.dim != 2)
            throw ConfigError(fail("crystallites").str() + "needs dim 2");
        const double centers[3][2] = {{350, 400}, {200, 200}, {600, 300}};
        const double angles[3] = {-M_PI / 4.0, 0.0, M_PI / 4.0};
        const double half = 20.0;
        for (auto& c : centers) {
            if (c[0] - half < 0 || c[0] + half > grid.extent[0] ||
                c[1] - half < 0 || c[1] + half > grid.extent[1])
                throw ConfigError(fail("crystallites").str() +
                                  "patch outside domain");
        }
        ScalarField f(grid, p.phi_bar);
        const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
        std::size_t i = 0;
        for (int jx = 0; jx < grid.modes[0]; ++jx)
            for (int jy = 0; jy < grid.modes[1]; ++jy, ++i) {
                double x = grid.coord(0, jx), y = grid.coord(1, jy);
                for (int c = 0; c < 3; ++c) {
                    if (std::abs(x - centers[c][0]) > half ||
                        std::abs(y - centers[c][1]) > half)
                        continue;
                    double th = angles[c];
                    double xl = x * std::sin(th) + y * std::cos(th);
                    double yl = -x * std::cos(th) + y * std::sin(th);
                    f.data[i] = p.phi_bar +
                                p.c1 * (std::cos(p.c2 * inv_sqrt3 * yl) *
                                            std::cos(p.c2 * xl) -
                                        0.5 * std::cos(2.0 * p.c2 * inv_sqrt3 * yl));
                    break;
                }
            }
        return f;
    }
    case IcTag::uniform_random: {
        // phi_bar + amp * r with r drawn uniformly from [-1,1] and recentred
        // to exactly zero mean. Raw 53-bit draws keep this bit-reproducible
        // across standard library implementations.
        std::mt19937_64 rng(seed);
        ScalarField f(grid);
        for (double& v : f.data) {
            double u = static_cast<double>(rng() >> 11) * 0x1.0p-53; // [0,1)
            v = 2.0 * u - 1.0;
        }
        double mean = field_mean(f);
        for (double& v : f.data) v = p.phi_bar + p.amp * (v - mean);
        return f;
    }
    case IcTag::shear_layer:
        break;
    }
    throw ConfigError("make_initial: tag produces a velocity field, not a scalar");
}

VectorField make_initial_velocity(IcTag tag, const PeriodicGrid& grid,
                                  const IcParams& p) {
    if (grid.dim != 2)
        throw ConfigError("make_initial(velocity): needs dim 2");
    switch (tag) {
    case IcTag::manufactured:
        return exact_velocity(grid, p.t0);
    case IcTag::shear_layer: {
        VectorField u(grid, 2);
        std::size_t i = 0;
        for (int jx = 0; jx < grid.modes[0]; ++jx)
            for (int jy = 0; jy < grid.modes[1]; ++jy, ++i) {
                double x = grid.coord(0, jx), y = grid.coord(1, jy);
                u.comp[0].data[i] = y <= 0.5 ? std::tanh(p.rho * (y - 0.25))
                                             : std::tanh(p.rho * (0.75 - y));
                u.comp[1].data[i] = p.perturb * std::sin(2.0 * M_PI * x);
            }
        return u;
    }
    default:
        break;
    }
    throw ConfigError("make_initial: tag produces a scalar field, not a velocity");
}

// --- manufactured solutions ---------------------------------------------------

ScalarField exact_scalar(const PeriodicGrid& grid, double t) {
    if (grid.dim != 2) throw ConfigError("manufactured solution: needs dim 2");
    ScalarField f(grid);
    const double st = std::sin(t);
    std::size_t i = 0;
    for (int jx = 0; jx < grid.modes[0]; ++jx)
        for (int jy = 0; jy < grid.modes[1]; ++jy, ++i) {
            double x = grid.coord(0, jx), y = grid.coord(1, jy);
            f.data[i] = std::exp(std::sin(M_PI * x) * std::sin(M_PI * y)) * st;
        }
    return f;
}

VectorField exact_velocity(const PeriodicGrid& grid, double t) {
    if (grid.dim != 2) throw ConfigError("manufactured solution: needs dim 2");
    VectorField u(grid, 2);
    const double st = std::sin(t) * std::sin(t);
    std::size_t i = 0;
    for (int jx = 0; jx < grid.modes[0]; ++jx)
        for (int jy = 0; jy < grid.modes[1]; ++jy, ++i) {
            double x = grid.coord(0, jx), y = grid.coord(1, jy);
            double g = std::exp(std::sin(M_PI * x) + std::sin(M_PI * y));
            u.comp[0].data[i] = M_PI * g * std::cos(M_PI * y) * st;
            u.comp[1].data[i] = -M_PI * g * std::cos(M_PI * x) * st;
        }
    return u;
}

ScalarField exact_pressure(const PeriodicGrid& grid, double t) {
    if (grid.dim != 2) throw ConfigError("manufactured solution: needs dim 2");
    ScalarField f(grid);
    const double st = std::sin(t) * std::sin(t);
    std::size_t i = 0;
    for (int jx = 0; jx < grid.modes[0]; ++jx)
        for (int jy = 0; jy < grid.modes[1]; ++jy, ++i) {
            double x = grid.coord(0, jx), y = grid.coord(1, jy);
            f.data[i] =
                std::exp(std::cos(M_PI * x) * std::sin(M_PI * y)) * st;
        }
    return f;
}

namespace {

// Shared pointwise pieces for phi = e^s(x,y) sin t with s = sin(pi x) sin(pi y):
//   E = e^s,  Q = cos^2(pi x) sin^2(pi y) + sin^2(pi x) cos^2(pi y),
//   lap E = E * P with P = pi^2 (Q - 2 s),
//   lap e^{c s} = e^{c s} (c^2 pi^2 Q - 2 c pi^2 s).
struct ScalarPieces {
    double s, E, Q, P;
    double cx, sx, cy, sy;
};

ScalarPieces scalar_pieces(double x, double y) {
    ScalarPieces v;
    v.sx = std::sin(M_PI * x);
    v.cx = std::cos(M_PI * x);
    v.sy = std::sin(M_PI * y);
    v.cy = std::cos(M_PI * y);
    v.s = v.sx * v.sy;
    v.E = std::exp(v.s);
    v.Q = v.cx * v.cx * v.sy * v.sy + v.sx * v.sx * v.cy * v.cy;
    v.P = M_PI * M_PI * (v.Q - 2.0 * v.s);
    return v;
}

} // namespace

ScalarField manufactured_forcing_scalar(const Model& m, double t) {
    if (m.kind != ModelKind::allen_cahn && m.kind != ModelKind::cahn_hilliard)
        throw ConfigError(
            "manufactured forcing: scalar form defined for allen_cahn/cahn_hilliard");
    if (m.grid.dim != 2) throw ConfigError("manufactured forcing: needs dim 2");
    ScalarField f(m.grid);
    const double st = std::sin(t), ct = std::cos(t);
    const double M = m.p.M, a0 = m.p.alpha0;
    const double pi2 = M_PI * M_PI;
    std::size_t i = 0;
    for (int jx = 0; jx < m.grid.modes[0]; ++jx)
        for (int jy = 0; jy < m.grid.modes[1]; ++jy, ++i) {
            double x = m.grid.coord(0, jx), y = m.grid.coord(1, jy);
            ScalarPieces v = scalar_pieces(x, y);
            double phi = v.E * st;
            double phi3 = phi * phi * phi;
            if (m.kind == ModelKind::allen_cahn) {
                // f = phi_t - M (alpha0 lap phi + phi - phi^3)
                f.data[i] = v.E * ct - M * (a0 * v.E * v.P * st + phi - phi3);
            } else {
                // f = phi_t - M lap(-alpha0 lap phi + (phi^3 - phi)/eps^2)
                double c2x = std::cos(2.0 * M_PI * x), c2y = std::cos(2.0 * M_PI * y);
                double s2x = std::sin(2.0 * M_PI * x), s2y = std::sin(2.0 * M_PI * y);
                double Qx = M_PI * s2x * c2y;
                double Qy = M_PI * s2y * c2x;
                double Px = pi2 * (Qx - 2.0 * M_PI * v.cx * v.sy);
                double Py = pi2 * (Qy - 2.0 * M_PI * v.sx * v.cy);
                double gradE_dot_gradP =
                    v.E * M_PI * (v.cx * v.sy * Px + v.sx * v.cy * Py);
                double lapP = 4.0 * pi2 * pi2 * (c2x * c2y + v.s);
                double bilap_phi =
                    st * (v.E * v.P * v.P + 2.0 * gradE_dot_gradP + v.E * lapP);
                double lap_phi = st * v.E * v.P;
                double lap_phi3 = st * st * st * std::exp(3.0 * v.s) *
                                  (9.0 * pi2 * v.Q - 6.0 * pi2 * v.s);
                double inv_eps2 = 1.0 / (m.p.eps * m.p.eps);
                f.data[i] = v.E * ct + M * a0 * bilap_phi -
                            M * inv_eps2 * (lap_phi3 - lap_phi);
            }
        }
    return f;
}

VectorField manufactured_forcing_velocity(const Model& m, double t) {
    if (m.kind != ModelKind::navier_stokes)
        throw ConfigError("manufactured forcing: velocity form needs navier_stokes");
    if (m.grid.dim != 2) throw ConfigError("manufactured forcing: needs dim 2");
    VectorField f(m.grid, 2);
    const double st = std::sin(t) * std::sin(t); // sin^2 t
    const double dst = std::sin(2.0 * t);        // d/dt sin^2 t
    const double nu = m.p.nu;
    const double pi3 = M_PI * M_PI * M_PI;
    std::size_t i = 0;
    for (int jx = 0; jx < m.grid.modes[0]; ++jx)
        for (int jy = 0; jy < m.grid.modes[1]; ++jy, ++i) {
            double x = m.grid.coord(0, jx), y = m.grid.coord(1, jy);
            double sx = std::sin(M_PI * x), cx = std::cos(M_PI * x);
            double sy = std::sin(M_PI * y), cy = std::cos(M_PI * y);
            double g = std::exp(sx + sy);
            // f = u_t - nu lap u + (u.grad)u + grad p
            double ut1 = M_PI * g * cy * dst;
            double ut2 = -M_PI * g * cx * dst;
            double lap_u1 =
                pi3 * st * g * cy * (cx * cx - sx + cy * cy - 3.0 * sy - 1.0);
            double lap_u2 =
                -pi3 * st * g * cx * (cy * cy - sy + cx * cx - 3.0 * sx - 1.0);
            double adv1 = pi3 * g * g * st * st * cx * sy;
            double adv2 = pi3 * g * g * st * st * sx * cy;
            double ep = std::exp(cx * sy);
            double px = -M_PI * sx * sy * ep * st;
            double py = M_PI * cx * cy * ep * st;
            f.comp[0].data[i] = ut1 - nu * lap_u1 + adv1 + px;
            f.comp[1].data[i] = ut2 - nu * lap_u2 + adv2 + py;
        }
    return f;
}

} // namespace savflow
