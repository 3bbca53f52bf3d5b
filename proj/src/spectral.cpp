#include "savflow/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace savflow {

double PeriodicGrid::wavenumber(int axis, int j) const {
    return 2.0 * M_PI * mode_index(axis, j) / extent[axis];
}

PeriodicGrid build_grid(int dim, const std::array<double, max_dim>& extents,
                        const std::array<int, max_dim>& modes) {
    if (dim < 1 || dim > max_dim)
        throw ConfigError("grid: dim must be 1, 2 or 3");
    PeriodicGrid g;
    g.dim = dim;
    for (int a = 0; a < dim; ++a) {
        if (modes[a] < 4 || modes[a] % 2 != 0) {
            std::ostringstream os;
            os << "grid: modes[" << a << "] = " << modes[a]
               << " (need even and >= 4)";
            throw ConfigError(os.str());
        }
        if (!(extents[a] > 0.0)) {
            std::ostringstream os;
            os << "grid: extent[" << a << "] must be positive";
            throw ConfigError(os.str());
        }
        g.modes[a] = modes[a];
        g.extent[a] = extents[a];
    }
    return g;
}

namespace {

// Plan cache keyed by shape and direction. FFTW_ESTIMATE keeps planning
// deterministic; FFTW_UNALIGNED lets one plan serve any buffer via
// fftw_execute_dft (which is thread-safe for distinct buffers).
struct PlanKey {
    int dim;
    std::array<int, max_dim> n;
    int sign;
    auto operator<=>(const PlanKey&) const = default;
};

fftw_plan get_plan(const PeriodicGrid& g, int sign) {
    static std::map<PlanKey, fftw_plan> cache;
    static std::mutex mtx;
    PlanKey key{g.dim, g.modes, sign};
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<std::complex<double>> a(g.size()), b(g.size());
    fftw_plan p = fftw_plan_dft(
        g.dim, key.n.data(), reinterpret_cast<fftw_complex*>(a.data()),
        reinterpret_cast<fftw_complex*>(b.data()), sign,
        FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(key, p);
    return p;
}

void execute(const PeriodicGrid& g, int sign, std::complex<double>* in,
             std::complex<double>* out) {
    fftw_execute_dft(get_plan(g, sign), reinterpret_cast<fftw_complex*>(in),
                     reinterpret_cast<fftw_complex*>(out));
}

// Row-major index -> per-axis slot indices.
inline void unravel(const PeriodicGrid& g, std::size_t idx,
                    std::array<int, max_dim>& j) {
    for (int a = g.dim - 1; a >= 0; --a) {
        j[a] = static_cast<int>(idx % g.modes[a]);
        idx /= g.modes[a];
    }
}

void check_same_grid(const PeriodicGrid& a, const PeriodicGrid& b,
                     const char* who) {
    if (!(a == b)) throw NumericError(std::string(who) + ": grid mismatch");
}

} // namespace

Spectrum forward(const ScalarField& f) {
    Spectrum s(f.grid);
    std::vector<std::complex<double>> in(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) in[i] = f.data[i];
    execute(f.grid, FFTW_FORWARD, in.data(), s.coef.data());
    return s;
}

ScalarField inverse(const Spectrum& s) {
    ScalarField f(s.grid);
    std::vector<std::complex<double>> out(s.coef.size());
    std::vector<std::complex<double>> in = s.coef;
    execute(s.grid, FFTW_BACKWARD, in.data(), out.data());
    const double scale = 1.0 / static_cast<double>(s.grid.size());
    for (std::size_t i = 0; i < out.size(); ++i) f.data[i] = out[i].real() * scale;
    return f;
}

DiagonalOperator identity_op(const PeriodicGrid& g) {
    return DiagonalOperator(g, 1.0);
}

DiagonalOperator laplacian_op(const PeriodicGrid& g) {
    DiagonalOperator op(g);
    std::array<int, max_dim> j{};
    for (std::size_t i = 0; i < op.symbol.size(); ++i) {
        unravel(g, i, j);
        double k2 = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            double k = g.wavenumber(a, j[a]);
            k2 += k * k;
        }
        op.symbol[i] = -k2;
    }
    return op;
}

DiagonalOperator operator+(const DiagonalOperator& a, const DiagonalOperator& b) {
    check_same_grid(a.grid, b.grid, "op+");
    DiagonalOperator r = a;
    for (std::size_t i = 0; i < r.symbol.size(); ++i) r.symbol[i] += b.symbol[i];
    return r;
}

DiagonalOperator operator-(const DiagonalOperator& a, const DiagonalOperator& b) {
    check_same_grid(a.grid, b.grid, "op-");
    DiagonalOperator r = a;
    for (std::size_t i = 0; i < r.symbol.size(); ++i) r.symbol[i] -= b.symbol[i];
    return r;
}

DiagonalOperator operator*(const DiagonalOperator& a, const DiagonalOperator& b) {
    check_same_grid(a.grid, b.grid, "op*");
    DiagonalOperator r = a;
    for (std::size_t i = 0; i < r.symbol.size(); ++i) r.symbol[i] *= b.symbol[i];
    return r;
}

DiagonalOperator operator*(double s, const DiagonalOperator& a) {
    DiagonalOperator r = a;
    for (double& v : r.symbol) v *= s;
    return r;
}

ScalarField apply_op(const DiagonalOperator& op, const ScalarField& f) {
    check_same_grid(op.grid, f.grid, "apply_op");
    Spectrum s = forward(f);
    apply_op_inplace(op, s);
    return inverse(s);
}

void apply_op_inplace(const DiagonalOperator& op, Spectrum& s) {
    check_same_grid(op.grid, s.grid, "apply_op");
    for (std::size_t i = 0; i < s.coef.size(); ++i) s.coef[i] *= op.symbol[i];
}

ScalarField solve_shifted(double a, double b, const DiagonalOperator& A,
                          const DiagonalOperator& B, const ScalarField& rhs) {
    check_same_grid(A.grid, rhs.grid, "solve_shifted");
    check_same_grid(B.grid, rhs.grid, "solve_shifted");
    Spectrum s = forward(rhs);
    for (std::size_t i = 0; i < s.coef.size(); ++i) {
        double denom = a + b * A.symbol[i] * B.symbol[i];
        if (std::abs(denom) < 1e-14 * std::max(1.0, std::abs(a))) {
            std::ostringstream os;
            os << "solve_shifted: singular symbol at mode " << i
               << " (a=" << a << ", b=" << b << ")";
            throw NumericError(os.str());
        }
        s.coef[i] /= denom;
    }
    return inverse(s);
}

double inner_product(const ScalarField& f, const ScalarField& g) {
    check_same_grid(f.grid, g.grid, "inner_product");
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += f.data[i] * g.data[i];
    return acc * f.grid.cell_volume();
}

double inner_product(const VectorField& f, const VectorField& g) {
    double acc = 0.0;
    for (int c = 0; c < f.components(); ++c)
        acc += inner_product(f.comp[c], g.comp[c]);
    return acc;
}

double norm_l2(const ScalarField& f) { return std::sqrt(inner_product(f, f)); }

double norm_l2(const VectorField& f) { return std::sqrt(inner_product(f, f)); }

void dealias_inplace(Spectrum& s, DealiasRule rule) {
    if (rule == DealiasRule::none) return;
    const PeriodicGrid& g = s.grid;
    std::array<int, max_dim> j{};
    for (std::size_t i = 0; i < s.coef.size(); ++i) {
        unravel(g, i, j);
        for (int a = 0; a < g.dim; ++a) {
            if (3 * std::abs(g.mode_index(a, j[a])) > g.modes[a]) {
                s.coef[i] = 0.0;
                break;
            }
        }
    }
}

ScalarField dealias(const ScalarField& f, DealiasRule rule) {
    if (rule == DealiasRule::none) return f;
    Spectrum s = forward(f);
    dealias_inplace(s, rule);
    return inverse(s);
}

ScalarField partial(const ScalarField& f, int axis) {
    Spectrum s = forward(f);
    const PeriodicGrid& g = f.grid;
    std::array<int, max_dim> j{};
    for (std::size_t i = 0; i < s.coef.size(); ++i) {
        unravel(g, i, j);
        if (2 * j[axis] == g.modes[axis]) {
            s.coef[i] = 0.0;
        } else {
            s.coef[i] *= std::complex<double>(0.0, g.wavenumber(axis, j[axis]));
        }
    }
    return inverse(s);
}

ScalarField divergence(const VectorField& u) {
    ScalarField d(u.grid());
    for (int c = 0; c < u.components(); ++c)
        add_scaled(d, 1.0, partial(u.comp[c], c));
    return d;
}

VectorField gradient(const ScalarField& p) {
    VectorField g(p.grid, p.grid.dim);
    for (int a = 0; a < p.grid.dim; ++a) g.comp[a] = partial(p, a);
    return g;
}

VectorField leray_project(const VectorField& u) {
    const PeriodicGrid& g = u.grid();
    const int d = u.components();
    std::vector<Spectrum> s(d);
    for (int c = 0; c < d; ++c) s[c] = forward(u.comp[c]);
    std::array<int, max_dim> j{};
    for (std::size_t i = 0; i < g.size(); ++i) {
        unravel(g, i, j);
        double k[max_dim] = {0, 0, 0};
        double k2 = 0.0;
        for (int a = 0; a < d; ++a) {
            // Nyquist slots carry no first-derivative content; use the same
            // zeroed symbol as partial() so P commutes with grad/div.
            k[a] = (2 * j[a] == g.modes[a]) ? 0.0 : g.wavenumber(a, j[a]);
            k2 += k[a] * k[a];
        }
        if (k2 == 0.0) continue; // mean flow passes through
        std::complex<double> kdotu = 0.0;
        for (int a = 0; a < d; ++a) kdotu += k[a] * s[a].coef[i];
        kdotu /= k2;
        for (int a = 0; a < d; ++a) s[a].coef[i] -= k[a] * kdotu;
    }
    VectorField out(g, d);
    for (int c = 0; c < d; ++c) out.comp[c] = inverse(s[c]);
    return out;
}

ScalarField solve_poisson_zero_mean(const ScalarField& rhs) {
    const PeriodicGrid& g = rhs.grid;
    Spectrum s = forward(rhs);
    std::array<int, max_dim> j{};
    for (std::size_t i = 0; i < s.coef.size(); ++i) {
        unravel(g, i, j);
        double k2 = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            double k = g.wavenumber(a, j[a]);
            k2 += k * k;
        }
        if (k2 == 0.0)
            s.coef[i] = 0.0; // gauge: zero-mean solution
        else
            s.coef[i] /= -k2;
    }
    return inverse(s);
}

} // namespace savflow
