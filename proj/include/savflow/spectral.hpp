#pragma once
// Fourier pseudo-spectral backend: transforms, diagonal operators and their
// shifted inverses, quadrature, dealiasing, and the handful of vector-calculus
// helpers the Navier-Stokes path needs.
//
// Conventions: forward() is the plain unnormalized DFT sum; inverse() divides
// by the point count, so inverse(forward(f)) == f. All public contracts are
// stated in real space. Quadrature is the uniform-grid rectangle rule
// h_1...h_d * sum(f*g), spectrally accurate for smooth periodic integrands.

#include "savflow/field.hpp"

namespace savflow {

// Constant-coefficient operator, diagonal in Fourier space: one real
// multiplier per mode (all operators here are self-adjoint).
struct DiagonalOperator {
    PeriodicGrid grid;
    std::vector<double> symbol;

    DiagonalOperator() = default;
    explicit DiagonalOperator(const PeriodicGrid& g, double fill = 0.0)
        : grid(g), symbol(g.size(), fill) {}
};

DiagonalOperator identity_op(const PeriodicGrid& g);
DiagonalOperator laplacian_op(const PeriodicGrid& g); // symbol -|k|^2

// Pointwise symbol arithmetic, for composing model operators like (D+beta)^2.
DiagonalOperator operator+(const DiagonalOperator& a, const DiagonalOperator& b);
DiagonalOperator operator-(const DiagonalOperator& a, const DiagonalOperator& b);
DiagonalOperator operator*(const DiagonalOperator& a, const DiagonalOperator& b);
DiagonalOperator operator*(double s, const DiagonalOperator& a);

Spectrum forward(const ScalarField& f);
ScalarField inverse(const Spectrum& s);

ScalarField apply_op(const DiagonalOperator& op, const ScalarField& f);
void apply_op_inplace(const DiagonalOperator& op, Spectrum& s);

// Solve (a*I + b*A.B) u = rhs mode-wise. Throws NumericError naming the first
// singular mode if |a + b*symA*symB| vanishes there.
ScalarField solve_shifted(double a, double b, const DiagonalOperator& A,
                          const DiagonalOperator& B, const ScalarField& rhs);

double inner_product(const ScalarField& f, const ScalarField& g);
double inner_product(const VectorField& f, const VectorField& g);
double norm_l2(const ScalarField& f);
double norm_l2(const VectorField& f);

enum class DealiasRule { none, two_thirds };

// two_thirds zeroes every mode with |m| > N/3 on some axis; none is identity.
ScalarField dealias(const ScalarField& f, DealiasRule rule);
void dealias_inplace(Spectrum& s, DealiasRule rule);

// First derivative along an axis (i*k multiplier; the Nyquist mode is zeroed,
// as it carries no sign information for odd derivatives).
ScalarField partial(const ScalarField& f, int axis);

ScalarField divergence(const VectorField& u);
VectorField gradient(const ScalarField& p);

// Leray projection P = I - grad inv(div grad) div, mode-wise
// u_hat - k (k.u_hat)/|k|^2; the k=0 mode is untouched.
VectorField leray_project(const VectorField& u);

// Solve lap(p) = rhs with the zero-mean gauge (mode 0 of p set to 0).
// The rhs must have (numerically) zero mean for the problem to be solvable.
ScalarField solve_poisson_zero_mean(const ScalarField& rhs);

} // namespace savflow
