#pragma once
// Uniform periodic tensor-product grids for the Fourier pseudo-spectral backend.
// Points along axis a sit at x_j = j*h_a, h_a = L_a/N_a, j = 0..N_a-1 (the
// point at L_a is the periodic image of 0). Storage is row-major, last axis
// fastest.

#include <array>
#include <cstddef>

#include "savflow/errors.hpp"

namespace savflow {

inline constexpr int max_dim = 3;

struct PeriodicGrid {
    int dim = 0;
    std::array<int, max_dim> modes{};     // samples per axis, even and >= 4
    std::array<double, max_dim> extent{}; // physical lengths L_a > 0

    std::size_t size() const {
        std::size_t n = 1;
        for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(modes[a]);
        return n;
    }
    double spacing(int axis) const { return extent[axis] / modes[axis]; }
    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < dim; ++a) v *= spacing(a);
        return v;
    }
    double coord(int axis, int j) const { return j * spacing(axis); }

    // Integer mode index in FFT order: 0,1,..,N/2,-N/2+1,..,-1 (Nyquist kept
    // positive, so the table is antisymmetric except at that slot).
    int mode_index(int axis, int j) const {
        return j <= modes[axis] / 2 ? j : j - modes[axis];
    }
    // Angular wavenumber 2*pi*m/L for slot j.
    double wavenumber(int axis, int j) const;

    bool operator==(const PeriodicGrid&) const = default;
};

PeriodicGrid build_grid(int dim, const std::array<double, max_dim>& extents,
                        const std::array<int, max_dim>& modes);

} // namespace savflow
