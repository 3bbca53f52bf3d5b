#pragma once
// Real-space fields on a periodic grid, plus the small amount of vector
// arithmetic the schemes need (history combinations, axpy updates).

#include <cassert>
#include <complex>
#include <vector>

#include "savflow/grid.hpp"

namespace savflow {

struct ScalarField {
    PeriodicGrid grid;
    std::vector<double> data;

    ScalarField() = default;
    explicit ScalarField(const PeriodicGrid& g, double fill = 0.0)
        : grid(g), data(g.size(), fill) {}

    std::size_t size() const { return data.size(); }
    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }
};

struct VectorField {
    std::vector<ScalarField> comp;

    VectorField() = default;
    VectorField(const PeriodicGrid& g, int ncomp) : comp(ncomp, ScalarField(g)) {}

    const PeriodicGrid& grid() const { return comp.at(0).grid; }
    int components() const { return static_cast<int>(comp.size()); }
};

// Spectral counterpart of a ScalarField (full c2c layout, same shape).
struct Spectrum {
    PeriodicGrid grid;
    std::vector<std::complex<double>> coef;

    Spectrum() = default;
    explicit Spectrum(const PeriodicGrid& g) : grid(g), coef(g.size()) {}
};

// y += a*x
inline void add_scaled(ScalarField& y, double a, const ScalarField& x) {
    assert(y.grid == x.grid);
    for (std::size_t i = 0; i < y.size(); ++i) y.data[i] += a * x.data[i];
}

inline ScalarField scaled(const ScalarField& x, double a) {
    ScalarField r = x;
    for (double& v : r.data) v *= a;
    return r;
}

inline ScalarField add(const ScalarField& f, const ScalarField& g) {
    ScalarField r = f;
    add_scaled(r, 1.0, g);
    return r;
}

inline ScalarField sub(const ScalarField& f, const ScalarField& g) {
    ScalarField r = f;
    add_scaled(r, -1.0, g);
    return r;
}

// weights[0]*hist[0] + weights[1]*hist[1] + ... (hist[0] = newest)
template <class FieldSeq>
ScalarField lincomb(const std::vector<double>& weights, const FieldSeq& hist) {
    ScalarField r(hist[0].grid);
    for (std::size_t j = 0; j < weights.size(); ++j)
        add_scaled(r, weights[j], hist[j]);
    return r;
}

inline void add_scaled(VectorField& y, double a, const VectorField& x) {
    for (int c = 0; c < y.components(); ++c) add_scaled(y.comp[c], a, x.comp[c]);
}

inline VectorField scaled(const VectorField& x, double a) {
    VectorField r = x;
    for (auto& f : r.comp)
        for (double& v : f.data) v *= a;
    return r;
}

inline VectorField sub(const VectorField& f, const VectorField& g) {
    VectorField r = f;
    add_scaled(r, -1.0, g);
    return r;
}

} // namespace savflow
