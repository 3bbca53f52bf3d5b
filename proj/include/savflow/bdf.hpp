#pragma once
// IMEX BDF coefficient tables: alpha_k phi^{n+1} - A_k(phi^n) over dt for the
// implicit side and hat-weights for the explicit extrapolation phi_hat^{n+1}.
// A-weights sum to alpha (constants are fixed points); hat-weights sum to 1.

#include <vector>

#include "savflow/errors.hpp"

namespace savflow {

struct BdfTable {
    int k = 1;
    double alpha = 1.0;
    std::vector<double> A;   // weights on phi^n, phi^{n-1}, ... (newest first)
    std::vector<double> hat; // extrapolation weights, same ordering
};

inline BdfTable bdf_table(int k) {
    switch (k) {
    case 1: return {1, 1.0, {1.0}, {1.0}};
    case 2: return {2, 3.0 / 2.0, {2.0, -1.0 / 2.0}, {2.0, -1.0}};
    case 3: return {3, 11.0 / 6.0, {3.0, -3.0 / 2.0, 1.0 / 3.0}, {3.0, -3.0, 1.0}};
    case 4:
        return {4, 25.0 / 12.0, {4.0, -3.0, 4.0 / 3.0, -1.0 / 4.0},
                {4.0, -6.0, 4.0, -1.0}};
    default:
        throw ConfigError("bdf_table: k out of range 1..4");
    }
}

} // namespace savflow
