#ifndef GRADFLOW_TRIDIAG_HPP
#define GRADFLOW_TRIDIAG_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gradflow {

/// Thomas algorithm for a tridiagonal system. `lower[i]` multiplies x[i-1],
/// `upper[i]` multiplies x[i+1] in row i (lower[0] and upper[n-1] unused).
/// The matrices appearing here are diagonally dominant, so no pivoting.
inline std::vector<double> solve_tridiagonal(std::vector<double> lower,
                                             std::vector<double> diag,
                                             std::vector<double> upper,
                                             std::vector<double> rhs) {
    const std::size_t n = diag.size();
    if (n == 0) return {};
    for (std::size_t i = 1; i < n; ++i) {
        if (diag[i - 1] == 0.0) throw std::runtime_error("tridiagonal solve: zero pivot");
        const double m = lower[i] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    if (diag[n - 1] == 0.0) throw std::runtime_error("tridiagonal solve: zero pivot");
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
    return x;
}

/// Cyclic tridiagonal solve (corner entries couple x[0] and x[n-1]) via
/// Sherman-Morrison on top of the Thomas solve.
inline std::vector<double> solve_cyclic_tridiagonal(const std::vector<double>& lower,
                                                    const std::vector<double>& diag,
                                                    const std::vector<double>& upper,
                                                    const std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    if (n == 1) {
        // single cell: corner terms fold onto the diagonal
        const double d = diag[0] + lower[0] + upper[0];
        if (d == 0.0) throw std::runtime_error("tridiagonal solve: zero pivot");
        return {rhs[0] / d};
    }
    if (n == 2) {
        // wrap and interior couplings coincide; solve the dense 2x2
        const double a = diag[0], b = upper[0] + lower[0];
        const double c = lower[1] + upper[1], d = diag[1];
        const double det = a * d - b * c;
        if (det == 0.0) throw std::runtime_error("tridiagonal solve: singular 2x2");
        return {(d * rhs[0] - b * rhs[1]) / det, (a * rhs[1] - c * rhs[0]) / det};
    }
    const double alpha = lower[0];  // row 0, column n-1
    const double beta = upper[n - 1]; // row n-1, column 0
    const double gamma = -diag[0];
    std::vector<double> d2 = diag;
    d2[0] = diag[0] - gamma;
    d2[n - 1] = diag[n - 1] - alpha * beta / gamma;
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = beta;
    std::vector<double> x = solve_tridiagonal(lower, d2, upper, rhs);
    std::vector<double> z = solve_tridiagonal(lower, d2, upper, u);
    const double vx = x[0] + (alpha / gamma) * x[n - 1];
    const double vz = z[0] + (alpha / gamma) * z[n - 1];
    const double factor = vx / (1.0 + vz);
    for (std::size_t i = 0; i < n; ++i) x[i] -= factor * z[i];
    return x;
}

} // namespace gradflow

#endif
