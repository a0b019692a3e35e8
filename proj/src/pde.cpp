#include "gradflow/pde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gradflow/tridiag.hpp"

namespace gradflow {

void PdeConfig::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
    if (dt > t_end * (1.0 + 1e-12)) throw std::invalid_argument("dt exceeds t_end");
    if (!(A > 0.0) || !(sigma2 > 0.0)) throw std::invalid_argument("A and sigma2 must be positive");
    if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
}

std::size_t PdeConfig::n_steps() const {
    const double k = t_end / dt;
    const auto K = static_cast<std::size_t>(std::llround(k));
    if (K == 0 || std::abs(static_cast<double>(K) - k) > 1e-9 * std::max(1.0, k))
        throw std::invalid_argument("t_end is not a multiple of dt");
    return K;
}

namespace pde {
namespace {

// One θ-step of ∂_t f = σ² ∂_xx f: (I - θ c L) f' = (I + (1-θ) c L) f.
std::vector<double> diffusion_step(const std::vector<double>& f, const Grid& g, double c,
                                   double theta) {
    const std::size_t n = g.n_cells;
    const double a = c / (g.dx() * g.dx());
    std::vector<double> rhs(n);
    const bool torus = g.topology == Topology::torus;
    for (std::size_t i = 0; i < n; ++i) {
        double lap;
        if (torus) {
            lap = f[(i + 1) % n] - 2.0 * f[i] + f[(i + n - 1) % n];
        } else {
            if (i == 0)
                lap = f[1] - f[0];
            else if (i == n - 1)
                lap = f[n - 2] - f[n - 1];
            else
                lap = f[i + 1] - 2.0 * f[i] + f[i - 1];
        }
        rhs[i] = f[i] + (1.0 - theta) * a * lap;
    }
    const double b = theta * a;
    std::vector<double> lower(n, -b), upper(n, -b), diag(n);
    if (torus) {
        for (std::size_t i = 0; i < n; ++i) diag[i] = 1.0 + 2.0 * b;
        return solve_cyclic_tridiagonal(lower, diag, upper, rhs);
    }
    for (std::size_t i = 0; i < n; ++i) diag[i] = 1.0 + 2.0 * b;
    diag[0] = 1.0 + b;
    diag[n - 1] = 1.0 + b;
    return solve_tridiagonal(lower, diag, upper, rhs);
}

void check_positivity(const std::vector<double>& f) {
    for (double v : f)
        if (v < -1e-12)
            throw std::runtime_error("scheme instability: negative density (reduce dt)");
}

// Explicit divergence of the interaction flux A ρ ∂_x ξ, central at faces.
std::vector<double> interaction_divergence(const std::vector<double>& f, const GridFn& xi,
                                           const Grid& g, double A, double dt) {
    const std::size_t n = g.n_cells;
    const double dx = g.dx();
    const bool torus = g.topology == Topology::torus;
    const std::size_t nf = torus ? n : n - 1;
    std::vector<double> flux(nf, 0.0);
    double max_speed = 0.0;
    for (std::size_t k = 0; k < nf; ++k) {
        const std::size_t r = (k + 1) % n;
        const double grad = (xi[r] - xi[k]) / dx;
        max_speed = std::max(max_speed, std::abs(A * grad));
        flux[k] = A * 0.5 * (f[k] + f[r]) * grad;
    }
    if (max_speed * dt / dx > 1.0) throw std::runtime_error("reduce dt");
    std::vector<double> div(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double right, left;
        if (torus) {
            right = flux[i];
            left = flux[(i + n - 1) % n];
        } else {
            right = i < n - 1 ? flux[i] : 0.0;
            left = i > 0 ? flux[i - 1] : 0.0;
        }
        div[i] = (right - left) / dx;
    }
    return div;
}

MeasurePath evolve(const GridMeasure& rho0, const PdeConfig& cfg, const GridFn* psi,
                   const GridFn* phi, double lambda) {
    require_same_grid(rho0.grid(), cfg.grid);
    const Grid& g = cfg.grid;
    const std::size_t K = cfg.n_steps();
    const double theta = cfg.scheme == Scheme::crank_nicolson ? 0.5 : 1.0;
    const bool with_drift = psi != nullptr;
    const bool with_phi = phi != nullptr && [&] {
        for (double v : *phi)
            if (v != 0.0) return true;
        return false;
    }();
    if (with_phi && !measures::is_even_kernel(*phi))
        throw std::invalid_argument("interaction kernel must be even");

    std::vector<double> f = rho0.densities();
    std::vector<GridMeasure> slices;
    slices.reserve(K + 1);
    slices.push_back(rho0);
    const double decay = std::exp(-lambda * cfg.dt);
    for (std::size_t k = 0; k < K; ++k) {
        if (with_drift) {
            GridFn xi = *psi;
            if (with_phi) {
                const GridFn conv = measures::convolve(GridMeasure::from_density(g, f), *phi);
                for (std::size_t i = 0; i < xi.size(); ++i) xi[i] += conv[i];
            }
            const std::vector<double> div = interaction_divergence(f, xi, g, cfg.A, cfg.dt);
            for (std::size_t i = 0; i < f.size(); ++i) f[i] += cfg.dt * div[i];
        }
        f = diffusion_step(f, g, cfg.dt * cfg.sigma2, theta);
        if (lambda > 0.0)
            for (double& v : f) v *= decay;
        check_positivity(f);
        slices.push_back(GridMeasure::from_density(g, f));
    }
    return MeasurePath(0.0, cfg.dt, std::move(slices));
}

} // namespace

MeasurePath heat_solve(const GridMeasure& rho0, const PdeConfig& cfg) {
    if (cfg.lambda != 0.0) throw std::invalid_argument("heat_solve takes lambda = 0");
    return evolve(rho0, cfg, nullptr, nullptr, 0.0);
}

MeasurePath heat_solve(const OccupationProfile& rho0, const PdeConfig& cfg) {
    return heat_solve(rho0.as_measure(), cfg);
}

MeasurePath drift_interaction_solve(const GridMeasure& rho0, const GridFn& psi,
                                    const GridFn& phi, const PdeConfig& cfg) {
    if (psi.size() != cfg.grid.n_cells || phi.size() != cfg.grid.n_cells)
        throw std::invalid_argument("grid mismatch");
    return evolve(rho0, cfg, &psi, &phi, 0.0);
}

MeasurePath decay_solve(const GridMeasure& rho0, const GridFn& psi, double lambda,
                        const PdeConfig& cfg) {
    if (psi.size() != cfg.grid.n_cells) throw std::invalid_argument("grid mismatch");
    if (rho0.total_mass() > 1.0 + 1e-12)
        throw std::invalid_argument("decay_solve takes total mass <= 1");
    if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
    return evolve(rho0, cfg, &psi, nullptr, lambda);
}

} // namespace pde
} // namespace gradflow
