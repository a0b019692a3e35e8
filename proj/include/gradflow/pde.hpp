#ifndef GRADFLOW_PDE_HPP
#define GRADFLOW_PDE_HPP

#include "gradflow/measures.hpp"
#include "gradflow/path.hpp"

namespace gradflow {

enum class Scheme { crank_nicolson, implicit_euler };

struct PdeConfig {
    Grid grid;
    double dt;
    double t_end;
    Scheme scheme = Scheme::crank_nicolson;
    double A = 1.0;      // mobility scalar in front of the drift
    double sigma2 = 1.0; // σσᵀ reduced to a scalar
    double lambda = 0.0; // decay rate

    PdeConfig(Grid g, double step, double end) : grid(g), dt(step), t_end(end) { validate(); }
    void validate() const;
    std::size_t n_steps() const;
};

namespace pde {

/// ∂_t ρ = σ² ∂_xx ρ, θ-scheme in time, conservative 3-point stencil.
MeasurePath heat_solve(const GridMeasure& rho0, const PdeConfig& cfg);

/// Occupation profiles obey the same linear equation.
MeasurePath heat_solve(const OccupationProfile& rho0, const PdeConfig& cfg);

/// ∂_t ρ = σ² ∂_xx ρ + A ∂_x(ρ ∂_x[Ψ + ρ∗Φ]); implicit diffusion, explicit
/// central interaction flux.
MeasurePath drift_interaction_solve(const GridMeasure& rho0, const GridFn& psi,
                                    const GridFn& phi, const PdeConfig& cfg);

/// ∂_t ρ = σ² ∂_xx ρ + A ∂_x(ρ ∂_xΨ) − λρ; transport-diffusion step followed
/// by the exact decay factor e^{-λ dt}.
MeasurePath decay_solve(const GridMeasure& rho0, const GridFn& psi, double lambda,
                        const PdeConfig& cfg);

} // namespace pde
} // namespace gradflow

#endif
