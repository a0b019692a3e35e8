#ifndef GRADFLOW_SCALAR_FLOWS_HPP
#define GRADFLOW_SCALAR_FLOWS_HPP

#include <cstddef>
#include <functional>
#include <vector>

namespace gradflow {

/// Legendre pair (ψ, ψ*) of convex functions of force / velocity; the pair
/// may depend on the current state (spin-flip does).
struct DissipationPair {
    enum class Kind { quadratic, birth_death, spin_flip, custom };

    Kind kind = Kind::custom;
    double alpha = 1.0;
    std::function<double(double xi, double state)> psi;
    std::function<double(double v, double state)> psi_star;
    std::function<double(double xi, double state)> psi_prime;

    static DissipationPair quadratic();
    /// ψ(ξ) = α(e^ξ + e^{-ξ}), ψ*(v) = v asinh(v/2α) - sqrt(v² + 4α²).
    static DissipationPair birth_death(double alpha);
    /// State-dependent pair of the magnetization process,
    /// ψ_m(ξ) = ½ sqrt(1-m²)(e^{2ξ} + e^{-2ξ}).
    static DissipationPair spin_flip();
};

struct ScalarEnergy {
    std::function<double(double)> value;
    std::function<double(double)> deriv;

    static ScalarEnergy quadratic(); // u²/2
    /// E(m) = ¼(1+m)log(1+m) + ¼(1-m)log(1-m).
    static ScalarEnergy spin_flip();
};

/// Scalar trajectory on a uniform time grid.
struct ScalarPath {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double time(std::size_t k) const { return t0 + dt * static_cast<double>(k); }
    ScalarPath reversed() const {
        ScalarPath r{t0, dt, {values.rbegin(), values.rend()}};
        return r;
    }
};

using Lagrangian = std::function<double(double u, double v)>;

namespace scalar {

/// Numeric Legendre transform sup_ξ (v ξ - f(ξ)) over [lo, hi].
double conjugate(const std::function<double(double)>& f, double v, double lo, double hi);

/// Closed-form birth-death Lagrangian; zero exactly at v = 2α sinh(-E'(u)).
double bd_lagrangian(double u, double v, const std::function<double(double)>& e_prime,
                     double alpha);

/// Closed-form spin-flip Lagrangian; zero exactly at q = -2m. Needs |m| < 1.
double sf_lagrangian(double m, double q);

Lagrangian bd_lagrangian_fn(std::function<double(double)> e_prime, double alpha);
Lagrangian sf_lagrangian_fn();

/// RK4 for the generalized gradient flow  u' = ψ'(-E'(u)).
ScalarPath generalized_flow_solve(const ScalarEnergy& energy, const DissipationPair& pair,
                                  double u0, double t_end, double dt);

/// Midpoint-rule action Σ L((u_k+u_{k+1})/2, (u_{k+1}-u_k)/Δt) Δt.
double path_action(const ScalarPath& path, const Lagrangian& lagrangian);

struct OptimalActionResult {
    double value;
    ScalarPath path;
    std::size_t iterations;
};

/// Minimize the discretized action over interior nodes, endpoints fixed;
/// L-BFGS from the linear interpolation.
OptimalActionResult optimal_action(const Lagrangian& lagrangian, double u_start, double u_end,
                                   double T, std::size_t K);

/// Validate ψ* against the numeric conjugate of ψ on sample points.
bool is_legendre_pair(const DissipationPair& pair, const std::vector<double>& states,
                      const std::vector<double>& velocities, double tol = 1e-6);

} // namespace scalar
} // namespace gradflow

#endif
