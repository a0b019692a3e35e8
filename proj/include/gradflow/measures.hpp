#ifndef GRADFLOW_MEASURES_HPP
#define GRADFLOW_MEASURES_HPP

#include <limits>
#include <vector>

#include "gradflow/grid.hpp"

namespace gradflow {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Nonnegative mass per cell of a uniform grid. Density in cell i is
/// weights[i]/dx. Total mass 1 marks a probability measure; smaller masses
/// appear in decay processes.
class GridMeasure {
  public:
    GridMeasure(Grid grid, std::vector<double> weights);

    static GridMeasure uniform_probability(const Grid& grid);
    static GridMeasure from_density(const Grid& grid, const std::vector<double>& density);

    const Grid& grid() const { return grid_; }
    const std::vector<double>& weights() const { return weights_; }
    double weight(std::size_t i) const { return weights_[i]; }
    std::size_t size() const { return weights_.size(); }

    double total_mass() const;
    bool is_probability(double tol = 1e-12) const;
    double density(std::size_t i) const { return weights_[i] / grid_.dx(); }
    std::vector<double> densities() const;

  private:
    Grid grid_;
    std::vector<double> weights_;
};

/// SSEP-style occupation fraction per site of a torus grid, values in [0,1].
class OccupationProfile {
  public:
    OccupationProfile(Grid grid, std::vector<double> values);

    const Grid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }

    /// The occupation density read as a measure (weight = value * dx).
    GridMeasure as_measure() const;

  private:
    Grid grid_;
    std::vector<double> values_;
};

/// Particle positions inside the domain of `domain`.
struct ParticleCloud {
    std::vector<double> positions;
    Grid domain;

    ParticleCloud(std::vector<double> pos, Grid dom)
        : positions(std::move(pos)), domain(dom) {}
    std::size_t size() const { return positions.size(); }
};

/// Driving functional: entropy, mixing entropy, or free energy
/// Ent + (1/kT) [ ∫ρΨ + ½∫ρ(ρ∗Φ) ].
struct EnergySpec {
    enum class Kind { entropy, mixing_entropy, free_energy };

    Kind kind = Kind::entropy;
    GridFn background{};   // Ψ, cell centers (free_energy)
    GridFn interaction{};  // Φ, even kernel (free_energy)
    double kT = 1.0;

    static EnergySpec entropy();
    static EnergySpec mixing_entropy();
    static EnergySpec free_energy(const Grid& grid, GridFn psi, GridFn phi, double kT = 1.0);

    bool has_interaction() const;
};

namespace measures {

/// ρ_n = (1/n) Σ δ_{X_i}, binned to the grid.
GridMeasure empirical_measure(const ParticleCloud& cloud, const Grid& grid);

/// H(ρ|μ) = Σ ρ_i log(ρ_i/μ_i); +inf without absolute continuity.
double relative_entropy(const GridMeasure& rho, const GridMeasure& mu);

/// Ent(ρ) = ∫ f log f dx against Lebesgue, rectangle rule.
double boltzmann_entropy(const GridMeasure& rho);

/// Ent_mix(ρ) = ∫ [ρ log ρ + (1-ρ) log(1-ρ)] dx.
double mixing_entropy(const OccupationProfile& rho);

/// F(ρ) = Ent(ρ) + (1/kT)[Σ ρΨ + ½ Σ ρ(ρ∗Φ)].
double free_energy(const GridMeasure& rho, const EnergySpec& spec);

/// Dispatch on spec.kind; mixing_entropy reads densities as occupations.
double energy_value(const GridMeasure& rho, const EnergySpec& spec);

/// Grid convolution (ρ∗Φ)_i = Σ_j w_j K(i,j); circular on the torus,
/// even-reflected and truncated on the interval.
GridFn convolve(const GridMeasure& rho, const GridFn& phi);

/// δE/δρ as a grid function g with Σ g s dx = dE(ρ+εs)/dε for mass-neutral s.
GridFn variational_derivative(const EnergySpec& spec, const GridMeasure& rho);
GridFn variational_derivative(const EnergySpec& spec, const OccupationProfile& rho);

/// Check Φ(x) = Φ(-x) on the grid (reflection through the origin).
bool is_even_kernel(const GridFn& phi, double tol = 1e-12);

} // namespace measures
} // namespace gradflow

#endif
