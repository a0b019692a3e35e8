#ifndef GRADFLOW_JKO_HPP
#define GRADFLOW_JKO_HPP

#include <cstddef>
#include <utility>
#include <vector>

#include "gradflow/measures.hpp"
#include "gradflow/path.hpp"

namespace gradflow {

/// Inverse-CDF parametrization of a measure on an interval: m quantile points
/// X_j = F^{-1}((j-1/2) M / m) carrying mass M/m each, with mass M/m spread
/// between consecutive quantile midpoints.
class QuantileDensity {
  public:
    QuantileDensity(std::vector<double> positions, double total_mass, double domain_length);

    static QuantileDensity from_measure(const GridMeasure& rho, std::size_t m);
    GridMeasure to_measure(const Grid& grid) const;

    std::size_t size() const { return positions_.size(); }
    const std::vector<double>& positions() const { return positions_; }
    double total_mass() const { return total_mass_; }
    double domain_length() const { return domain_length_; }

  private:
    std::vector<double> positions_;
    double total_mass_;
    double domain_length_;
};

namespace jko {

/// K_h(ρ1; ρ0) = d(ρ0,ρ1)^2 / 4h + Ent(ρ1)/2 - Ent(ρ0)/2.
double k_h_value(const GridMeasure& rho1, const GridMeasure& rho0, double h);

struct StepResult {
    GridMeasure measure;
    QuantileDensity quantiles;
    double objective_start;    // objective at the previous state
    double objective;          // objective at the minimizer
    double distance_sq;        // transport term d^2 in quantile coordinates
    double energy_start;       // quantile-coordinate energy of the previous state
    double energy;             // quantile-coordinate energy of the minimizer
    std::size_t newton_iterations;
};

/// One minimizing-movement step: argmin over ρ of d(ρ,ρ0)^2 / 2h + E(ρ),
/// solved by damped Newton in quantile coordinates. Interval topology.
GridMeasure jko_step(const GridMeasure& rho0, double h, const EnergySpec& spec,
                     std::size_t m_quantiles = 0);
StepResult jko_step_detailed(const GridMeasure& rho0, double h, const EnergySpec& spec,
                             std::size_t m_quantiles = 0);

/// Iterated steps; slice k sits at time k h.
MeasurePath jko_flow(const GridMeasure& rho0, double h, std::size_t steps,
                     const EnergySpec& spec, std::size_t m_quantiles = 0);

/// Two-stage diffusion-with-decay step: transported-and-diffused measure from
/// the free-energy movement step, then the cellwise optimal survivor/decayed
/// split under weights log e^{-λh} and log(1 - e^{-λh}).
/// Returns (surviving ρ, newly decayed ρ_ND).
std::pair<GridMeasure, GridMeasure> decay_step(const GridMeasure& rho_prev, double h,
                                               const GridFn& psi, double lambda,
                                               std::size_t m_quantiles = 0);

} // namespace jko
} // namespace gradflow

#endif
