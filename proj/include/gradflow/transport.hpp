#ifndef GRADFLOW_TRANSPORT_HPP
#define GRADFLOW_TRANSPORT_HPP

#include <vector>

#include "gradflow/measures.hpp"
#include "gradflow/path.hpp"

namespace gradflow {

/// Mobility D(ρ) evaluated at cell faces. The torus has n faces (face i sits
/// between cells i and i+1 mod n); the interval has n-1 interior faces, the
/// boundary faces carry no flux.
struct MobilityField {
    Grid grid;
    std::vector<double> face_values;

    MobilityField(Grid g, std::vector<double> faces);

    static std::size_t face_count(const Grid& g) {
        return g.topology == Topology::torus ? g.n_cells : g.n_cells - 1;
    }
    /// Arithmetic face average of cellwise mobility values.
    static MobilityField from_cell_values(const Grid& g, const std::vector<double>& cells);
    static MobilityField constant(const Grid& g, double value);
};

/// Discrete atoms (positions with masses); the exact semantics behind the LP
/// oracle and the empirical-cloud identities.
struct AtomicMeasure {
    std::vector<double> positions;
    std::vector<double> masses;

    static AtomicMeasure from_cells(const GridMeasure& m); // atoms at cell centers
    double total_mass() const;
};

namespace transport {

/// d(ρ0,ρ1)^2 via exact quantile-function integration of the cellwise-constant
/// densities. Torus grids minimise the interval cost over the n cell-boundary
/// cut points.
double wasserstein_quantile(const GridMeasure& rho0, const GridMeasure& rho1);

/// Same quantile computation for purely atomic measures (step CDFs).
double wasserstein_quantile(const AtomicMeasure& a, const AtomicMeasure& b,
                            Topology topology = Topology::interval,
                            double domain_length = 1.0);

/// Exact LP value of min Σ q_ij |x_i-y_j|^2 over couplings, solved by
/// successive-shortest-path min-cost flow. Cross-validation oracle for small
/// supports; reads grid measures as atoms at cell centers.
double wasserstein_lp(const GridMeasure& rho0, const GridMeasure& rho1);
double wasserstein_lp(const AtomicMeasure& a, const AtomicMeasure& b);

/// (1/n) min_σ Σ |x_i - y_σ(i)|^2; monotone coupling after sorting.
double assignment_cost(const ParticleCloud& x, const ParticleCloud& y);

/// ||s||^2_{D,*}: solve div(D grad p) = s and return Σ_faces D (Δp/dx)^2 dx.
double dual_norm_sq(const GridFn& s, const MobilityField& D);

/// ||ξ||^2_D = Σ_faces D ((ξ_{i+1}-ξ_i)/dx)^2 dx.
double primal_norm_sq(const GridFn& xi, const MobilityField& D);

/// Solve div(D grad p) = s with mean-zero gauge (periodic or no-flux).
GridFn elliptic_solve(const GridFn& s, const MobilityField& D);

/// Cross inner product (s1, s2)_{D,*} = Σ_faces D (grad p1)(grad p2) dx.
double dual_inner(const GridFn& s1, const GridFn& s2, const MobilityField& D);

/// Discrete Benamou-Brenier action Σ_k ||(ρ_{k+1}-ρ_k)/Δt||^2_{ρ_{k+1/2},*} Δt
/// with midpoint mobility D = ρ.
double bb_action(const MeasurePath& path);

/// Displacement interpolation ρ_t between two interval measures (quantile
/// blend, exact deposit back onto the grid).
GridMeasure displacement_interpolation(const GridMeasure& rho0, const GridMeasure& rho1,
                                       double t);

/// The quantile geodesic sampled on K+1 uniform times in [0,1].
MeasurePath geodesic_path(const GridMeasure& rho0, const GridMeasure& rho1, std::size_t K);

} // namespace transport
} // namespace gradflow

#endif
