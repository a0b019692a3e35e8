#include "gradflow/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gradflow {

namespace {

double xlogx(double x) {
    if (x <= 0.0) return 0.0; // 0 log 0 = 0 by convention
    return x * std::log(x);
}

} // namespace

GridMeasure::GridMeasure(Grid grid, std::vector<double> weights)
    : grid_(grid), weights_(std::move(weights)) {
    if (weights_.size() != grid_.n_cells)
        throw std::invalid_argument("weight vector does not match grid");
    for (double& w : weights_) {
        if (w < 0.0) {
            if (w < -1e-12) throw std::invalid_argument("negative weight");
            w = 0.0; // roundoff from upstream solvers
        }
    }
}

GridMeasure GridMeasure::uniform_probability(const Grid& grid) {
    std::vector<double> w(grid.n_cells, 1.0 / static_cast<double>(grid.n_cells));
    return GridMeasure(grid, std::move(w));
}

GridMeasure GridMeasure::from_density(const Grid& grid, const std::vector<double>& density) {
    if (density.size() != grid.n_cells)
        throw std::invalid_argument("density vector does not match grid");
    std::vector<double> w(density.size());
    for (std::size_t i = 0; i < density.size(); ++i) w[i] = density[i] * grid.dx();
    return GridMeasure(grid, std::move(w));
}

double GridMeasure::total_mass() const {
    double s = 0.0, c = 0.0;
    for (double w : weights_) { // compensated: masses feed conservation checks
        double y = w - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

bool GridMeasure::is_probability(double tol) const {
    return std::abs(total_mass() - 1.0) <= tol;
}

std::vector<double> GridMeasure::densities() const {
    std::vector<double> f(weights_.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = weights_[i] / grid_.dx();
    return f;
}

OccupationProfile::OccupationProfile(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.n_cells)
        throw std::invalid_argument("value vector does not match grid");
    for (double v : values_)
        if (v < -1e-12 || v > 1.0 + 1e-12)
            throw std::invalid_argument("occupation value outside [0,1]");
    for (double& v : values_) v = std::clamp(v, 0.0, 1.0);
}

GridMeasure OccupationProfile::as_measure() const {
    std::vector<double> w(values_.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = values_[i] * grid_.dx();
    return GridMeasure(grid_, std::move(w));
}

EnergySpec EnergySpec::entropy() { return EnergySpec{Kind::entropy, {}, {}, 1.0}; }

EnergySpec EnergySpec::mixing_entropy() { return EnergySpec{Kind::mixing_entropy, {}, {}, 1.0}; }

EnergySpec EnergySpec::free_energy(const Grid& grid, GridFn psi, GridFn phi, double kT) {
    if (psi.empty()) psi.assign(grid.n_cells, 0.0);
    if (phi.empty()) phi.assign(grid.n_cells, 0.0);
    if (psi.size() != grid.n_cells || phi.size() != grid.n_cells)
        throw std::invalid_argument("grid mismatch");
    if (!(kT > 0.0)) throw std::invalid_argument("kT must be positive");
    if (!measures::is_even_kernel(phi))
        throw std::invalid_argument("interaction kernel must be even");
    return EnergySpec{Kind::free_energy, std::move(psi), std::move(phi), kT};
}

bool EnergySpec::has_interaction() const {
    for (double v : interaction)
        if (v != 0.0) return true;
    return false;
}

namespace measures {

bool is_even_kernel(const GridFn& phi, double tol) {
    const std::size_t n = phi.size();
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(phi[i] - phi[n - 1 - i]) > tol) return false;
    return true;
}

GridMeasure empirical_measure(const ParticleCloud& cloud, const Grid& grid) {
    if (cloud.positions.empty()) throw std::invalid_argument("empty cloud");
    const double dx = grid.dx();
    const double L = grid.domain_length;
    std::vector<double> counts(grid.n_cells, 0.0);
    for (double x : cloud.positions) {
        if (x < 0.0 || x > L || (grid.topology == Topology::torus && x == L))
            throw std::invalid_argument("out of domain");
        auto idx = static_cast<std::size_t>(x / dx);
        if (idx >= grid.n_cells) idx = grid.n_cells - 1; // x == L on the interval
        counts[idx] += 1.0;
    }
    const double n = static_cast<double>(cloud.positions.size());
    for (double& c : counts) c /= n;
    return GridMeasure(grid, std::move(counts));
}

double relative_entropy(const GridMeasure& rho, const GridMeasure& mu) {
    require_same_grid(rho.grid(), mu.grid());
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const double r = rho.weight(i), m = mu.weight(i);
        if (r <= 0.0) continue;
        if (m <= 0.0) return kInf;
        s += r * std::log(r / m);
    }
    return s;
}

double boltzmann_entropy(const GridMeasure& rho) {
    const double dx = rho.grid().dx();
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) s += xlogx(rho.density(i)) * dx;
    return s;
}

double mixing_entropy(const OccupationProfile& rho) {
    const double dx = rho.grid().dx();
    double s = 0.0;
    for (double v : rho.values()) s += (xlogx(v) + xlogx(1.0 - v)) * dx;
    return s;
}

GridFn convolve(const GridMeasure& rho, const GridFn& phi) {
    const Grid& grid = rho.grid();
    const std::size_t n = grid.n_cells;
    if (phi.size() != n) throw std::invalid_argument("grid mismatch");
    GridFn out(n, 0.0);
    // Kernel read as the piecewise-constant function it samples: the mass of
    // cell j seen from center i averages the two kernel cells the displacement
    // interval straddles.
    if (grid.topology == Topology::torus) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const std::size_t d = (i + n - j) % n;
                const std::size_t dm = (d + n - 1) % n;
                acc += rho.weight(j) * 0.5 * (phi[dm] + phi[d]);
            }
            out[i] = acc;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const std::size_t d = i >= j ? i - j : j - i;
                const double left = d == 0 ? phi[0] : phi[d - 1]; // even reflection at 0
                acc += rho.weight(j) * 0.5 * (left + phi[d]);
            }
            out[i] = acc;
        }
    }
    return out;
}

double free_energy(const GridMeasure& rho, const EnergySpec& spec) {
    if (spec.kind != EnergySpec::Kind::free_energy)
        throw std::invalid_argument("spec is not a free energy");
    const std::size_t n = rho.size();
    if (spec.background.size() != n || spec.interaction.size() != n)
        throw std::invalid_argument("grid mismatch");
    double pot = 0.0;
    for (std::size_t i = 0; i < n; ++i) pot += rho.weight(i) * spec.background[i];
    if (spec.has_interaction()) {
        const GridFn conv = convolve(rho, spec.interaction);
        for (std::size_t i = 0; i < n; ++i) pot += 0.5 * rho.weight(i) * conv[i];
    }
    return boltzmann_entropy(rho) + pot / spec.kT;
}

double energy_value(const GridMeasure& rho, const EnergySpec& spec) {
    switch (spec.kind) {
        case EnergySpec::Kind::entropy:
            return boltzmann_entropy(rho);
        case EnergySpec::Kind::mixing_entropy:
            return mixing_entropy(OccupationProfile(rho.grid(), rho.densities()));
        case EnergySpec::Kind::free_energy:
            return free_energy(rho, spec);
    }
    throw std::logic_error("unreachable");
}

GridFn variational_derivative(const EnergySpec& spec, const GridMeasure& rho) {
    const std::size_t n = rho.size();
    GridFn g(n, 0.0);
    switch (spec.kind) {
        case EnergySpec::Kind::entropy: {
            for (std::size_t i = 0; i < n; ++i) {
                const double f = rho.density(i);
                if (f <= 0.0)
                    throw std::domain_error("entropy derivative undefined at vacuum");
                g[i] = std::log(f) + 1.0;
            }
            return g;
        }
        case EnergySpec::Kind::mixing_entropy: {
            return variational_derivative(spec, OccupationProfile(rho.grid(), rho.densities()));
        }
        case EnergySpec::Kind::free_energy: {
            if (spec.background.size() != n) throw std::invalid_argument("grid mismatch");
            GridFn conv;
            if (spec.has_interaction()) conv = convolve(rho, spec.interaction);
            for (std::size_t i = 0; i < n; ++i) {
                const double f = rho.density(i);
                if (f <= 0.0)
                    throw std::domain_error("entropy derivative undefined at vacuum");
                double pot = spec.background[i];
                if (!conv.empty()) pot += conv[i];
                g[i] = std::log(f) + 1.0 + pot / spec.kT;
            }
            return g;
        }
    }
    throw std::logic_error("unreachable");
}

GridFn variational_derivative(const EnergySpec& spec, const OccupationProfile& rho) {
    if (spec.kind != EnergySpec::Kind::mixing_entropy)
        throw std::invalid_argument("occupation profiles take the mixing entropy");
    GridFn g(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const double v = rho.values()[i];
        if (v <= 0.0 || v >= 1.0)
            throw std::domain_error("mixing entropy derivative undefined at 0 or 1");
        g[i] = std::log(v / (1.0 - v));
    }
    return g;
}

} // namespace measures
} // namespace gradflow
