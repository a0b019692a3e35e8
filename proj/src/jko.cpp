#include "gradflow/jko.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gradflow/transport.hpp"

namespace gradflow {

QuantileDensity::QuantileDensity(std::vector<double> positions, double total_mass,
                                 double domain_length)
    : positions_(std::move(positions)), total_mass_(total_mass), domain_length_(domain_length) {
    if (positions_.empty()) throw std::invalid_argument("quantile density needs points");
    if (!(total_mass_ > 0.0)) throw std::invalid_argument("total mass must be positive");
    for (std::size_t j = 0; j + 1 < positions_.size(); ++j)
        if (!(positions_[j] < positions_[j + 1]))
            throw std::invalid_argument("quantile positions must be strictly increasing");
    if (positions_.front() < 0.0 || positions_.back() > domain_length_)
        throw std::invalid_argument("quantile positions outside the domain");
}

QuantileDensity QuantileDensity::from_measure(const GridMeasure& rho, std::size_t m) {
    const Grid& g = rho.grid();
    if (g.topology != Topology::interval)
        throw std::invalid_argument("quantile parametrization needs interval topology");
    const double M = rho.total_mass();
    if (!(M > 0.0)) throw std::invalid_argument("empty measure");
    const double dx = g.dx();
    std::vector<double> X(m);
    double acc = 0.0;
    std::size_t cell = 0;
    for (std::size_t j = 0; j < m; ++j) {
        const double level = (static_cast<double>(j) + 0.5) * M / static_cast<double>(m);
        while (cell < g.n_cells && acc + rho.weight(cell) < level) {
            acc += rho.weight(cell);
            ++cell;
        }
        if (cell >= g.n_cells) {
            X[j] = g.domain_length;
            continue;
        }
        const double w = rho.weight(cell);
        const double frac = w > 0.0 ? (level - acc) / w : 0.5;
        X[j] = g.cell_left(cell) + frac * dx;
    }
    // Nudge ties apart (flat CDF stretches) so positions stay strictly ordered.
    for (std::size_t j = 1; j < m; ++j)
        if (X[j] <= X[j - 1]) X[j] = X[j - 1] + 1e-14 * g.domain_length;
    return QuantileDensity(std::move(X), M, g.domain_length);
}

GridMeasure QuantileDensity::to_measure(const Grid& grid) const {
    if (grid.topology != Topology::interval)
        throw std::invalid_argument("quantile parametrization needs interval topology");
    const std::size_t m = positions_.size();
    const double w = total_mass_ / static_cast<double>(m);
    const double dx = grid.dx();
    std::vector<double> out(grid.n_cells, 0.0);
    auto deposit = [&](double lo, double hi, double mass) {
        lo = std::clamp(lo, 0.0, grid.domain_length);
        hi = std::clamp(hi, 0.0, grid.domain_length);
        if (hi - lo < 1e-300) {
            auto idx = static_cast<std::size_t>(
                std::min(lo / dx, static_cast<double>(grid.n_cells) - 0.5));
            out[idx] += mass;
            return;
        }
        const double density = mass / (hi - lo);
        auto i0 = static_cast<std::size_t>(lo / dx);
        for (std::size_t i = i0; i < grid.n_cells; ++i) {
            const double a = std::max(lo, grid.cell_left(i));
            const double b = std::min(hi, grid.cell_left(i) + dx);
            if (b > a) out[i] += density * (b - a);
            if (grid.cell_left(i) + dx >= hi) break;
        }
    };
    if (m == 1) {
        deposit(positions_[0] - dx / 2, positions_[0] + dx / 2, total_mass_);
        return GridMeasure(grid, std::move(out));
    }
    for (std::size_t j = 0; j < m; ++j) {
        const double lo = j == 0 ? positions_[0] - 0.5 * (positions_[1] - positions_[0])
                                 : 0.5 * (positions_[j - 1] + positions_[j]);
        const double hi = j == m - 1
                              ? positions_[m - 1] + 0.5 * (positions_[m - 1] - positions_[m - 2])
                              : 0.5 * (positions_[j] + positions_[j + 1]);
        deposit(lo, hi, w);
    }
    return GridMeasure(grid, std::move(out));
}

namespace jko {
namespace {

// Piecewise-linear evaluation of a grid function through cell-center samples,
// constant beyond the first/last center.
struct Interpolant {
    const Grid* grid = nullptr;
    const GridFn* values = nullptr;

    double value(double x) const {
        const std::size_t n = grid->n_cells;
        const double dx = grid->dx();
        const double s = x / dx - 0.5;
        if (s <= 0.0) return (*values)[0];
        if (s >= static_cast<double>(n - 1)) return (*values)[n - 1];
        const auto i = static_cast<std::size_t>(s);
        const double t = s - static_cast<double>(i);
        return (1.0 - t) * (*values)[i] + t * (*values)[i + 1];
    }
    double slope(double x) const {
        const std::size_t n = grid->n_cells;
        const double dx = grid->dx();
        const double s = x / dx - 0.5;
        if (s <= 0.0 || s >= static_cast<double>(n - 1)) return 0.0;
        const auto i = static_cast<std::size_t>(s);
        return ((*values)[i + 1] - (*values)[i]) / dx;
    }
};

// SPD pentadiagonal LDL^T solve (bandwidth 2).
std::vector<double> solve_banded_spd(std::vector<double> diag, std::vector<double> off1,
                                     std::vector<double> off2, std::vector<double> rhs) {
    const std::size_t m = diag.size();
    std::vector<double> d(m), l1(m, 0.0), l2(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double dv = diag[i];
        if (i >= 1) dv -= l1[i - 1] * l1[i - 1] * d[i - 1];
        if (i >= 2) dv -= l2[i - 2] * l2[i - 2] * d[i - 2];
        if (!(dv > 0.0)) throw std::runtime_error("banded factorization lost definiteness");
        d[i] = dv;
        if (i + 1 < m) {
            double t = off1[i];
            if (i >= 1) t -= l2[i - 1] * l1[i - 1] * d[i - 1];
            l1[i] = t / dv;
        }
        if (i + 2 < m) l2[i] = off2[i] / dv;
    }
    std::vector<double>& z = rhs;
    for (std::size_t i = 0; i < m; ++i) {
        if (i >= 1) z[i] -= l1[i - 1] * z[i - 1];
        if (i >= 2) z[i] -= l2[i - 2] * z[i - 2];
    }
    for (std::size_t i = 0; i < m; ++i) z[i] /= d[i];
    for (std::size_t i = m; i-- > 0;) {
        if (i + 1 < m) z[i] -= l1[i] * z[i + 1];
        if (i + 2 < m) z[i] -= l2[i] * z[i + 2];
    }
    return z;
}

// The movement-step objective in quantile coordinates:
//   (1/2h) (M/m) Σ (X_j - Y_j)^2 + E_q(X)
// with the entropy read from the midpoint-interval lengths (ends pinned to
// the domain boundary, which keeps the uniform measure an exact fixed point)
// and potentials sampled at the quantile points.
class QuantileObjective {
  public:
    QuantileObjective(const std::vector<double>& Y, double h, double mass, double L,
                      const EnergySpec& spec, const Grid& grid)
        : Y_(Y), h_(h), mass_(mass), L_(L), spec_(spec), grid_(grid) {
        m_ = Y.size();
        wm_ = mass_ / static_cast<double>(m_);
        if (spec_.kind == EnergySpec::Kind::free_energy) {
            psi_ = Interpolant{&grid_, &spec_.background};
            with_psi_ = true;
            with_phi_ = spec_.has_interaction();
            if (with_phi_) phi_ = Interpolant{&grid_, &spec_.interaction};
        }
    }

    std::size_t dim() const { return m_; }

    // Interval lengths around each quantile point, ends pinned to [0, L].
    void lengths(const std::vector<double>& X, std::vector<double>& ell) const {
        ell.resize(m_);
        if (m_ == 1) {
            ell[0] = L_;
            return;
        }
        ell[0] = 0.5 * (X[0] + X[1]);
        for (std::size_t j = 1; j + 1 < m_; ++j) ell[j] = 0.5 * (X[j + 1] - X[j - 1]);
        ell[m_ - 1] = L_ - 0.5 * (X[m_ - 2] + X[m_ - 1]);
    }

    bool feasible(const std::vector<double>& X) const {
        if (X.front() < 0.0 || X.back() > L_) return false;
        for (std::size_t j = 0; j + 1 < m_; ++j)
            if (!(X[j] < X[j + 1])) return false;
        std::vector<double> ell;
        lengths(X, ell);
        for (double l : ell)
            if (!(l > 0.0)) return false;
        return true;
    }

    double energy(const std::vector<double>& X) const {
        std::vector<double> ell;
        lengths(X, ell);
        double ent = 0.0;
        for (double l : ell) ent += wm_ * std::log(wm_ / l);
        double pot = 0.0;
        if (with_psi_)
            for (double x : X) pot += wm_ * psi_.value(x);
        if (with_phi_) {
            double inter = 0.0;
            for (std::size_t j = 0; j < m_; ++j)
                for (std::size_t k = 0; k < m_; ++k) inter += phi_even(X[j] - X[k]);
            pot += 0.5 * wm_ * wm_ * inter;
        }
        return ent + pot / spec_.kT;
    }

    double value(const std::vector<double>& X) const {
        double dist = 0.0;
        for (std::size_t j = 0; j < m_; ++j) {
            const double d = X[j] - Y_[j];
            dist += d * d;
        }
        return 0.5 * wm_ * dist / h_ + energy(X);
    }

    // Gradient and SPD banded Hessian model (distance + entropy curvature).
    void derivatives(const std::vector<double>& X, std::vector<double>& grad,
                     std::vector<double>& hd, std::vector<double>& h1,
                     std::vector<double>& h2) const {
        grad.assign(m_, 0.0);
        hd.assign(m_, wm_ / h_);
        h1.assign(m_, 0.0);
        h2.assign(m_, 0.0);
        for (std::size_t j = 0; j < m_; ++j) grad[j] = wm_ * (X[j] - Y_[j]) / h_;

        std::vector<double> ell;
        lengths(X, ell);
        // entropy term -w Σ log ell_j: interval j couples the coordinates in
        // its endpoints with coefficient ±1/2
        auto add_pair = [&](std::size_t a, double ca, std::size_t b, double cb, double l) {
            const double gl = -wm_ / l;
            const double hl = wm_ / (l * l);
            grad[a] += gl * ca;
            hd[a] += hl * ca * ca;
            if (a != b) {
                grad[b] += gl * cb;
                hd[b] += hl * cb * cb;
                const std::size_t lo = std::min(a, b), hi = std::max(a, b);
                if (hi - lo == 1)
                    h1[lo] += hl * ca * cb;
                else
                    h2[lo] += hl * ca * cb;
            }
        };
        if (m_ > 1) {
            add_pair(0, 0.5, 1, 0.5, ell[0]);
            for (std::size_t j = 1; j + 1 < m_; ++j)
                add_pair(j - 1, -0.5, j + 1, 0.5, ell[j]);
            add_pair(m_ - 2, -0.5, m_ - 1, -0.5, ell[m_ - 1]);
        }
        if (with_psi_)
            for (std::size_t j = 0; j < m_; ++j) grad[j] += wm_ * psi_.slope(X[j]) / spec_.kT;
        if (with_phi_) {
            for (std::size_t j = 0; j < m_; ++j) {
                double force = 0.0;
                for (std::size_t k = 0; k < m_; ++k) force += phi_even_slope(X[j] - X[k]);
                grad[j] += wm_ * wm_ * force / spec_.kT;
            }
        }
    }

  private:
    double phi_even(double d) const { return phi_.value(std::abs(d)); }
    double phi_even_slope(double d) const {
        const double s = phi_.slope(std::abs(d));
        return d >= 0.0 ? s : -s;
    }

    const std::vector<double>& Y_;
    double h_;
    double mass_;
    double L_;
    const EnergySpec& spec_;
    const Grid& grid_;
    std::size_t m_ = 0;
    double wm_ = 0.0;
    Interpolant psi_{}, phi_{};
    bool with_psi_ = false, with_phi_ = false;
};

StepResult movement_step(const GridMeasure& rho0, double h, const EnergySpec& spec,
                         std::size_t m_quantiles) {
    if (!(h > 0.0)) throw std::invalid_argument("h must be positive");
    if (spec.kind == EnergySpec::Kind::mixing_entropy)
        throw std::invalid_argument("movement step drives entropy or free energy");
    const Grid& g = rho0.grid();
    if (g.topology != Topology::interval)
        throw std::invalid_argument("quantile JKO needs interval topology");
    const std::size_t m = m_quantiles == 0 ? g.n_cells : m_quantiles;

    const QuantileDensity q0 = QuantileDensity::from_measure(rho0, m);
    const std::vector<double>& Y = q0.positions();
    QuantileObjective obj(Y, h, q0.total_mass(), g.domain_length, spec, g);

    std::vector<double> X = Y;
    const double f0 = obj.value(X);
    double fX = f0;
    std::vector<double> grad, hd, h1, h2;
    std::size_t iter = 0;
    const std::size_t max_iter = 200;
    for (; iter < max_iter; ++iter) {
        obj.derivatives(X, grad, hd, h1, h2);
        std::vector<double> step;
        double ridge = 0.0;
        for (;;) {
            try {
                std::vector<double> d = hd;
                if (ridge > 0.0)
                    for (double& v : d) v += ridge;
                step = solve_banded_spd(d, h1, h2, grad);
                break;
            } catch (const std::runtime_error&) {
                ridge = ridge == 0.0 ? 1e-10 : ridge * 100.0;
                if (ridge > 1e6) throw;
            }
        }
        double decrement = 0.0;
        for (std::size_t j = 0; j < step.size(); ++j) decrement += grad[j] * step[j];
        if (decrement <= 1e-20) break; // Newton decrement^2 at tolerance

        // Fraction-to-boundary then Armijo backtracking.
        double alpha = 1.0;
        std::vector<double> trial(X.size());
        auto move = [&](double a) {
            for (std::size_t j = 0; j < X.size(); ++j) trial[j] = X[j] - a * step[j];
        };
        move(alpha);
        while (!obj.feasible(trial)) {
            alpha *= 0.5;
            if (alpha < 1e-14)
                throw std::runtime_error("step too aggressive; reduce h or refine");
            move(alpha);
        }
        double ft = obj.value(trial);
        while (ft > fX - 1e-4 * alpha * decrement) {
            alpha *= 0.5;
            if (alpha < 1e-14)
                throw std::runtime_error("step too aggressive; reduce h or refine");
            move(alpha);
            ft = obj.value(trial);
        }
        X = trial;
        fX = ft;
    }
    if (iter >= max_iter)
        throw std::runtime_error("movement step did not converge in 200 Newton iterations");

    QuantileDensity q1(X, q0.total_mass(), g.domain_length);
    double dist = 0.0;
    for (std::size_t j = 0; j < X.size(); ++j) {
        const double d = X[j] - Y[j];
        dist += d * d;
    }
    dist *= q0.total_mass() / static_cast<double>(m);
    return StepResult{q1.to_measure(g), q1,    f0,  fX,
                      dist,             obj.energy(Y), obj.energy(X), iter};
}

} // namespace

double k_h_value(const GridMeasure& rho1, const GridMeasure& rho0, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("h must be positive");
    require_same_grid(rho1.grid(), rho0.grid());
    if (!rho1.is_probability(1e-10) || !rho0.is_probability(1e-10))
        throw std::invalid_argument("k_h_value takes probability measures");
    const double d2 = transport::wasserstein_quantile(rho0, rho1);
    return d2 / (4.0 * h) + 0.5 * measures::boltzmann_entropy(rho1) -
           0.5 * measures::boltzmann_entropy(rho0);
}

GridMeasure jko_step(const GridMeasure& rho0, double h, const EnergySpec& spec,
                     std::size_t m_quantiles) {
    return movement_step(rho0, h, spec, m_quantiles).measure;
}

StepResult jko_step_detailed(const GridMeasure& rho0, double h, const EnergySpec& spec,
                             std::size_t m_quantiles) {
    return movement_step(rho0, h, spec, m_quantiles);
}

MeasurePath jko_flow(const GridMeasure& rho0, double h, std::size_t steps,
                     const EnergySpec& spec, std::size_t m_quantiles) {
    std::vector<GridMeasure> slices;
    slices.reserve(steps + 1);
    slices.push_back(rho0);
    GridMeasure current = rho0;
    for (std::size_t k = 0; k < steps; ++k) {
        current = jko_step(current, h, spec, m_quantiles);
        slices.push_back(current);
    }
    return MeasurePath(0.0, h, std::move(slices));
}

std::pair<GridMeasure, GridMeasure> decay_step(const GridMeasure& rho_prev, double h,
                                               const GridFn& psi, double lambda,
                                               std::size_t m_quantiles) {
    const Grid& g = rho_prev.grid();
    if (psi.size() != g.n_cells) throw std::invalid_argument("grid mismatch");
    if (rho_prev.total_mass() > 1.0 + 1e-12)
        throw std::invalid_argument("decay step takes total mass <= 1");
    const double survive = std::exp(-lambda * h);
    if (lambda > 0.0 && 1.0 - survive >= 1.0)
        throw std::runtime_error("decay step too large");

    const EnergySpec spec = EnergySpec::free_energy(g, psi, {}, 1.0);
    const GridMeasure transported = jko_step(rho_prev, h, spec, m_quantiles);

    if (lambda == 0.0) {
        return {transported, GridMeasure(g, std::vector<double>(g.n_cells, 0.0))};
    }

    // Cellwise split of the transported mass: minimize
    //   r log(r/w) + (w-r) log((w-r)/w) - r log p - (w-r) log(1-p)
    // over r in [0,w]; bisection on the derivative log(r/(w-r)) - log(p/(1-p)).
    const double logit_p = std::log(survive) - std::log1p(-survive);
    std::vector<double> surv(g.n_cells, 0.0), dec(g.n_cells, 0.0);
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        const double w = transported.weight(i);
        if (w <= 0.0) continue;
        double lo = 0.0, hi = w;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * w; ++it) {
            const double r = 0.5 * (lo + hi);
            const double d = std::log(r / (w - r)) - logit_p;
            (d > 0.0 ? hi : lo) = r;
        }
        surv[i] = 0.5 * (lo + hi);
        dec[i] = w - surv[i];
    }
    return {GridMeasure(g, std::move(surv)), GridMeasure(g, std::move(dec))};
}

} // namespace jko
} // namespace gradflow
