#include "gradflow/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "gradflow/tridiag.hpp"

namespace gradflow {

MobilityField::MobilityField(Grid g, std::vector<double> faces)
    : grid(g), face_values(std::move(faces)) {
    if (face_values.size() != face_count(grid))
        throw std::invalid_argument("face vector does not match grid");
    for (double v : face_values)
        if (v < 0.0) throw std::invalid_argument("mobility must be nonnegative");
}

MobilityField MobilityField::from_cell_values(const Grid& g, const std::vector<double>& cells) {
    if (cells.size() != g.n_cells) throw std::invalid_argument("grid mismatch");
    const std::size_t nf = face_count(g);
    std::vector<double> faces(nf);
    for (std::size_t k = 0; k < nf; ++k) {
        const std::size_t right = (k + 1) % g.n_cells;
        faces[k] = 0.5 * (cells[k] + cells[right]);
    }
    return MobilityField(g, std::move(faces));
}

MobilityField MobilityField::constant(const Grid& g, double value) {
    return MobilityField(g, std::vector<double>(face_count(g), value));
}

AtomicMeasure AtomicMeasure::from_cells(const GridMeasure& m) {
    AtomicMeasure a;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m.weight(i) > 0.0) {
            a.positions.push_back(m.grid().cell_center(i));
            a.masses.push_back(m.weight(i));
        }
    }
    return a;
}

double AtomicMeasure::total_mass() const {
    return std::accumulate(masses.begin(), masses.end(), 0.0);
}

namespace transport {
namespace {

constexpr double kMassTol = 1e-10;

// One quantile segment: `mass` of measure spread linearly from x0 to x1
// (x0 == x1 for an atom).
struct Seg {
    double mass;
    double x0;
    double x1;
};

double seg_slope(const Seg& s) { return s.mass > 0.0 ? (s.x1 - s.x0) / s.mass : 0.0; }

// Exact ∫ (Q0 - Q1)^2 du over the common mass axis; both quantile functions
// are piecewise linear over their segments.
double quantile_gap_sq(const std::vector<Seg>& a, const std::vector<Seg>& b) {
    double total = 0.0;
    std::size_t ia = 0, ib = 0;
    double ua = 0.0, ub = 0.0; // mass consumed inside current segments
    while (ia < a.size() && ib < b.size()) {
        const Seg& sa = a[ia];
        const Seg& sb = b[ib];
        const double rem = std::min(sa.mass - ua, sb.mass - ub);
        if (rem > 0.0) {
            const double qa = sa.x0 + seg_slope(sa) * ua;
            const double qb = sb.x0 + seg_slope(sb) * ub;
            const double A = qa - qb;
            const double B = seg_slope(sa) - seg_slope(sb);
            // ∫_0^rem (A + B u)^2 du
            total += rem * (A * A + A * B * rem + B * B * rem * rem / 3.0);
        }
        ua += rem;
        ub += rem;
        if (sa.mass - ua <= 0.0) { ++ia; ua = 0.0; }
        if (sb.mass - ub <= 0.0) { ++ib; ub = 0.0; }
    }
    return total;
}

// Spread segments of a grid measure, optionally unrolled at cut cell `cut`
// (torus): cell j maps to coordinate ((j - cut) mod n) * dx.
std::vector<Seg> spread_segments(const GridMeasure& m, std::size_t cut) {
    const Grid& g = m.grid();
    const double dx = g.dx();
    std::vector<Seg> segs;
    segs.reserve(m.size());
    for (std::size_t r = 0; r < m.size(); ++r) {
        const std::size_t j = (r + cut) % g.n_cells;
        if (m.weight(j) > 0.0) {
            const double left = static_cast<double>(r) * dx;
            segs.push_back({m.weight(j), left, left + dx});
        }
    }
    return segs;
}

std::vector<Seg> atom_segments(const AtomicMeasure& m) {
    std::vector<std::size_t> order(m.positions.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return m.positions[i] < m.positions[j]; });
    std::vector<Seg> segs;
    segs.reserve(order.size());
    for (std::size_t i : order)
        if (m.masses[i] > 0.0) segs.push_back({m.masses[i], m.positions[i], m.positions[i]});
    return segs;
}

void check_balanced(double ma, double mb) {
    if (ma <= 0.0 || mb <= 0.0) throw std::invalid_argument("empty measure");
    if (std::abs(ma - mb) > kMassTol) throw std::invalid_argument("unbalanced");
}

} // namespace

double wasserstein_quantile(const GridMeasure& rho0, const GridMeasure& rho1) {
    require_same_grid(rho0.grid(), rho1.grid());
    check_balanced(rho0.total_mass(), rho1.total_mass());
    const Grid& g = rho0.grid();
    if (g.topology == Topology::interval)
        return quantile_gap_sq(spread_segments(rho0, 0), spread_segments(rho1, 0));
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t cut = 0; cut < g.n_cells; ++cut) {
        const double d2 = quantile_gap_sq(spread_segments(rho0, cut), spread_segments(rho1, cut));
        best = std::min(best, d2);
    }
    return best;
}

double wasserstein_quantile(const AtomicMeasure& a, const AtomicMeasure& b,
                            Topology topology, double domain_length) {
    check_balanced(a.total_mass(), b.total_mass());
    if (topology == Topology::interval)
        return quantile_gap_sq(atom_segments(a), atom_segments(b));
    // Torus: unroll at candidate cuts taken from the combined support.
    std::vector<double> cuts = a.positions;
    cuts.insert(cuts.end(), b.positions.begin(), b.positions.end());
    double best = std::numeric_limits<double>::infinity();
    for (double c : cuts) {
        auto unroll = [&](const AtomicMeasure& m) {
            AtomicMeasure u = m;
            for (double& x : u.positions) {
                x -= c;
                if (x < 0.0) x += domain_length;
            }
            return u;
        };
        const AtomicMeasure ua = unroll(a), ub = unroll(b);
        best = std::min(best, quantile_gap_sq(atom_segments(ua), atom_segments(ub)));
    }
    return best;
}

double wasserstein_lp(const AtomicMeasure& a, const AtomicMeasure& b) {
    const std::size_t ns = a.positions.size(), nt = b.positions.size();
    if (ns + nt > 64) throw std::invalid_argument("LP oracle limited to small supports");
    const double ma = a.total_mass(), mb = b.total_mass();
    check_balanced(ma, mb);

    // Successive shortest augmenting paths with node potentials on the
    // bipartite residual network (uncapacitated forward arcs, backward arcs
    // carry current flow).
    std::vector<double> supply = a.masses, demand = b.masses;
    const double scale = ma / mb;
    for (double& d : demand) d *= scale; // kill the <=1e-10 imbalance exactly
    std::vector<std::vector<double>> cost(ns, std::vector<double>(nt));
    std::vector<std::vector<double>> flow(ns, std::vector<double>(nt, 0.0));
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = 0; j < nt; ++j) {
            const double d = a.positions[i] - b.positions[j];
            cost[i][j] = d * d;
        }

    const std::size_t V = ns + nt;
    std::vector<double> phi(V, 0.0);
    const double inf = std::numeric_limits<double>::infinity();
    double shipped = 0.0;
    const double target = ma;

    while (target - shipped > 1e-13 * std::max(1.0, target)) {
        // Dijkstra over reduced costs from every source with remaining supply.
        std::vector<double> dist(V, inf);
        std::vector<int> prev(V, -1);
        std::vector<char> done(V, 0);
        for (std::size_t i = 0; i < ns; ++i)
            if (supply[i] > 1e-15) dist[i] = 0.0;
        for (;;) {
            std::size_t u = V;
            double du = inf;
            for (std::size_t v = 0; v < V; ++v)
                if (!done[v] && dist[v] < du) { du = dist[v]; u = v; }
            if (u == V) break;
            done[u] = 1;
            if (u < ns) {
                for (std::size_t j = 0; j < nt; ++j) {
                    const double rc = cost[u][j] + phi[u] - phi[ns + j];
                    if (dist[u] + rc < dist[ns + j] - 1e-18) {
                        dist[ns + j] = dist[u] + rc;
                        prev[ns + j] = static_cast<int>(u);
                    }
                }
            } else {
                const std::size_t j = u - ns;
                for (std::size_t i = 0; i < ns; ++i) {
                    if (flow[i][j] <= 0.0) continue;
                    const double rc = -cost[i][j] + phi[u] - phi[i];
                    if (dist[u] + rc < dist[i] - 1e-18) {
                        dist[i] = dist[u] + rc;
                        prev[i] = static_cast<int>(u);
                    }
                }
            }
        }
        // Nearest sink with unmet demand.
        std::size_t best = V;
        double bestd = inf;
        for (std::size_t j = 0; j < nt; ++j)
            if (demand[j] > 1e-15 && dist[ns + j] < bestd) { bestd = dist[ns + j]; best = ns + j; }
        if (best == V) throw std::runtime_error("transport LP: no augmenting path");

        // Bottleneck along the path.
        double delta = demand[best - ns];
        for (std::size_t v = best; prev[v] != -1;) {
            const auto u = static_cast<std::size_t>(prev[v]);
            if (u < ns && v >= ns) {
                // forward arc, uncapacitated
            } else {
                delta = std::min(delta, flow[v][u - ns]);
            }
            v = u;
        }
        {
            std::size_t v = best;
            while (prev[v] != -1) v = static_cast<std::size_t>(prev[v]);
            delta = std::min(delta, supply[v]);
        }
        // Augment.
        for (std::size_t v = best; prev[v] != -1;) {
            const auto u = static_cast<std::size_t>(prev[v]);
            if (u < ns && v >= ns)
                flow[u][v - ns] += delta;
            else
                flow[v][u - ns] -= delta;
            v = u;
        }
        {
            std::size_t v = best;
            while (prev[v] != -1) v = static_cast<std::size_t>(prev[v]);
            supply[v] -= delta;
        }
        demand[best - ns] -= delta;
        shipped += delta;
        for (std::size_t v = 0; v < V; ++v)
            if (dist[v] < inf) phi[v] += std::min(dist[v], bestd);
    }

    double value = 0.0;
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = 0; j < nt; ++j) value += flow[i][j] * cost[i][j];
    return value;
}

double wasserstein_lp(const GridMeasure& rho0, const GridMeasure& rho1) {
    require_same_grid(rho0.grid(), rho1.grid());
    return wasserstein_lp(AtomicMeasure::from_cells(rho0), AtomicMeasure::from_cells(rho1));
}

double assignment_cost(const ParticleCloud& x, const ParticleCloud& y) {
    if (x.size() != y.size()) throw std::invalid_argument("particle counts differ");
    if (x.size() == 0) throw std::invalid_argument("empty cloud");
    std::vector<double> xs = x.positions, ys = y.positions;
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double d = xs[i] - ys[i];
        s += d * d;
    }
    return s / static_cast<double>(xs.size());
}

GridFn elliptic_solve(const GridFn& s, const MobilityField& D) {
    const Grid& g = D.grid;
    const std::size_t n = g.n_cells;
    if (s.size() != n) throw std::invalid_argument("grid mismatch");
    for (double v : D.face_values)
        if (!(v > 0.0)) throw std::invalid_argument("mobility vanishes");
    const double dx = g.dx();

    // Remove the (tiny, pre-checked) mean so the pinned system is consistent.
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= static_cast<double>(n);

    if (n == 1) return GridFn{0.0};

    // Pin p_0 = 0 and solve rows 1..n-1; every wrap entry touches p_0, so the
    // reduced system is strictly tridiagonal for both topologies.
    const std::size_t m = n - 1;
    std::vector<double> lower(m, 0.0), diag(m, 0.0), upper(m, 0.0), rhs(m, 0.0);
    const double idx2 = 1.0 / (dx * dx);
    auto face = [&](std::size_t k) -> double { // face between cells k and k+1 (mod n)
        if (g.topology == Topology::torus) return D.face_values[k % n];
        return k < n - 1 ? D.face_values[k] : 0.0; // boundary: no flux
    };
    for (std::size_t row = 0; row < m; ++row) {
        const std::size_t i = row + 1;
        const double Dl = face(i - 1);
        const double Dr = face(i); // face(n-1) wraps to p_0 = 0 on the torus
        diag[row] = -(Dl + Dr) * idx2;
        if (row > 0) lower[row] = Dl * idx2;
        if (row + 1 < m) upper[row] = Dr * idx2;
        rhs[row] = s[i] - mean;
    }
    std::vector<double> sol = solve_tridiagonal(lower, diag, upper, rhs);

    GridFn p(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) p[i] = sol[i - 1];
    double pm = 0.0;
    for (double v : p) pm += v;
    pm /= static_cast<double>(n);
    for (double& v : p) v -= pm;
    return p;
}

double primal_norm_sq(const GridFn& xi, const MobilityField& D) {
    const Grid& g = D.grid;
    if (xi.size() != g.n_cells) throw std::invalid_argument("grid mismatch");
    const double dx = g.dx();
    double s = 0.0;
    for (std::size_t k = 0; k < D.face_values.size(); ++k) {
        const double grad = (xi[(k + 1) % g.n_cells] - xi[k]) / dx;
        s += D.face_values[k] * grad * grad * dx;
    }
    return s;
}

namespace {

void check_tangent(const GridFn& s, const Grid& g) {
    double sum = 0.0;
    for (double v : s) sum += v;
    if (std::abs(sum * g.dx()) > 1e-10) throw std::invalid_argument("not a tangent vector");
}

} // namespace

double dual_norm_sq(const GridFn& s, const MobilityField& D) {
    check_tangent(s, D.grid);
    const GridFn p = elliptic_solve(s, D);
    return primal_norm_sq(p, D);
}

double dual_inner(const GridFn& s1, const GridFn& s2, const MobilityField& D) {
    check_tangent(s1, D.grid);
    check_tangent(s2, D.grid);
    const GridFn p1 = elliptic_solve(s1, D);
    const GridFn p2 = elliptic_solve(s2, D);
    const Grid& g = D.grid;
    const double dx = g.dx();
    double s = 0.0;
    for (std::size_t k = 0; k < D.face_values.size(); ++k) {
        const std::size_t r = (k + 1) % g.n_cells;
        s += D.face_values[k] * ((p1[r] - p1[k]) / dx) * ((p2[r] - p2[k]) / dx) * dx;
    }
    return s;
}

double bb_action(const MeasurePath& path) {
    if (path.size() < 2) return 0.0;
    const Grid& g = path.grid();
    const double dt = path.dt();
    double action = 0.0;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const std::vector<double> f0 = path.slice(k).densities();
        const std::vector<double> f1 = path.slice(k + 1).densities();
        std::vector<double> mid(f0.size()), s(f0.size());
        for (std::size_t i = 0; i < f0.size(); ++i) {
            mid[i] = 0.5 * (f0[i] + f1[i]);
            s[i] = (f1[i] - f0[i]) / dt;
        }
        const MobilityField D = MobilityField::from_cell_values(g, mid);
        action += dual_norm_sq(s, D) * dt;
    }
    return action;
}

GridMeasure displacement_interpolation(const GridMeasure& rho0, const GridMeasure& rho1,
                                       double t) {
    require_same_grid(rho0.grid(), rho1.grid());
    const Grid& g = rho0.grid();
    if (g.topology != Topology::interval)
        throw std::invalid_argument("displacement interpolation needs interval topology");
    check_balanced(rho0.total_mass(), rho1.total_mass());

    const std::vector<Seg> a = spread_segments(rho0, 0);
    const std::vector<Seg> b = spread_segments(rho1, 0);
    const double dx = g.dx();
    std::vector<double> w(g.n_cells, 0.0);

    auto deposit = [&](double du, double xa, double xb) {
        if (du <= 0.0) return;
        if (xb < xa) std::swap(xa, xb);
        xa = std::clamp(xa, 0.0, g.domain_length);
        xb = std::clamp(xb, 0.0, g.domain_length);
        if (xb - xa < 1e-15) {
            auto idx = static_cast<std::size_t>(std::min(xa / dx,
                                                         static_cast<double>(g.n_cells) - 0.5));
            w[idx] += du;
            return;
        }
        const double density = du / (xb - xa);
        auto i0 = static_cast<std::size_t>(xa / dx);
        auto i1 = static_cast<std::size_t>(std::min(xb / dx,
                                                    static_cast<double>(g.n_cells) - 0.5));
        for (std::size_t i = i0; i <= i1 && i < g.n_cells; ++i) {
            const double lo = std::max(xa, g.cell_left(i));
            const double hi = std::min(xb, g.cell_left(i) + dx);
            if (hi > lo) w[i] += density * (hi - lo);
        }
    };

    std::size_t ia = 0, ib = 0;
    double ua = 0.0, ub = 0.0;
    while (ia < a.size() && ib < b.size()) {
        const Seg& sa = a[ia];
        const Seg& sb = b[ib];
        const double rem = std::min(sa.mass - ua, sb.mass - ub);
        if (rem > 0.0) {
            const double qa0 = sa.x0 + seg_slope(sa) * ua;
            const double qb0 = sb.x0 + seg_slope(sb) * ub;
            const double qa1 = sa.x0 + seg_slope(sa) * (ua + rem);
            const double qb1 = sb.x0 + seg_slope(sb) * (ub + rem);
            deposit(rem, (1.0 - t) * qa0 + t * qb0, (1.0 - t) * qa1 + t * qb1);
        }
        ua += rem;
        ub += rem;
        if (sa.mass - ua <= 0.0) { ++ia; ua = 0.0; }
        if (sb.mass - ub <= 0.0) { ++ib; ub = 0.0; }
    }
    return GridMeasure(g, std::move(w));
}

MeasurePath geodesic_path(const GridMeasure& rho0, const GridMeasure& rho1, std::size_t K) {
    if (K == 0) throw std::invalid_argument("geodesic needs at least one interval");
    std::vector<GridMeasure> slices;
    slices.reserve(K + 1);
    for (std::size_t k = 0; k <= K; ++k)
        slices.push_back(displacement_interpolation(rho0, rho1,
                                                    static_cast<double>(k) / static_cast<double>(K)));
    return MeasurePath(0.0, 1.0 / static_cast<double>(K), std::move(slices));
}

} // namespace transport
} // namespace gradflow
