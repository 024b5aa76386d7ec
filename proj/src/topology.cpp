#include "layered/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "layered/csv.hpp"
#include "layered/errors.hpp"
#include "layered/parallel.hpp"
#include "layered/spectra.hpp"

namespace layered {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::string where(Momentum k) {
    std::ostringstream os;
    os.precision(17);
    os << "k=(" << k.kx << ", " << k.ky << ")";
    return os.str();
}

Momentum grid_node(const Cell& cell, int n, int i, int j) {
    return cell.at((i + 0.5) / n, (j + 0.5) / n);
}

double solid_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
    double num = a.dot(b.cross(c));
    double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    return 2.0 * std::atan2(num, den);
}

}  // namespace

ChernResult chern_fhs(const LayeredConfig& cfg, int filled, int grid_n, double gap_tol, int threads) {
    cfg.validate();
    const int dim = 2 * cfg.layers;
    if (filled < 0 || filled > dim) throw ConfigError("filled band count out of range");
    if (grid_n < 4) throw ConfigError("Chern grid must be at least 4");
    ChernResult res;
    res.grid = grid_n;
    res.gap_min = std::numeric_limits<double>::infinity();
    if (filled == 0 || filled == dim) return res;

    const Cell cell = Cell::for_model(cfg.monolayer.kind);
    const int n = grid_n;
    std::vector<Eigen::MatrixXcd> frames(static_cast<size_t>(n) * n);
    std::vector<double> gaps(frames.size());
    parallel_for(frames.size(), threads, [&](size_t idx) {
        int i = static_cast<int>(idx % n), j = static_cast<int>(idx / n);
        Momentum k = grid_node(cell, n, i, j);
        auto s = numeric_spectrum(build_layered(k, cfg));
        gaps[idx] = s.energies(filled) - s.energies(filled - 1);
        if (gaps[idx] < gap_tol) {
            std::ostringstream os;
            os << "gap above band " << filled << " is " << gaps[idx] << " at " << where(k) << " for "
               << cfg.describe();
            throw GaplessConfiguration(os.str());
        }
        frames[idx] = s.vectors.leftCols(filled);
    });
    res.gap_min = *std::min_element(gaps.begin(), gaps.end());

    auto frame = [&](int i, int j) -> const Eigen::MatrixXcd& {
        return frames[static_cast<size_t>((i % n) + n * (j % n))];
    };
    auto link = [&](int i, int j, int di, int dj) {
        cplx d = (frame(i, j).adjoint() * frame(i + di, j + dj)).determinant();
        return d / std::abs(d);
    };
    double total = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            cplx w = link(i, j, 1, 0) * link(i + 1, j, 0, 1) * std::conj(link(i, j + 1, 1, 0)) *
                     std::conj(link(i, j, 0, 1));
            total += std::arg(w);
        }
    // negated so that the QWZ m = 1 band carries -1
    res.raw = -total / two_pi;
    res.value = static_cast<int>(std::lround(res.raw));
    return res;
}

ChernResult chern_two_band(const FieldFunction& h, const Cell& cell, int grid_n, double gap_tol) {
    if (grid_n < 4) throw ConfigError("Chern grid must be at least 4");
    const int n = grid_n;
    std::vector<Eigen::Vector3d> unit(static_cast<size_t>(n) * n);
    ChernResult res;
    res.grid = n;
    res.gap_min = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            Momentum k = grid_node(cell, n, i, j);
            FieldVector f = h(k);
            double norm = f.norm();
            res.gap_min = std::min(res.gap_min, 2.0 * norm);
            if (2.0 * norm < gap_tol)
                throw GaplessConfiguration("two-band field vanishes at " + where(k));
            unit[static_cast<size_t>(i + n * j)] = Eigen::Vector3d(f.h1, f.h2, f.h3) / norm;
        }
    auto at = [&](int i, int j) -> const Eigen::Vector3d& {
        return unit[static_cast<size_t>((i % n) + n * (j % n))];
    };
    double total = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            total += solid_angle(at(i, j), at(i + 1, j), at(i + 1, j + 1));
            total += solid_angle(at(i, j), at(i + 1, j + 1), at(i, j + 1));
        }
    res.raw = total / (4.0 * std::numbers::pi);
    res.value = static_cast<int>(std::lround(res.raw));
    return res;
}

ChernResult chern_two_band_confirmed(const FieldFunction& h, const Cell& cell, int grid_n,
                                     double gap_tol, int max_grid) {
    ChernResult prev = chern_two_band(h, cell, grid_n, gap_tol);
    for (int n = 2 * grid_n; n <= max_grid; n *= 2) {
        ChernResult cur = chern_two_band(h, cell, n, gap_tol);
        if (cur.value == prev.value) {
            cur.gap_min = std::min(cur.gap_min, prev.gap_min);
            return cur;
        }
        prev = cur;
    }
    throw NonConvergence("two-band degree did not stabilize under grid doubling up to " +
                         std::to_string(max_grid));
}

ChernResult chern_fhs_confirmed(const LayeredConfig& cfg, int filled, int grid_n, double gap_tol,
                                int threads, int max_grid) {
    ChernResult prev = chern_fhs(cfg, filled, grid_n, gap_tol, threads);
    for (int n = 2 * grid_n; n <= max_grid; n *= 2) {
        ChernResult cur = chern_fhs(cfg, filled, n, gap_tol, threads);
        if (cur.value == prev.value) {
            cur.gap_min = std::min(cur.gap_min, prev.gap_min);
            return cur;
        }
        prev = cur;
    }
    throw NonConvergence("lattice Chern number did not stabilize under grid doubling for " +
                         cfg.describe());
}

ChernResult total_chern_abba(const LayeredConfig& cfg, int grid_n, double gap_tol) {
    if (cfg.stacking != Stacking::ABBA)
        throw UnsupportedStacking("total_chern_abba needs ABBA stacking, got " + cfg.describe());
    cfg.validate();
    const Cell cell = Cell::for_model(cfg.monolayer.kind);
    SineModes modes(cfg.layers);
    ChernResult total;
    total.gap_min = std::numeric_limits<double>::infinity();
    for (int r = 1; r <= cfg.layers; ++r) {
        double shift = 2.0 * cfg.hopping * modes.cos_theta(r);
        FieldFunction hr = [&cfg, shift](Momentum k) {
            FieldVector h = cfg.monolayer.field(k);
            h.h1 += shift;
            return h;
        };
        ChernResult c;
        try {
            c = chern_two_band_confirmed(hr, cell, grid_n, gap_tol);
        } catch (const GaplessConfiguration& e) {
            throw GaplessConfiguration("subsystem r=" + std::to_string(r) + ": " + e.what() + " for " +
                                       cfg.describe());
        }
        total.value += c.value;
        total.raw += c.raw;
        total.gap_min = std::min(total.gap_min, c.gap_min);
        total.grid = std::max(total.grid, c.grid);
    }
    return total;
}

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return v;
}

}  // namespace

PhaseDiagram phase_diagram(const PhaseScan& scan, int threads) {
    if (scan.t_steps < 1 || scan.m_steps < 1) throw ConfigError("phase diagram needs at least one step");
    if (scan.layers < 1) throw ConfigError("layers must be >= 1");
    PhaseDiagram pd;
    pd.stacking = scan.stacking;
    pd.model = scan.model;
    pd.layers = scan.layers;
    pd.t_values = linspace(scan.t_min, scan.t_max, scan.t_steps);
    pd.m_values = linspace(scan.m_min, scan.m_max, scan.m_steps);
    pd.cells.resize(static_cast<size_t>(scan.t_steps) * scan.m_steps);
    const Cell cell = Cell::for_model(scan.model);
    parallel_for(pd.cells.size(), threads, [&](size_t idx) {
        int it = static_cast<int>(idx % scan.t_steps), im = static_cast<int>(idx / scan.t_steps);
        PhaseCell& pc = pd.cells[idx];
        pc.t = pd.t_values[static_cast<size_t>(it)];
        pc.m = pd.m_values[static_cast<size_t>(im)];
        LayeredConfig cfg{scan.stacking, scan.layers, pc.t, {scan.model, pc.m}};
        pc.gap_min = std::numeric_limits<double>::infinity();
        for (int j = 0; j < scan.grid_n; ++j)
            for (int i = 0; i < scan.grid_n; ++i)
                pc.gap_min = std::min(pc.gap_min,
                                      analytic_gap(cfg.monolayer.field(grid_node(cell, scan.grid_n, i, j)), cfg));
        if (pc.gap_min < scan.gap_tol) return;
        try {
            if (scan.stacking == Stacking::ABBA)
                pc.chern = total_chern_abba(cfg, scan.grid_n, scan.gap_tol).value;
            else
                pc.chern = chern_fhs_confirmed(cfg, scan.layers, scan.grid_n, scan.gap_tol, 1).value;
        } catch (const GaplessConfiguration&) {
            pc.chern.reset();
        }
    });
    return pd;
}

void write_phase_csv(std::ostream& os, const PhaseDiagram& pd) {
    os << "t,m,chern,gap_min\n";
    for (const auto& c : pd.cells) {
        os << fmt17(c.t) << ',' << fmt17(c.m) << ',';
        if (c.chern) os << *c.chern; else os << "boundary";
        os << ',' << fmt17(c.gap_min) << '\n';
    }
}

void write_phase_matrix(std::ostream& os, const PhaseDiagram& pd) {
    const int nt = static_cast<int>(pd.t_values.size());
    os << nt;
    for (double t : pd.t_values) os << ' ' << fmt17(t);
    os << '\n';
    for (int im = 0; im < static_cast<int>(pd.m_values.size()); ++im) {
        os << fmt17(pd.m_values[static_cast<size_t>(im)]);
        for (int it = 0; it < nt; ++it) {
            const auto& c = pd.at(it, im);
            os << ' ';
            if (c.chern) os << *c.chern; else os << "NaN";
        }
        os << '\n';
    }
}

std::vector<TransitionPoint> transition_lines_abba(int layers, double t_min, double t_max,
                                                   int samples) {
    if (layers < 1 || samples < 1) throw ConfigError("transition lines need layers >= 1 and samples >= 1");
    SineModes modes(layers);
    std::vector<TransitionPoint> out;
    for (int r = 1; r <= layers; ++r) {
        double c = modes.cos_theta(r);
        for (double t : linspace(t_min, t_max, samples)) {
            double x = 2.0 * t * c;
            if (std::abs(x) > 1.0 + 1e-12) continue;
            double root = std::sqrt(std::max(0.0, 1.0 - x * x));
            for (double cky : {1.0, -1.0})
                for (double s : {1.0, -1.0}) {
                    TransitionPoint p;
                    p.r = r;
                    p.t = t;
                    p.m = s * root + cky;
                    p.k = {std::atan2(-x, s * root), cky > 0 ? 0.0 : std::numbers::pi};
                    out.push_back(p);
                }
        }
    }
    return out;
}

bool separated_by_transition(int layers, double t_a, double m_a, double t_b, double m_b) {
    SineModes modes(layers);
    for (int r = 1; r <= layers; ++r) {
        double c = modes.cos_theta(r);
        for (double cky : {1.0, -1.0}) {
            auto G = [&](double t, double m) {
                double x = 2.0 * t * c;
                return (m - cky) * (m - cky) + x * x - 1.0;
            };
            double ga = G(t_a, m_a), gb = G(t_b, m_b);
            // a point on a curve (to rounding) is separated from both sides
            if (std::abs(ga) < 1e-12 || std::abs(gb) < 1e-12 || ga * gb < 0.0) return true;
        }
    }
    return false;
}

}  // namespace layered
