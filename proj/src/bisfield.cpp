#include "layered/bisfield.hpp"

#include <algorithm>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "layered/csv.hpp"
#include "layered/errors.hpp"
#include "layered/parallel.hpp"

namespace layered {

namespace {

constexpr int bisection_steps = 52;
constexpr int min_contour_points = 32;
constexpr double winding_guard = 0.05;

std::string where(Momentum k) {
    std::ostringstream os;
    os.precision(17);
    os << "k=(" << k.kx << ", " << k.ky << ")";
    return os.str();
}

int partner(int j, int shift) { return (j - 1 + shift) % 3 + 1; }

}  // namespace

TaspSource TaspSource::global(const LayeredConfig& cfg, int axis, int sign) {
    TaspSource s;
    s.cfg = cfg;
    s.axis = axis;
    s.sign = sign < 0 ? -1 : 1;
    return s;
}

TaspSource TaspSource::subspace(const LayeredConfig& cfg, int r, int axis, int sign) {
    if (cfg.stacking != Stacking::ABBA)
        throw UnsupportedStacking("subspace observables need ABBA stacking, got " + cfg.describe());
    TaspSource s = global(cfg, axis, sign);
    s.kind = Kind::Subspace;
    s.r = r;
    return s;
}

TaspVector TaspSource::evaluate(Momentum k) const {
    if (kind == Kind::Subspace) return gtasp_abba(k, cfg, axis, r, sign);
    return tasp_closed_form(k, cfg, axis, sign);
}

FieldVector TaspSource::effective_field(Momentum k) const {
    FieldVector h = cfg.monolayer.field(k);
    if (kind == Kind::Subspace) return block_diagonalize_abba(h, cfg).blocks[r - 1].h;
    return h;
}

double TaspSource::indicator(Momentum k, const TaspVector& value) const {
    double hj = effective_field(k)[axis - 1];
    double mag = std::sqrt(std::abs(value(axis)));
    return hj > 0.0 ? mag : (hj < 0.0 ? -mag : 0.0);
}

double TaspSource::indicator(Momentum k) const { return indicator(k, evaluate(k)); }

int TaspSource::layer_factor() const {
    if (kind == Kind::Global && cfg.stacking == Stacking::BA) return cfg.layers;
    return 1;
}

std::string TaspSource::tag() const {
    std::string s = "s" + std::to_string(axis);
    return kind == Kind::Subspace ? "r" + std::to_string(r) + "_" + s : s;
}

Momentum TaspGrid::node(int i, int j) const {
    return cell.at((i + 0.5) / nx, (j + 0.5) / ny);
}

TaspGrid sample_grid(const TaspSource& source, const Cell& cell, int nx, int ny, int threads) {
    if (nx < 16 || ny < 16) throw ConfigError("grid resolution must be at least 16 per axis");
    TaspGrid g;
    g.nx = nx;
    g.ny = ny;
    g.cell = cell;
    g.source = source;
    const size_t n = static_cast<size_t>(nx) * ny;
    g.values.resize(n);
    g.indicator.resize(n);
    parallel_for(n, threads, [&](size_t idx) {
        int i = static_cast<int>(idx % nx), j = static_cast<int>(idx / nx);
        Momentum k = g.node(i, j);
        try {
            g.values[idx] = source.evaluate(k);
        } catch (const SingularPoint& e) {
            throw SingularPoint(std::string(e.what()) + " at grid node " + where(k));
        }
        g.indicator[idx] = source.indicator(k, g.values[idx]);
    });
    return g;
}

TaspGrid sample_grid(const TaspSource& source, int nx, int ny, int threads) {
    return sample_grid(source, Cell::for_model(source.cfg.monolayer.kind), nx, ny, threads);
}

BisExtraction extract_bis(const TaspGrid& grid, double tol_bis) {
    const int nx = grid.nx, ny = grid.ny;
    auto wrapi = [nx](int i) { return (i % nx + nx) % nx; };
    auto wrapj = [ny](int j) { return (j % ny + ny) % ny; };
    auto phi = [&](int i, int j) { return grid.indicator[static_cast<size_t>(wrapi(i) + nx * wrapj(j))]; };
    auto pos = [&](int i, int j) { return phi(i, j) > 0.0; };
    // edge ids: horizontal (i,j)-(i+1,j) -> 2 idx, vertical (i,j)-(i,j+1) -> 2 idx + 1
    auto hid = [&](int i, int j) { return 2L * (wrapi(i) + static_cast<long>(nx) * wrapj(j)); };
    auto vid = [&](int i, int j) { return hid(i, j) + 1; };

    std::map<long, long> next;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int ci[4] = {i, i + 1, i + 1, i};
            const int cj[4] = {j, j, j + 1, j + 1};
            const long edge[4] = {hid(i, j), vid(i + 1, j), hid(i, j + 1), vid(i, j)};
            bool p[4];
            for (int c = 0; c < 4; ++c) p[c] = pos(ci[c], cj[c]);
            std::vector<int> starts, ends;
            for (int a = 0; a < 4; ++a) {
                if (p[a] == p[(a + 1) % 4]) continue;
                (p[a] ? starts : ends).push_back(a);
            }
            if (starts.empty()) continue;
            if (starts.size() == 1) {
                next[edge[starts[0]]] = edge[ends[0]];
                continue;
            }
            double centre = 0.25 * (phi(ci[0], cj[0]) + phi(ci[1], cj[1]) + phi(ci[2], cj[2]) +
                                    phi(ci[3], cj[3]));
            int step = centre > 0.0 ? 1 : 3;
            for (int a : starts) next[edge[a]] = edge[(a + step) % 4];
        }

    const TaspSource& src = grid.source;
    auto crossing = [&](long id) {
        long node = id / 2;
        int i = static_cast<int>(node % nx), j = static_cast<int>(node / nx);
        bool vertical = id % 2;
        int i2 = vertical ? i : i + 1, j2 = vertical ? j + 1 : j;
        bool p0 = pos(i, j);
        double u0 = (i + 0.5) / nx, v0 = (j + 0.5) / ny;
        double u1 = (i2 + 0.5) / nx, v1 = (j2 + 0.5) / ny;
        double lo = 0.0, hi = 1.0;
        for (int s = 0; s < bisection_steps; ++s) {
            double mid = 0.5 * (lo + hi);
            Momentum k = grid.cell.at(u0 + mid * (u1 - u0), v0 + mid * (v1 - v0));
            if ((src.indicator(k) > 0.0) == p0) lo = mid; else hi = mid;
        }
        double lam = 0.5 * (lo + hi);
        return std::array<double, 2>{u0 + lam * (u1 - u0), v0 + lam * (v1 - v0)};
    };

    BisExtraction out;
    std::map<long, bool> visited;
    for (const auto& [first, unused] : next) {
        (void)unused;
        if (visited[first]) continue;
        BisContour c;
        c.criterion = src.axis;
        c.tag = src.tag();
        std::vector<std::array<double, 2>> uv;
        long e = first;
        do {
            visited[e] = true;
            uv.push_back(crossing(e));
            auto it = next.find(e);
            if (it == next.end()) throw ContourError("open contour at edge " + std::to_string(e));
            e = it->second;
        } while (e != first);
        // unwrap in fractional coordinates
        std::array<double, 2> prev = uv[0];
        for (size_t q = 0; q < uv.size(); ++q) {
            std::array<double, 2> cur = uv[q];
            if (q > 0)
                for (int d = 0; d < 2; ++d) {
                    double step = uv[q][d] - uv[q - 1][d];
                    cur[d] = prev[d] + step - std::round(step);
                }
            c.points.push_back(grid.cell.at(cur[0], cur[1]));
            prev = cur;
        }
        for (int d = 0; d < 2; ++d) {
            double step = uv[0][d] - uv.back()[d];
            double end = prev[d] + step - std::round(step);
            c.wrap[d] = static_cast<int>(std::lround(end - uv[0][d]));
        }
        c.period = c.wrap[0] * grid.cell.g1 + c.wrap[1] * grid.cell.g2;
        for (const auto& k : c.points) c.max_tasp = std::max(c.max_tasp, src.evaluate(k).max_abs());
        (c.max_tasp < tol_bis ? out.accepted : out.rejected).push_back(std::move(c));
    }
    return out;
}

namespace {

// Point q of the contour continued periodically past both ends.
Momentum contour_point(const BisContour& c, long q) {
    const long n = static_cast<long>(c.points.size());
    long shift = q >= 0 ? q / n : -((-q + n - 1) / n);
    Momentum k = c.points[static_cast<size_t>(q - shift * n)];
    return k + static_cast<double>(shift) * c.period;
}

Momentum left_normal(const BisContour& c, long q) {
    Momentum t = contour_point(c, q + 1) - contour_point(c, q - 1);
    double n = t.norm();
    if (n == 0.0) throw ContourError("repeated contour points at " + where(c.points[static_cast<size_t>(q)]));
    return {-t.ky / n, t.kx / n};
}

}  // namespace

void dynamical_field(BisContour& contour, const TaspSource& source, double delta) {
    if (contour.points.size() < 3) throw ContourError("contour too short for a dynamical field");
    const int p = partner(source.axis, 1), q = partner(source.axis, 2);
    contour.field.clear();
    for (size_t i = 0; i < contour.points.size(); ++i) {
        Momentum k = contour.points[i];
        Momentum n = left_normal(contour, static_cast<long>(i));
        TaspVector plus = source.evaluate(k + delta * n);
        TaspVector minus = source.evaluate(k - delta * n);
        double g1 = -(plus(p) - minus(p)) / (2.0 * delta);
        double g2 = -(plus(q) - minus(q)) / (2.0 * delta);
        double norm = std::hypot(g1, g2);
        if (!(norm > 1e-10))
            throw DegenerateField("dynamical field vanishes at " + where(k) + " for " + source.cfg.describe());
        contour.field.push_back({g1 / norm, g2 / norm});
    }
}

std::vector<std::array<double, 2>> closed_form_field(const BisContour& contour,
                                                     const TaspSource& source) {
    const int j = source.axis, p = partner(j, 1), q = partner(j, 2);
    std::vector<std::array<double, 2>> out;
    for (const auto& k : contour.points) {
        FieldVector h = source.cfg.monolayer.field(k);
        double a = 0.0, b = 0.0;
        if (source.kind == TaspSource::Kind::Subspace) {
            FieldVector hr = source.effective_field(k);
            a = hr[p - 1];
            b = hr[q - 1];
        } else if (source.cfg.stacking == Stacking::BA) {
            auto c = ba_coefficients(h, source.cfg);
            a = c(p, j) * h[p - 1];
            b = c(q, j) * h[q - 1];
        } else {
            for (const auto& blk : block_diagonalize_abba(h, source.cfg).blocks) {
                double e2 = blk.h.norm_squared();
                a += blk.h[p - 1] / e2;
                b += blk.h[q - 1] / e2;
            }
        }
        double n = std::hypot(a, b);
        if (!(n > 0.0)) throw DegenerateField("closed-form field vanishes at " + where(k));
        out.push_back({-source.sign * a / n, -source.sign * b / n});
    }
    return out;
}

WindingResult winding(const BisContour& contour, int layer_factor) {
    const size_t n = contour.field.size();
    if (n < static_cast<size_t>(min_contour_points))
        throw ContourError("contour has " + std::to_string(n) + " points, need at least " +
                           std::to_string(min_contour_points));
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const auto& a = contour.field[i];
        const auto& b = contour.field[(i + 1) % n];
        double step = std::atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1]);
        if (std::abs(step) >= std::numbers::pi / 2)
            throw ContourError("dynamical field under-resolved near " +
                               where(contour.points[i]) + "; refine the grid");
        total += step;
    }
    WindingResult w;
    w.raw = total / (2.0 * std::numbers::pi);
    double rounded = std::round(w.raw);
    w.residual = std::abs(w.raw - rounded);
    if (w.residual >= winding_guard) {
        std::ostringstream os;
        os << "winding " << w.raw << " is not close to an integer";
        throw NonQuantizedWinding(os.str());
    }
    w.value = static_cast<int>(rounded) * layer_factor;
    return w;
}

int sign_changes(const BisContour& contour, const TaspSource& source, int component, double delta) {
    std::vector<int> signs;
    for (size_t i = 0; i < contour.points.size(); ++i) {
        Momentum n = left_normal(contour, static_cast<long>(i));
        double v = source.evaluate(contour.points[i] + delta * n)(component);
        if (v != 0.0) signs.push_back(v > 0.0 ? 1 : -1);
    }
    int changes = 0;
    for (size_t i = 0; i < signs.size(); ++i)
        if (signs[i] != signs[(i + 1) % signs.size()]) ++changes;
    return changes;
}

BisReport characterize(const TaspGrid& grid, double tol_bis, double delta) {
    BisReport rep;
    rep.extraction = extract_bis(grid, tol_bis);
    for (auto& c : rep.extraction.accepted) {
        dynamical_field(c, grid.source, delta);
        rep.windings.push_back(winding(c, grid.source.layer_factor()));
        rep.total += rep.windings.back().value;
    }
    return rep;
}

void write_contour_csv(std::ostream& os, const BisContour& contour) {
    os << "kx,ky,g1,g2,component\n";
    for (size_t i = 0; i < contour.points.size(); ++i) {
        double g1 = i < contour.field.size() ? contour.field[i][0] : 0.0;
        double g2 = i < contour.field.size() ? contour.field[i][1] : 0.0;
        os << fmt17(contour.points[i].kx) << ',' << fmt17(contour.points[i].ky) << ',' << fmt17(g1)
           << ',' << fmt17(g2) << ',' << contour.tag << '\n';
    }
}

}  // namespace layered
