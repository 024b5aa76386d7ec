#include "layered/hopping.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

#include "layered/errors.hpp"

namespace layered {

namespace {

constexpr double pi = std::numbers::pi;

// admissible float slack on the rational-function ranges
constexpr double range_slack = 1e-12;

}  // namespace

HoppingEstimate estimate_t_abba(const GtaspMeasurement& measure, const MonolayerModel& monolayer,
                                int layers, int resolution) {
    if (layers < 2) throw ConfigError("hopping estimation needs at least two layers");
    if (resolution < 16) throw ConfigError("resolution must be at least 16");
    const Cell cell = Cell::for_model(monolayer.kind);
    const int n = resolution;
    std::vector<TaspVector> vals(static_cast<size_t>(n) * n);
    auto uv = [n](int i, int j) { return std::array<double, 2>{(i + 0.5) / n, (j + 0.5) / n}; };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            auto [u, v] = uv(i, j);
            vals[static_cast<size_t>(i + n * j)] = measure(cell.at(u, v));
        }
    auto val = [&](int i, int j) { return vals[static_cast<size_t>((i % n) + n * (j % n))](1); };

    const double c1 = std::cos(pi / (layers + 1));
    std::vector<double> est;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            for (int dir = 0; dir < 2; ++dir) {
                int i2 = i + (dir == 0), j2 = j + (dir == 1);
                double a = val(i, j), b = val(i2, j2);
                if (!((a > 0.0) != (b > 0.0))) continue;
                auto [u0, v0] = uv(i, j);
                auto [u1, v1] = uv(i2, j2);
                bool pa = a > 0.0;
                double lo = 0.0, hi = 1.0;
                for (int s = 0; s < 52; ++s) {
                    double mid = 0.5 * (lo + hi);
                    Momentum k = cell.at(u0 + mid * (u1 - u0), v0 + mid * (v1 - v0));
                    if ((measure(k)(1) > 0.0) == pa) lo = mid; else hi = mid;
                }
                double lam = 0.5 * (lo + hi);
                Momentum k = cell.at(u0 + lam * (u1 - u0), v0 + lam * (v1 - v0));
                // the sigma1 component also changes sign across the BIS, where sigma3 vanishes too
                if (std::abs(measure(k)(3)) < 1e-10) continue;
                est.push_back(-monolayer.field(k).h1 / (2.0 * c1));
            }
    if (est.empty())
        throw TrivialRegime("no zero line of the subspace sigma1 GTASP off the BIS: trivial regime, t not identifiable");
    double mean = 0.0;
    for (double e : est) mean += e;
    mean /= static_cast<double>(est.size());
    HoppingEstimate h;
    h.method = "abba-zero-line";
    h.t_hat = std::abs(mean);
    h.samples = static_cast<int>(est.size());
    for (double e : est) h.spread = std::max(h.spread, std::abs(e - mean));
    h.residual = h.spread;
    return h;
}

BaSamples ba_reference_samples(double t) {
    LayeredConfig cfg{Stacking::BA, 2, t, MonolayerModel::qwz(1.0)};
    BaSamples s;
    s.sigma1 = tasp_closed_form(Momentum{pi / 4, 0.0}, cfg, 3)(1);
    s.sigma2 = tasp_closed_form(Momentum{0.0, pi / 4}, cfg, 3)(2);
    s.sigma3 = tasp_closed_form(Momentum{0.0, 0.0}, cfg, 3)(3);
    return s;
}

HoppingEstimate estimate_t_ba(const BaSamples& samples) {
    auto from_inplane = [](double y, const char* name) {
        y = std::abs(y);
        if (!(y > 0.0) || y > 0.5 + range_slack) {
            std::ostringstream os;
            os << "|" << name << "| = " << y << " outside (0, 1/2]";
            throw InconsistentSample(os.str());
        }
        return std::sqrt(std::max(0.0, 1.0 / y - 2.0));
    };
    double t1 = from_inplane(samples.sigma1, "<s1>");
    double t2 = from_inplane(samples.sigma2, "<s2>");
    double y = std::abs(samples.sigma3);
    if (!(y > 0.5) || y > 1.0 + range_slack) {
        std::ostringstream os;
        os << "|<s3>| = " << y << " outside (1/2, 1]";
        throw InconsistentSample(os.str());
    }
    double t3 = std::sqrt(std::max(0.0, (2.0 - 2.0 * y) / (2.0 * y - 1.0)));
    HoppingEstimate h;
    h.method = "ba-rational";
    h.samples = 3;
    h.t_hat = (t1 + t2 + t3) / 3.0;
    for (double e : {t1, t2, t3}) h.spread = std::max(h.spread, std::abs(e - h.t_hat));
    h.residual = std::max({std::abs(t1 - t2), std::abs(t1 - t3), std::abs(t2 - t3)});
    if (h.residual > 1e-6 * (1.0 + h.t_hat)) {
        std::ostringstream os;
        os.precision(17);
        os << "inversion channels disagree: " << t1 << ", " << t2 << ", " << t3;
        throw InconsistentSample(os.str());
    }
    return h;
}

double invert_monotone(const std::function<double(double)>& f, double target, double t_lo,
                       double t_hi, double tol) {
    double flo = f(t_lo) - target, fhi = f(t_hi) - target;
    if (flo == 0.0) return t_lo;
    if (fhi == 0.0) return t_hi;
    if ((flo > 0.0) == (fhi > 0.0)) throw InconsistentSample("target value not bracketed by the search range");
    while (t_hi - t_lo > tol) {
        double mid = 0.5 * (t_lo + t_hi);
        double fm = f(mid) - target;
        if ((fm > 0.0) == (flo > 0.0)) {
            t_lo = mid;
            flo = fm;
        } else {
            t_hi = mid;
        }
        if (mid == t_lo && mid == t_hi) break;
    }
    return 0.5 * (t_lo + t_hi);
}

}  // namespace layered
