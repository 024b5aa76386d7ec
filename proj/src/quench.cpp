#include "layered/quench.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "layered/errors.hpp"

namespace layered {

namespace {

constexpr double singular_eps = 1e-12;

void check_axis(int j) {
    if (j < 1 || j > 3) throw ConfigError("axis must be 1, 2 or 3, got " + std::to_string(j));
}

[[noreturn]] void singular(const FieldVector& h, const LayeredConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << "gap closes (E_m = 0) at h=(" << h.h1 << ", " << h.h2 << ", " << h.h3 << ") for "
       << cfg.describe();
    throw SingularPoint(os.str());
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::Matrix2cd& b) {
    Eigen::MatrixXcd out(a.rows() * 2, a.cols() * 2);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out.block(2 * i, 2 * j, 2, 2) = a(i, j) * b;
    return out;
}

}  // namespace

double TaspVector::max_abs() const {
    return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
}

InitialState InitialState::mixed(int axis, int sign) {
    check_axis(axis);
    InitialState s;
    s.axis = axis;
    s.sign = sign < 0 ? -1 : 1;
    return s;
}

InitialState InitialState::pure(Eigen::VectorXcd c, int axis, int sign) {
    check_axis(axis);
    double n = c.norm();
    if (!(n > 0.0)) throw ConfigError("pure state amplitudes must be nonzero");
    InitialState s;
    s.kind = Kind::Pure;
    s.axis = axis;
    s.sign = sign < 0 ? -1 : 1;
    s.amplitudes = c / n;
    return s;
}

HermitianMatrix InitialState::density(int layers) const {
    Eigen::Matrix2cd spin = 0.5 * (pauli(0) + static_cast<double>(sign) * pauli(axis));
    Eigen::MatrixXcd layer;
    if (kind == Kind::Mixed) {
        layer = Eigen::MatrixXcd::Identity(layers, layers) / static_cast<double>(layers);
    } else {
        if (amplitudes.size() != layers)
            throw ConfigError("pure state needs " + std::to_string(layers) + " amplitudes");
        layer = amplitudes * amplitudes.adjoint();
    }
    return kron(layer, spin);
}

HermitianMatrix Observable::matrix(int layers) const {
    check_axis(component);
    Eigen::MatrixXcd layer;
    switch (kind) {
        case Kind::Global:
            layer = Eigen::MatrixXcd::Identity(layers, layers);
            break;
        case Kind::SubspaceABBA: {
            if (r < 1 || r > layers) throw ConfigError("subspace label out of range");
            SineModes modes(layers);
            Eigen::VectorXd a = modes.vectors.col(r - 1);
            layer = (a * a.transpose()).cast<cplx>();
            break;
        }
        case Kind::BilayerABBA:
            if (layers != 2) throw ConfigError("bilayer observable needs N = 2");
            layer = pauli(0) + (r == 1 ? 1.0 : -1.0) * pauli(1);
            break;
    }
    return kron(layer, pauli(component));
}

std::string Observable::label() const {
    std::string s = "s" + std::to_string(component);
    switch (kind) {
        case Kind::Global: return "global_" + s;
        case Kind::SubspaceABBA: return "r" + std::to_string(r) + "_" + s;
        case Kind::BilayerABBA: return (r == 1 ? "I_" : "II_") + s;
    }
    return s;
}

double time_averaged_expectation(const SpectrumSample& s, const HermitianMatrix& rho,
                                 const HermitianMatrix& O) {
    double acc = 0.0;
    for (const auto& g : s.groups) {
        Eigen::MatrixXcd V(s.vectors.rows(), static_cast<Eigen::Index>(g.size()));
        for (size_t c = 0; c < g.size(); ++c) V.col(static_cast<Eigen::Index>(c)) = s.vectors.col(g[c]);
        Eigen::MatrixXcd rv = V.adjoint() * rho * V;
        Eigen::MatrixXcd ov = V.adjoint() * O * V;
        acc += (rv * ov).trace().real();
    }
    return acc;
}

double time_averaged_expectation(const HermitianMatrix& H, const HermitianMatrix& rho,
                                 const HermitianMatrix& O, double tol_deg) {
    return time_averaged_expectation(numeric_spectrum(H, tol_deg), rho, O);
}

TaspVector tasp_spectral(Momentum k, const LayeredConfig& cfg, const InitialState& state,
                         double tol_deg) {
    auto s = numeric_spectrum(k, cfg, tol_deg);
    auto rho = state.density(cfg.layers);
    TaspVector out;
    for (int i = 1; i <= 3; ++i)
        out(i) = time_averaged_expectation(s, rho, Observable::global(i).matrix(cfg.layers));
    return out;
}

TaspVector gtasp_abba(const FieldVector& h, const LayeredConfig& cfg, int j, int r, int sign) {
    check_axis(j);
    auto bd = block_diagonalize_abba(h, cfg);
    if (r < 1 || r > cfg.layers) throw ConfigError("subspace label out of range");
    const FieldVector& hr = bd.blocks[r - 1].h;
    double e2 = hr.norm_squared();
    if (std::sqrt(e2) < singular_eps) singular(h, cfg);
    TaspVector out;
    for (int i = 1; i <= 3; ++i) out(i) = sign * hr[i - 1] * hr[j - 1] / e2;
    return out;
}

TaspVector gtasp_abba(Momentum k, const LayeredConfig& cfg, int j, int r, int sign) {
    return gtasp_abba(cfg.monolayer.field(k), cfg, j, r, sign);
}

BaCoefficients ba_coefficients(const FieldVector& h, const LayeredConfig& cfg) {
    if (cfg.stacking != Stacking::BA)
        throw UnsupportedStacking("BA coefficients requested for " + cfg.describe());
    const int n = cfg.layers;
    SineModes modes(n);
    BaCoefficients c;
    c.layers = n;
    const double rho2 = h.h1 * h.h1 + h.h2 * h.h2;
    double a11 = 0.0, a13 = 0.0, a33 = 0.0;
    for (int r = 1; r <= n; ++r) {
        double q = cfg.hopping * modes.cos_theta(r);
        double p = std::sqrt(rho2 + q * q);
        double s = p + q;
        double e2 = h.h3 * h.h3 + s * s;
        double e = std::sqrt(e2);
        if (e < singular_eps) singular(h, cfg);
        // R = (E^2 - h3^2) / (E^2 - h3^2 + rho^2)
        double R = p > 0.0 ? 0.5 * (1.0 + q / p) : 0.5;
        // both branches +-E of this r contribute equally
        a11 += 2.0 * (2.0 * R * R / (n * e2));
        a13 += 2.0 * (R / (n * e2));
        a33 += 2.0 * (1.0 / (2.0 * n * e2));
        for (double sgn : {-1.0, 1.0}) {
            c.energies.push_back(sgn * e);
            c.D.push_back(sgn * e * (s * s + rho2));
        }
    }
    // pair energies and D before sorting
    std::vector<std::pair<double, double>> ed;
    for (size_t i = 0; i < c.energies.size(); ++i) ed.emplace_back(c.energies[i], c.D[i]);
    std::sort(ed.begin(), ed.end());
    for (size_t i = 0; i < ed.size(); ++i) {
        c.energies[i] = ed[i].first;
        c.D[i] = ed[i].second;
    }
    c.A << a11, a11, a13,
           a11, a11, a13,
           a13, a13, a33;
    return c;
}

BaCoefficients ba_coefficients(Momentum k, const LayeredConfig& cfg) {
    return ba_coefficients(cfg.monolayer.field(k), cfg);
}

TaspVector tasp_closed_form(const FieldVector& h, const LayeredConfig& cfg, int j, int sign) {
    check_axis(j);
    TaspVector out;
    if (cfg.stacking == Stacking::ABBA) {
        for (int r = 1; r <= cfg.layers; ++r) {
            auto g = gtasp_abba(h, cfg, j, r, sign);
            for (int i = 1; i <= 3; ++i) out(i) += g(i) / cfg.layers;
        }
        return out;
    }
    auto c = ba_coefficients(h, cfg);
    for (int i = 1; i <= 3; ++i) out(i) = sign * h[i - 1] * h[j - 1] * c(i, j);
    return out;
}

TaspVector tasp_closed_form(Momentum k, const LayeredConfig& cfg, int j, int sign) {
    return tasp_closed_form(cfg.monolayer.field(k), cfg, j, sign);
}

PureStateReport pure_state_check(const LayeredConfig& cfg, const InitialState& state, Momentum k0,
                                 Momentum k1, int n) {
    if (n < 2) throw ConfigError("pure_state_check needs at least two samples");
    PureStateReport rep;
    auto rho = state.density(cfg.layers);
    std::array<HermitianMatrix, 3> ops;
    for (int i = 1; i <= 3; ++i) ops[i - 1] = Observable::global(i).matrix(cfg.layers);
    for (int p = 0; p < n; ++p) {
        double f = static_cast<double>(p) / (n - 1);
        Momentum k = k0 + f * (k1 - k0);
        FieldVector h = cfg.monolayer.field(k);
        auto s = numeric_spectrum(k, cfg);
        std::array<double, 3> tasp;
        for (int i = 0; i < 3; ++i) tasp[i] = time_averaged_expectation(s, rho, ops[i]);
        if (std::abs(h.h3) < 1e-9)
            for (double v : tasp) rep.h3_zero_leakage = std::max(rep.h3_zero_leakage, std::abs(v));
        if (!s.nondegenerate() || s.energies.cwiseAbs().minCoeff() < singular_eps) {
            ++rep.skipped;
            continue;
        }
        ++rep.points;
        for (int i = 1; i <= 3; ++i) {
            Eigen::VectorXd si = spin_expectations(s, i);
            double lemma = 0.0;
            for (int m = 0; m < si.size(); ++m) lemma += si(m) / s.energies(m);
            lemma *= state.sign * h.h3 / (2.0 * cfg.layers);
            rep.residual = std::max(rep.residual, std::abs(tasp[i - 1] - lemma));
        }
    }
    return rep;
}

}  // namespace layered
