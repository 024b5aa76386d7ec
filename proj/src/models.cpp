#include "layered/models.hpp"

#include <algorithm>
#include <cctype>
#include <numbers>
#include <sstream>

#include "layered/errors.hpp"

namespace layered {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

double dot(Momentum a, Momentum b) { return a.kx * b.kx + a.ky * b.ky; }

}  // namespace

std::string to_string(Stacking s) { return s == Stacking::ABBA ? "abba" : "ba"; }
std::string to_string(ModelKind k) { return k == ModelKind::QWZ ? "qwz" : "haldane"; }

Stacking parse_stacking(const std::string& token) {
    auto t = lower(token);
    if (t == "abba" || t == "ab&ba" || t == "ab-ba") return Stacking::ABBA;
    if (t == "ba") return Stacking::BA;
    throw ConfigError("unknown stacking '" + token + "' (expected abba or ba)");
}

ModelKind parse_model(const std::string& token) {
    auto t = lower(token);
    if (t == "qwz") return ModelKind::QWZ;
    if (t == "haldane") return ModelKind::Haldane;
    throw ConfigError("unknown model '" + token + "' (expected qwz or haldane)");
}

FieldVector qwz_field(Momentum k, double mass) {
    return {std::sin(k.kx), std::sin(k.ky), mass - std::cos(k.kx) - std::cos(k.ky)};
}

FieldVector haldane_field(Momentum k, double mass) {
    FieldVector h{0.0, 0.0, mass};
    for (const auto& a : haldane::nn_vectors) {
        double p = dot(k, a);
        h.h1 += 4.0 * std::cos(p);
        h.h2 += 4.0 * std::sin(p);
    }
    for (const auto& b : haldane::nnn_vectors) h.h3 -= 2.0 * std::sin(dot(k, b));
    return h;
}

FieldVector MonolayerModel::field(Momentum k) const {
    return kind == ModelKind::QWZ ? qwz_field(k, mass) : haldane_field(k, mass);
}

void LayeredConfig::validate() const {
    if (layers < 1) throw ConfigError("layers must be >= 1, got " + std::to_string(layers));
    if (!std::isfinite(hopping)) throw ConfigError("hopping t must be finite");
    if (!std::isfinite(monolayer.mass)) throw ConfigError("mass m must be finite");
}

std::string LayeredConfig::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << to_string(monolayer.kind) << " m=" << monolayer.mass << " " << to_string(stacking)
       << " N=" << layers << " t=" << hopping;
    return os.str();
}

std::array<double, 2> Cell::fractional(Momentum k) const {
    Momentum d = k - origin;
    double det = area();
    double u = (d.kx * g2.ky - d.ky * g2.kx) / det;
    double v = (g1.kx * d.ky - g1.ky * d.kx) / det;
    return {u, v};
}

Momentum Cell::reduce(Momentum k) const {
    auto [u, v] = fractional(k);
    u -= std::floor(u);
    v -= std::floor(v);
    return at(u, v);
}

Cell Cell::for_model(ModelKind kind) {
    constexpr double pi = std::numbers::pi;
    if (kind == ModelKind::QWZ) return {{-pi, -pi}, {2 * pi, 0.0}, {0.0, 2 * pi}};
    // G_i . a_j = 2 pi delta_ij for a1 = (0,1), a2 = (-sqrt3/2, -1/2)
    const double s3 = std::sqrt(3.0);
    Momentum g1{-2 * pi / s3, 2 * pi};
    Momentum g2{-4 * pi / s3, 0.0};
    // centre the cell on k = 0
    Momentum origin = -0.5 * (g1 + g2);
    return {origin, g1, g2};
}

Eigen::Matrix2cd pauli(int i) {
    Eigen::Matrix2cd s;
    const cplx I(0.0, 1.0);
    switch (i) {
        case 0: s << 1, 0, 0, 1; break;
        case 1: s << 0, 1, 1, 0; break;
        case 2: s << 0, -I, I, 0; break;
        case 3: s << 1, 0, 0, -1; break;
        default: throw Error("pauli index out of range");
    }
    return s;
}

Eigen::MatrixXd sigma1_chain(int layers) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(layers, layers);
    for (int l = 0; l + 1 < layers; ++l) s(l, l + 1) = s(l + 1, l) = 1.0;
    return s;
}

Eigen::MatrixXcd sigma2_chain(int layers) {
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(layers, layers);
    for (int l = 0; l + 1 < layers; ++l) {
        // 0-based l: even -> link 1, 3, ... (odd in 1-based counting)
        cplx up = (l % 2 == 0) ? cplx(0, -1) : cplx(0, 1);
        s(l, l + 1) = up;
        s(l + 1, l) = std::conj(up);
    }
    return s;
}

HermitianMatrix build_layered(const FieldVector& h, const LayeredConfig& cfg) {
    const int n = cfg.layers;
    const double t = cfg.hopping;
    HermitianMatrix H = HermitianMatrix::Zero(2 * n, 2 * n);
    const cplx off(h.h1, -h.h2);
    for (int l = 0; l < n; ++l) {
        int a = 2 * l, b = 2 * l + 1;
        H(a, a) = h.h3;
        H(b, b) = -h.h3;
        H(a, b) = off;
        H(b, a) = std::conj(off);
    }
    for (int l = 0; l + 1 < n; ++l) {
        int a = 2 * l, b = 2 * l + 1, a2 = 2 * l + 2, b2 = 2 * l + 3;
        if (cfg.stacking == Stacking::ABBA) {
            H(a, b2) = H(b2, a) = t;
            H(b, a2) = H(a2, b) = t;
        } else if (l % 2 == 0) {
            H(b, a2) = H(a2, b) = t;
        } else {
            H(a, b2) = H(b2, a) = t;
        }
    }
    return H;
}

HermitianMatrix build_layered(Momentum k, const LayeredConfig& cfg) {
    return build_layered(cfg.monolayer.field(k), cfg);
}

double hermiticity_defect(const Eigen::MatrixXcd& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

std::vector<HamiltonianTerm> hamiltonian_terms(const LayeredConfig& cfg) {
    const int n = cfg.layers;
    Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd s1 = sigma1_chain(n).cast<cplx>();
    auto kron = [](const Eigen::MatrixXcd& a, const Eigen::Matrix2cd& b) {
        Eigen::MatrixXcd out(a.rows() * 2, a.cols() * 2);
        for (int i = 0; i < a.rows(); ++i)
            for (int j = 0; j < a.cols(); ++j) out.block(2 * i, 2 * j, 2, 2) = a(i, j) * b;
        return out;
    };
    std::vector<HamiltonianTerm> terms;
    terms.push_back({"1⊗σ1", kron(id, pauli(1))});
    terms.push_back({"1⊗σ2", kron(id, pauli(2))});
    terms.push_back({"1⊗σ3", kron(id, pauli(3))});
    if (n > 1) {
        terms.push_back({"Σ1⊗σ1", kron(s1, pauli(1))});
        if (cfg.stacking == Stacking::BA) terms.push_back({"Σ2⊗σ2", kron(sigma2_chain(n), pauli(2))});
    }
    return terms;
}

std::vector<AnticommutatorEntry> anticommutator_table(const LayeredConfig& cfg) {
    auto terms = hamiltonian_terms(cfg);
    std::vector<AnticommutatorEntry> out;
    for (size_t i = 0; i < terms.size(); ++i)
        for (size_t j = i + 1; j < terms.size(); ++j) {
            const auto& a = terms[i].matrix;
            const auto& b = terms[j].matrix;
            out.push_back({terms[i].label, terms[j].label, (a * b + b * a).norm()});
        }
    return out;
}

std::vector<std::string> anticommuting_with_all(const std::vector<AnticommutatorEntry>& table,
                                                double tol) {
    std::vector<std::string> labels;
    for (const auto& e : table) {
        for (const auto& l : {e.first, e.second})
            if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
    }
    std::vector<std::string> out;
    for (const auto& l : labels) {
        bool ok = true;
        for (const auto& e : table)
            if ((e.first == l || e.second == l) && e.norm >= tol) ok = false;
        if (ok) out.push_back(l);
    }
    return out;
}

}  // namespace layered
