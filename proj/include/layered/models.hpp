#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace layered {

using cplx = std::complex<double>;

// Dense complex Hermitian matrix (2N x 2N Bloch Hamiltonians, observables,
// density matrices).  Layer index is the left tensor factor, sublattice/spin
// the right one: basis order (layer 1, A), (layer 1, B), (layer 2, A), ...
using HermitianMatrix = Eigen::MatrixXcd;

struct Momentum {
    double kx = 0.0;
    double ky = 0.0;

    friend Momentum operator+(Momentum a, Momentum b) { return {a.kx + b.kx, a.ky + b.ky}; }
    friend Momentum operator-(Momentum a, Momentum b) { return {a.kx - b.kx, a.ky - b.ky}; }
    friend Momentum operator*(double s, Momentum a) { return {s * a.kx, s * a.ky}; }
    double norm() const { return std::hypot(kx, ky); }
    bool finite() const { return std::isfinite(kx) && std::isfinite(ky); }
};

// Coefficients of the monolayer Hamiltonian h1 sigma1 + h2 sigma2 + h3 sigma3.
struct FieldVector {
    double h1 = 0.0;
    double h2 = 0.0;
    double h3 = 0.0;

    // Component by 0-based index (0 -> h1).
    double operator[](int i) const { return i == 0 ? h1 : (i == 1 ? h2 : h3); }
    double norm_squared() const { return h1 * h1 + h2 * h2 + h3 * h3; }
    double norm() const { return std::sqrt(norm_squared()); }
    bool finite() const { return std::isfinite(h1) && std::isfinite(h2) && std::isfinite(h3); }
};

enum class Stacking { ABBA, BA };
enum class ModelKind { QWZ, Haldane };

std::string to_string(Stacking s);
std::string to_string(ModelKind k);

// Throws ConfigError on unknown tokens.  Accepted: "abba", "ab&ba", "ba";
// "qwz", "haldane" (case-insensitive).
Stacking parse_stacking(const std::string& token);
ModelKind parse_model(const std::string& token);

FieldVector qwz_field(Momentum k, double mass);

// Haldane fields with the nearest-neighbour vectors a_i and next-nearest
// vectors b_i exactly as listed below.
FieldVector haldane_field(Momentum k, double mass);

namespace haldane {
inline const std::array<Momentum, 3> nn_vectors{{
    {0.0, 1.0},
    {-std::sqrt(3.0) / 2.0, -0.5},
    {std::sqrt(3.0) / 2.0, -0.5},
}};
inline const std::array<Momentum, 3> nnn_vectors{{
    {-std::sqrt(3.0), 0.0},
    {-std::sqrt(3.0) / 2.0, 1.5},
    {-std::sqrt(3.0) / 2.0, -1.5},
}};
}  // namespace haldane

struct MonolayerModel {
    ModelKind kind = ModelKind::QWZ;
    double mass = 1.0;

    static MonolayerModel qwz(double m) { return {ModelKind::QWZ, m}; }
    static MonolayerModel haldane(double m) { return {ModelKind::Haldane, m}; }

    FieldVector field(Momentum k) const;
};

struct LayeredConfig {
    Stacking stacking = Stacking::ABBA;
    int layers = 1;
    double hopping = 0.0;
    MonolayerModel monolayer{};

    // Throws ConfigError when layers < 1 or parameters are not finite.
    void validate() const;
    std::string describe() const;
};

// Periodic sampling cell k = origin + u*g1 + v*g2, (u, v) in [0, 1)^2.
// The basis is ordered so that det(g1, g2) > 0.
struct Cell {
    Momentum origin;
    Momentum g1;
    Momentum g2;

    Momentum at(double u, double v) const { return origin + u * g1 + v * g2; }
    // Fractional coordinates (u, v) of an arbitrary momentum.
    std::array<double, 2> fractional(Momentum k) const;
    // Image of k inside the cell.
    Momentum reduce(Momentum k) const;
    double area() const { return g1.kx * g2.ky - g1.ky * g2.kx; }

    // QWZ: [-pi, pi)^2.  Haldane: reciprocal cell of the lattice spanned by
    // a1, a2, the smallest cell on which the Bloch matrix is periodic.
    static Cell for_model(ModelKind kind);
};

Eigen::Matrix2cd pauli(int i);  // 0 -> identity, 1..3 -> sigma_i

// Tridiagonal interlayer matrices.  sigma1_chain has ones on both
// off-diagonals.  sigma2_chain is the Bernal variant: the upper entry of
// link l (1-based) is -i for odd l and +i for even l, so that
// (t/2)(S1 x s1 + S2 x s2) couples (l,B)-(l+1,A) on odd links and
// (l,A)-(l+1,B) on even links.
Eigen::MatrixXd sigma1_chain(int layers);
Eigen::MatrixXcd sigma2_chain(int layers);

HermitianMatrix build_layered(const FieldVector& h, const LayeredConfig& cfg);
HermitianMatrix build_layered(Momentum k, const LayeredConfig& cfg);

// Max entrywise |H - H^dagger|.
double hermiticity_defect(const Eigen::MatrixXcd& m);

// One Hamiltonian term as a labelled matrix (coefficient stripped).
struct HamiltonianTerm {
    std::string label;
    Eigen::MatrixXcd matrix;
};
std::vector<HamiltonianTerm> hamiltonian_terms(const LayeredConfig& cfg);

struct AnticommutatorEntry {
    std::string first;
    std::string second;
    double norm = 0.0;  // Frobenius norm of {first, second}
};

// All unordered pairs of distinct terms of the configured Hamiltonian.
std::vector<AnticommutatorEntry> anticommutator_table(const LayeredConfig& cfg);

// Labels of terms whose anticommutator with every other term is below tol.
std::vector<std::string> anticommuting_with_all(const std::vector<AnticommutatorEntry>& table,
                                                double tol = 1e-12);

}  // namespace layered
