#pragma once

#include <array>
#include <string>
#include <vector>

#include "layered/spectra.hpp"

namespace layered {

// Spin-polarization components indexed 1..3 through operator().
struct TaspVector {
    std::array<double, 3> v{0.0, 0.0, 0.0};

    double operator()(int i) const { return v[i - 1]; }
    double& operator()(int i) { return v[i - 1]; }
    double max_abs() const;
};

// Initial density matrix before the quench.  Mixed: (1/N) 1 (x) (1 + s sigma_j)/2.
// Pure: c c^dagger (x) (1 + s sigma_j)/2 with |c| = 1.  The default sign s = -1
// is the ground state of a prequench field along +j.
struct InitialState {
    enum class Kind { Mixed, Pure };
    Kind kind = Kind::Mixed;
    int axis = 3;
    int sign = -1;
    Eigen::VectorXcd amplitudes;  // pure only, length N

    static InitialState mixed(int axis, int sign = -1);
    static InitialState pure(Eigen::VectorXcd c, int axis, int sign = -1);

    HermitianMatrix density(int layers) const;
};

struct Observable {
    enum class Kind { Global, SubspaceABBA, BilayerABBA };
    Kind kind = Kind::Global;
    int component = 1;  // sigma_i
    int r = 1;          // subspace label; for BilayerABBA 1 = I (1+s1), 2 = II (1-s1)

    static Observable global(int i) { return {Kind::Global, i, 1}; }
    static Observable subspace(int r, int i) { return {Kind::SubspaceABBA, i, r}; }
    static Observable bilayer(int which, int i) { return {Kind::BilayerABBA, i, which}; }

    HermitianMatrix matrix(int layers) const;
    std::string label() const;
};

// Infinite-time average sum_E Tr[P_E rho P_E O] over degeneracy groups of H.
double time_averaged_expectation(const HermitianMatrix& H, const HermitianMatrix& rho,
                                 const HermitianMatrix& O, double tol_deg = default_tol_deg);
double time_averaged_expectation(const SpectrumSample& s, const HermitianMatrix& rho,
                                 const HermitianMatrix& O);

// Same average for 1 (x) sigma_i, i = 1..3, from one diagonalization.
TaspVector tasp_spectral(Momentum k, const LayeredConfig& cfg, const InitialState& state,
                         double tol_deg = default_tol_deg);

// Mixed state closed forms.  Throws SingularPoint where some E_m vanishes.
TaspVector tasp_closed_form(const FieldVector& h, const LayeredConfig& cfg, int j, int sign = -1);
TaspVector tasp_closed_form(Momentum k, const LayeredConfig& cfg, int j, int sign = -1);

// s h_r^i h_r^j / E_r^2, the time average of N a_r a_r^T (x) sigma_i.
// Throws UnsupportedStacking for BA.
TaspVector gtasp_abba(const FieldVector& h, const LayeredConfig& cfg, int j, int r, int sign = -1);
TaspVector gtasp_abba(Momentum k, const LayeredConfig& cfg, int j, int r, int sign = -1);

struct BaCoefficients {
    int layers = 2;
    Eigen::Matrix3d A = Eigen::Matrix3d::Zero();  // A(i-1, j-1) = A_ij
    std::vector<double> energies;                 // E_m, ascending
    std::vector<double> D;                        // D_m = E_m (E_m^2 - h3^2 + h1^2 + h2^2)

    double operator()(int i, int j) const { return A(i - 1, j - 1); }
};

// BA coefficients with TASP_i = s h_i h_j A_ij.  Throws UnsupportedStacking / SingularPoint.
BaCoefficients ba_coefficients(const FieldVector& h, const LayeredConfig& cfg);
BaCoefficients ba_coefficients(Momentum k, const LayeredConfig& cfg);

struct PureStateReport {
    double residual = 0.0;        // max |TASP_i - s h3 sum_m <s_i>_m / (2N E_m)|
    double h3_zero_leakage = 0.0; // max |TASP_i| at sampled points with |h3| < 1e-9
    int points = 0;               // nondegenerate points used
    int skipped = 0;
};

// Samples the straight k-line from k0 to k1 (inclusive) at n points.
PureStateReport pure_state_check(const LayeredConfig& cfg, const InitialState& state, Momentum k0,
                                 Momentum k1, int n);

}  // namespace layered
