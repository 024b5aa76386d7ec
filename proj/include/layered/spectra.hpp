#pragma once

#include <vector>

#include "layered/models.hpp"

namespace layered {

// Sine modes of the open chain: theta_r = r pi/(N+1), a_r(n) = sqrt(2/(N+1)) sin(n theta_r).
struct SineModes {
    int layers = 1;
    std::vector<double> theta;   // theta[r-1]
    Eigen::MatrixXd vectors;     // column r-1 is a_r; symmetric orthogonal

    explicit SineModes(int n);
    double cos_theta(int r) const { return std::cos(theta[r - 1]); }
};

// One analytic pair +-E for label r (1-based).
struct AnalyticLevel {
    int r = 1;
    double upper = 0.0;
    double lower = 0.0;
};

struct SpectrumSample {
    Momentum k;
    Eigen::VectorXd energies;    // ascending
    Eigen::MatrixXcd vectors;    // column i belongs to energies(i)
    std::vector<std::vector<int>> groups;
    std::vector<int> labels;     // analytic label r per eigenvalue, empty if not matched

    bool nondegenerate() const;
};

struct SubsystemField {
    int r = 1;
    double theta = 0.0;
    FieldVector h;
};

struct BlockDiagonalization {
    std::vector<SubsystemField> blocks;
    Eigen::MatrixXd transform;   // S = S_sigma1 (x) 1, S = S^T = S^-1
};

inline constexpr double default_tol_deg = 1e-9;

// ABBA: +-|h_r| with h_r = (h1 + 2t cos theta_r, h2, h3).
// BA: +-sqrt(h3^2 + (sqrt(h1^2 + h2^2 + q^2) + q)^2) with q = t cos theta_r.
std::vector<AnalyticLevel> analytic_spectrum(const FieldVector& h, const LayeredConfig& cfg);
std::vector<AnalyticLevel> analytic_spectrum(Momentum k, const LayeredConfig& cfg);
Eigen::VectorXd analytic_energies(const FieldVector& h, const LayeredConfig& cfg);  // ascending

// Minimum over r of the direct gap 2 E_r, the smallest |E| being the gap edge at half filling.
double analytic_gap(const FieldVector& h, const LayeredConfig& cfg);

// Groups consecutive sorted eigenvalues closer than tol_deg * max(1, |E|).
std::vector<std::vector<int>> degeneracy_groups(const Eigen::VectorXd& sorted, double tol_deg);

SpectrumSample numeric_spectrum(const HermitianMatrix& H, double tol_deg = default_tol_deg);
SpectrumSample numeric_spectrum(Momentum k, const LayeredConfig& cfg, double tol_deg = default_tol_deg);

// Subsystem fields of an ABBA stack at k; throws UnsupportedStacking for BA.
BlockDiagonalization block_diagonalize_abba(const FieldVector& h, const LayeredConfig& cfg);
BlockDiagonalization block_diagonalize_abba(Momentum k, const LayeredConfig& cfg);

// Assembled direct sum of the 2x2 blocks h_r . sigma.
HermitianMatrix block_matrix(const BlockDiagonalization& bd);

struct IdentityReport {
    double sigma3 = 0.0;     // max_m |<1x s3>_m - h3/E_m|
    double sigma1 = -1.0;    // BA only, -1 when not evaluated
    double sigma2 = -1.0;
};

// Throws IdentityUndefined if the sample has a degenerate group.
IdentityReport eigvec_identities(const SpectrumSample& sample, const FieldVector& h,
                                 const LayeredConfig& cfg);

// Per-eigenvector <1 (x) sigma_i>, i in 1..3.
Eigen::VectorXd spin_expectations(const SpectrumSample& sample, int i);

double multiset_distance(Eigen::VectorXd a, Eigen::VectorXd b);

}  // namespace layered
