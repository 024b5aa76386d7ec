#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "layered/quench.hpp"

namespace layered {

// What is measured on the grid: the global TASP 1 (x) sigma_i, or the ABBA
// subspace GTASP of label r, after a mixed quench along axis j.
struct TaspSource {
    enum class Kind { Global, Subspace };
    LayeredConfig cfg;
    int axis = 3;
    int sign = -1;
    Kind kind = Kind::Global;
    int r = 1;

    static TaspSource global(const LayeredConfig& cfg, int axis, int sign = -1);
    static TaspSource subspace(const LayeredConfig& cfg, int r, int axis, int sign = -1);

    TaspVector evaluate(Momentum k) const;
    // Field whose j-th component vanishes on the BIS: h_r for a subspace, h otherwise.
    FieldVector effective_field(Momentum k) const;
    // sign(h_j^eff) sqrt(|<O_j>|): same zero set as <O_j>, but changes sign across it.
    double indicator(Momentum k) const;
    double indicator(Momentum k, const TaspVector& value) const;
    // 1 for ABBA subspaces, N for the global BA observable.
    int layer_factor() const;
    std::string tag() const;
};

struct TaspGrid {
    int nx = 0;
    int ny = 0;
    Cell cell;
    TaspSource source;
    std::vector<TaspVector> values;   // index i + nx * j
    std::vector<double> indicator;

    // Node (i, j) sits at fractional ((i + 1/2)/nx, (j + 1/2)/ny).
    Momentum node(int i, int j) const;
    const TaspVector& at(int i, int j) const { return values[static_cast<size_t>(i + nx * j)]; }
};

TaspGrid sample_grid(const TaspSource& source, int nx, int ny, int threads = 1);
TaspGrid sample_grid(const TaspSource& source, const Cell& cell, int nx, int ny, int threads = 1);

struct BisContour {
    std::vector<Momentum> points;     // unwrapped: consecutive points are neighbours in k
    std::vector<std::array<double, 2>> field;  // unit dynamical field per point
    int criterion = 3;                // zero set of <O_j>
    std::array<int, 2> wrap{0, 0};    // cell translations between last and first point
    Momentum period;                  // the same translation in k
    double max_tasp = 0.0;            // largest |TASP component| over the points
    std::string tag;

    bool contractible() const { return wrap[0] == 0 && wrap[1] == 0; }
};

struct BisExtraction {
    std::vector<BisContour> accepted;
    std::vector<BisContour> rejected;  // zero contours of <O_j> where other components survive
};

inline constexpr double default_tol_bis = 1e-6;

// Periodic marching squares on the indicator, crossings refined by bisection.
// Contours keep the h_j^eff > 0 side on their left.
BisExtraction extract_bis(const TaspGrid& grid, double tol_bis = default_tol_bis);

// Unit vector of -d/dk_perp of the two components (j+1, j+2) (cyclic), k_perp being
// the left normal of the contour.  Throws DegenerateField when the derivative vanishes.
void dynamical_field(BisContour& contour, const TaspSource& source, double delta = 1e-4);

// Direction predicted by the closed forms: (h_r^p, h_r^q) for ABBA subspaces,
// (A_pj h_p, A_qj h_q) for BA.
std::vector<std::array<double, 2>> closed_form_field(const BisContour& contour,
                                                     const TaspSource& source);

struct WindingResult {
    int value = 0;      // rounded winding times layer factor
    double raw = 0.0;   // accumulated angle / 2 pi
    double residual = 0.0;
};

// Throws ContourError for fewer than 32 points or angle steps >= pi/2,
// NonQuantizedWinding when the residual reaches 0.05.
WindingResult winding(const BisContour& contour, int layer_factor);

// Sign changes of component i of the source along the contour, evaluated a
// distance delta off the contour on its left.
int sign_changes(const BisContour& contour, const TaspSource& source, int component,
                 double delta = 1e-4);

struct BisReport {
    BisExtraction extraction;
    std::vector<WindingResult> windings;  // per accepted contour
    int total = 0;
};

// Extract, attach fields, wind every accepted contour.
BisReport characterize(const TaspGrid& grid, double tol_bis = default_tol_bis,
                       double delta = 1e-4);

// CSV with header kx,ky,g1,g2,component
void write_contour_csv(std::ostream& os, const BisContour& contour);

}  // namespace layered
