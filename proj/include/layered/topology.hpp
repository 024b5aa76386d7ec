#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "layered/models.hpp"

namespace layered {

// Sign convention: chern_two_band(QWZ, m = 1) = -1.  All invariants below
// follow it, including the lattice field-strength result.

struct ChernResult {
    int value = 0;
    double raw = 0.0;      // unrounded sum
    double gap_min = 0.0;  // smallest gap (or |h|) seen on the grid
    int grid = 0;          // grid actually used after confirmation
};

inline constexpr double default_gap_tol = 1e-6;
inline constexpr int default_chern_grid = 100;

// Lattice field strength of the lowest `filled` bands over the model's cell.
// Throws GaplessConfiguration when the gap above band `filled` drops below gap_tol.
ChernResult chern_fhs(const LayeredConfig& cfg, int filled, int grid_n = default_chern_grid,
                      double gap_tol = default_gap_tol, int threads = 1);

using FieldFunction = std::function<FieldVector(Momentum)>;

// Degree of k -> h/|h| from signed solid angles of grid triangles.
ChernResult chern_two_band(const FieldFunction& h, const Cell& cell, int grid_n = default_chern_grid,
                           double gap_tol = default_gap_tol);

// Recomputes on doubled grids until two consecutive integers agree.
ChernResult chern_two_band_confirmed(const FieldFunction& h, const Cell& cell,
                                     int grid_n = default_chern_grid, double gap_tol = default_gap_tol,
                                     int max_grid = 1600);
ChernResult chern_fhs_confirmed(const LayeredConfig& cfg, int filled, int grid_n = default_chern_grid,
                                double gap_tol = default_gap_tol, int threads = 1, int max_grid = 800);

// Sum over ABBA subsystems of chern_two_band(h_r), each confirmed by doubling.
ChernResult total_chern_abba(const LayeredConfig& cfg, int grid_n = default_chern_grid,
                             double gap_tol = default_gap_tol);

struct PhaseCell {
    double t = 0.0;
    double m = 0.0;
    std::optional<int> chern;  // empty on boundary cells
    double gap_min = 0.0;
};

struct PhaseDiagram {
    Stacking stacking = Stacking::ABBA;
    ModelKind model = ModelKind::QWZ;
    int layers = 1;
    std::vector<double> t_values;
    std::vector<double> m_values;
    std::vector<PhaseCell> cells;  // index it + nt * im

    const PhaseCell& at(int it, int im) const {
        return cells[static_cast<size_t>(it + static_cast<int>(t_values.size()) * im)];
    }
};

struct PhaseScan {
    Stacking stacking = Stacking::ABBA;
    ModelKind model = ModelKind::QWZ;
    int layers = 1;
    double t_min = 0.0, t_max = 1.0;
    double m_min = -3.0, m_max = 3.0;
    int t_steps = 16, m_steps = 16;
    int grid_n = 60;
    double gap_tol = default_gap_tol;
};

// Cell values are inclusive linspace points.  Chern at half filling: sum of
// subsystem degrees for ABBA, lattice field strength for BA.
PhaseDiagram phase_diagram(const PhaseScan& scan, int threads = 1);

void write_phase_csv(std::ostream& os, const PhaseDiagram& pd);
// gnuplot "matrix nonuniform" layout; boundary cells written as NaN.
void write_phase_matrix(std::ostream& os, const PhaseDiagram& pd);

struct TransitionPoint {
    int r = 1;
    double t = 0.0;
    double m = 0.0;
    Momentum k;   // gap-closing momentum of subsystem r
};

// QWZ ABBA transitions (m - cos ky)^2 + (2 t cos theta_r)^2 = 1, cos ky = +-1,
// sampled at `samples` values of t in [t_min, t_max].
std::vector<TransitionPoint> transition_lines_abba(int layers, double t_min, double t_max,
                                                   int samples);

// True when some transition curve separates the two (t, m) points, or one of
// them lies on a curve (|G| < 1e-12).
bool separated_by_transition(int layers, double t_a, double m_a, double t_b, double m_b);

}  // namespace layered
