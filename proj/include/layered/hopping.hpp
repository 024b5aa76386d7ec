#pragma once

#include <functional>
#include <string>

#include "layered/quench.hpp"

namespace layered {

struct HoppingEstimate {
    double t_hat = 0.0;     // non-negative branch
    double spread = 0.0;    // max deviation of the individual estimates from t_hat
    std::string method;
    double residual = 0.0;  // disagreement between channels / points
    int samples = 0;
};

// Subspace-1 GTASP measured after a mixed j = 3 quench at momentum k.
using GtaspMeasurement = std::function<TaspVector(Momentum)>;

// Locates the zero line of the sigma1 component of the measurement on a
// resolution^2 grid of the monolayer's cell (BIS crossings excluded), and
// inverts h1 + 2 t cos(theta_1) = 0 there.  Throws TrivialRegime when no zero
// line exists.
HoppingEstimate estimate_t_abba(const GtaspMeasurement& measure, const MonolayerModel& monolayer,
                                int layers, int resolution = 128);

// TASP of the BA bilayer, QWZ m = 1, mixed j = 3 quench, at the reference
// momenta (pi/4, 0), (0, pi/4) and (0, 0).
struct BaSamples {
    double sigma1 = 0.0;  // <1 x s1> at (pi/4, 0)
    double sigma2 = 0.0;  // <1 x s2> at (0, pi/4)
    double sigma3 = 0.0;  // <1 x s3> at (0, 0)
};

BaSamples ba_reference_samples(double t);

// |s1| = |s2| = 1/(2 + t^2) and |s3| = (2 + t^2)/(2 + 2t^2), inverted for t >= 0.
// Throws InconsistentSample when a magnitude is outside the invertible range
// or the channels disagree by more than 1e-6 (1 + t).
HoppingEstimate estimate_t_ba(const BaSamples& samples);

// Generic inversion of a monotone map t -> value on [t_lo, t_hi] by bisection.
double invert_monotone(const std::function<double(double)>& f, double target, double t_lo,
                       double t_hi, double tol = 1e-13);

}  // namespace layered
