#include "layered/spectra.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

#include "layered/errors.hpp"

namespace layered {

SineModes::SineModes(int n) : layers(n), theta(n), vectors(n, n) {
    const double norm = std::sqrt(2.0 / (n + 1));
    for (int r = 1; r <= n; ++r) {
        theta[r - 1] = r * std::numbers::pi / (n + 1);
        for (int l = 1; l <= n; ++l) vectors(l - 1, r - 1) = norm * std::sin(l * theta[r - 1]);
    }
}

bool SpectrumSample::nondegenerate() const {
    return std::all_of(groups.begin(), groups.end(), [](const auto& g) { return g.size() == 1; });
}

namespace {

double ba_level(const FieldVector& h, double q) {
    double rho2 = h.h1 * h.h1 + h.h2 * h.h2;
    double s = std::sqrt(rho2 + q * q) + q;
    return std::sqrt(h.h3 * h.h3 + s * s);
}

}  // namespace

std::vector<AnalyticLevel> analytic_spectrum(const FieldVector& h, const LayeredConfig& cfg) {
    SineModes modes(cfg.layers);
    std::vector<AnalyticLevel> out;
    for (int r = 1; r <= cfg.layers; ++r) {
        double c = modes.cos_theta(r);
        double e;
        if (cfg.stacking == Stacking::ABBA) {
            FieldVector hr{h.h1 + 2.0 * cfg.hopping * c, h.h2, h.h3};
            e = hr.norm();
        } else {
            e = ba_level(h, cfg.hopping * c);
        }
        out.push_back({r, e, -e});
    }
    return out;
}

std::vector<AnalyticLevel> analytic_spectrum(Momentum k, const LayeredConfig& cfg) {
    return analytic_spectrum(cfg.monolayer.field(k), cfg);
}

Eigen::VectorXd analytic_energies(const FieldVector& h, const LayeredConfig& cfg) {
    auto levels = analytic_spectrum(h, cfg);
    Eigen::VectorXd e(2 * levels.size());
    for (size_t i = 0; i < levels.size(); ++i) {
        e(2 * i) = levels[i].lower;
        e(2 * i + 1) = levels[i].upper;
    }
    std::sort(e.data(), e.data() + e.size());
    return e;
}

double analytic_gap(const FieldVector& h, const LayeredConfig& cfg) {
    double g = std::numeric_limits<double>::infinity();
    for (const auto& l : analytic_spectrum(h, cfg)) g = std::min(g, 2.0 * l.upper);
    return g;
}

std::vector<std::vector<int>> degeneracy_groups(const Eigen::VectorXd& sorted, double tol_deg) {
    std::vector<std::vector<int>> groups;
    for (int i = 0; i < sorted.size(); ++i) {
        if (i > 0) {
            double scale = std::max(1.0, std::abs(sorted(i)));
            if (sorted(i) - sorted(i - 1) <= tol_deg * scale) {
                groups.back().push_back(i);
                continue;
            }
        }
        groups.push_back({i});
    }
    return groups;
}

SpectrumSample numeric_spectrum(const HermitianMatrix& H, double tol_deg) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    if (es.info() != Eigen::Success) throw NonConvergence("eigensolver did not converge");
    SpectrumSample s;
    s.energies = es.eigenvalues();
    s.vectors = es.eigenvectors();
    s.groups = degeneracy_groups(s.energies, tol_deg);
    return s;
}

SpectrumSample numeric_spectrum(Momentum k, const LayeredConfig& cfg, double tol_deg) {
    HermitianMatrix H = build_layered(k, cfg);
    SpectrumSample s;
    try {
        s = numeric_spectrum(H, tol_deg);
    } catch (const NonConvergence&) {
        std::ostringstream os;
        os.precision(17);
        os << "eigensolver did not converge at k=(" << k.kx << ", " << k.ky << ") for "
           << cfg.describe();
        throw NonConvergence(os.str());
    }
    s.k = k;
    // labels: analytic (E, r) pairs sorted by E then r, matched positionally
    std::vector<std::pair<double, int>> an;
    for (const auto& l : analytic_spectrum(k, cfg)) {
        an.emplace_back(l.lower, l.r);
        an.emplace_back(l.upper, l.r);
    }
    std::sort(an.begin(), an.end());
    s.labels.resize(an.size());
    for (size_t i = 0; i < an.size(); ++i) s.labels[i] = an[i].second;
    return s;
}

BlockDiagonalization block_diagonalize_abba(const FieldVector& h, const LayeredConfig& cfg) {
    if (cfg.stacking != Stacking::ABBA)
        throw UnsupportedStacking("block diagonalization requires ABBA stacking, got " + cfg.describe());
    SineModes modes(cfg.layers);
    BlockDiagonalization bd;
    for (int r = 1; r <= cfg.layers; ++r)
        bd.blocks.push_back({r, modes.theta[r - 1],
                             {h.h1 + 2.0 * cfg.hopping * modes.cos_theta(r), h.h2, h.h3}});
    const int n = cfg.layers;
    bd.transform = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            bd.transform(2 * i, 2 * j) = modes.vectors(i, j);
            bd.transform(2 * i + 1, 2 * j + 1) = modes.vectors(i, j);
        }
    return bd;
}

BlockDiagonalization block_diagonalize_abba(Momentum k, const LayeredConfig& cfg) {
    return block_diagonalize_abba(cfg.monolayer.field(k), cfg);
}

HermitianMatrix block_matrix(const BlockDiagonalization& bd) {
    const int n = static_cast<int>(bd.blocks.size());
    HermitianMatrix M = HermitianMatrix::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        const auto& h = bd.blocks[i].h;
        M.block(2 * i, 2 * i, 2, 2) = h.h1 * pauli(1) + h.h2 * pauli(2) + h.h3 * pauli(3);
    }
    return M;
}

Eigen::VectorXd spin_expectations(const SpectrumSample& sample, int i) {
    const int dim = static_cast<int>(sample.energies.size());
    const Eigen::Matrix2cd s = pauli(i);
    Eigen::VectorXd out(dim);
    for (int m = 0; m < dim; ++m) {
        cplx acc = 0.0;
        for (int l = 0; l < dim / 2; ++l) {
            Eigen::Vector2cd v = sample.vectors.col(m).segment(2 * l, 2);
            acc += v.dot(s * v);
        }
        out(m) = acc.real();
    }
    return out;
}

IdentityReport eigvec_identities(const SpectrumSample& sample, const FieldVector& h,
                                 const LayeredConfig& cfg) {
    if (!sample.nondegenerate())
        throw IdentityUndefined("eigenvector identities need a nondegenerate spectrum");
    IdentityReport rep;
    Eigen::VectorXd s3 = spin_expectations(sample, 3);
    for (int m = 0; m < s3.size(); ++m)
        rep.sigma3 = std::max(rep.sigma3, std::abs(s3(m) - h.h3 / sample.energies(m)));
    if (cfg.stacking == Stacking::BA) {
        Eigen::VectorXd s1 = spin_expectations(sample, 1);
        Eigen::VectorXd s2 = spin_expectations(sample, 2);
        rep.sigma1 = rep.sigma2 = 0.0;
        const double rho2 = h.h1 * h.h1 + h.h2 * h.h2;
        for (int m = 0; m < s1.size(); ++m) {
            double e = sample.energies(m);
            double d = e * (e * e - h.h3 * h.h3 + rho2);
            double w = 2.0 * (e * e - h.h3 * h.h3) / d;
            rep.sigma1 = std::max(rep.sigma1, std::abs(s1(m) - h.h1 * w));
            rep.sigma2 = std::max(rep.sigma2, std::abs(s2(m) - h.h2 * w));
        }
    }
    return rep;
}

double multiset_distance(Eigen::VectorXd a, Eigen::VectorXd b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    std::sort(a.data(), a.data() + a.size());
    std::sort(b.data(), b.data() + b.size());
    return a.size() ? (a - b).cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace layered
