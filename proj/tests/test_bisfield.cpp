#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "layered/bisfield.hpp"
#include "layered/errors.hpp"
#include "layered/topology.hpp"
#include "oracles.hpp"

using namespace layered;
constexpr double pi = std::numbers::pi;

namespace {

LayeredConfig abba(double m, double t, int n = 2) { return {Stacking::ABBA, n, t, MonolayerModel::qwz(m)}; }
LayeredConfig ba(double m, double t, int n = 2) { return {Stacking::BA, n, t, MonolayerModel::qwz(m)}; }

int abba_total(const LayeredConfig& cfg, int res, double delta = 1e-4) {
    int total = 0;
    for (int r = 1; r <= cfg.layers; ++r)
        total += characterize(sample_grid(TaspSource::subspace(cfg, r, 3), res, res), default_tol_bis, delta).total;
    return total;
}

double direction_error(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return std::hypot(a[0] - b[0], a[1] - b[1]);
}

}  // namespace

TEST_CASE("grid sampling") {
    auto src = TaspSource::subspace(abba(1.0, 0.4), 1, 3);
    auto g = sample_grid(src, 256, 256, 4);
    REQUIRE(g.values.size() == 65536u);
    for (const auto& v : g.values)
        for (int i = 1; i <= 3; ++i) CHECK(std::isfinite(v(i)));

    auto glob = sample_grid(TaspSource::global(ba(1.0, 0.4), 3), 64, 64);
    for (const auto& v : glob.values) CHECK(v(3) <= 0.0);
    for (const auto& v : g.values) CHECK(v(3) <= 0.0);

    // half-offset nodes coincide when the resolution ratio is odd
    auto coarse = sample_grid(src, 16, 16);
    auto fine = sample_grid(src, 272, 272, 3);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
            CHECK(coarse.node(i, j).kx == fine.node(17 * i + 8, 17 * j + 8).kx);
            for (int c = 1; c <= 3; ++c) CHECK(coarse.at(i, j)(c) == fine.at(17 * i + 8, 17 * j + 8)(c));
        }
    // thread count does not change values
    auto serial = sample_grid(src, 64, 64, 1);
    auto threaded = sample_grid(src, 64, 64, 8);
    for (size_t q = 0; q < serial.values.size(); ++q)
        for (int c = 1; c <= 3; ++c) CHECK(serial.values[q](c) == threaded.values[q](c));

    CHECK_THROWS_AS(sample_grid(src, 8, 64), ConfigError);
    CHECK_THROWS_AS(TaspSource::subspace(ba(1.0, 0.4), 1, 3), UnsupportedStacking);
}

TEST_CASE("monolayer ring and empty BIS") {
    LayeredConfig mono{Stacking::ABBA, 1, 0.0, MonolayerModel::qwz(1.0)};
    auto ext = extract_bis(sample_grid(TaspSource::global(mono, 3), 128, 128));
    REQUIRE(ext.accepted.size() == 1);
    CHECK(ext.rejected.empty());
    const auto& ring = ext.accepted[0];
    CHECK(ring.contractible());
    CHECK(ring.points.size() >= 32);
    CHECK(ring.max_tasp < default_tol_bis);
    for (const auto& k : ring.points) CHECK(std::abs(std::cos(k.kx) + std::cos(k.ky) - 1.0) < 1e-8);
    // the ring encloses k = 0: its winding around the origin is +-1
    double turn = 0.0;
    for (size_t i = 0; i < ring.points.size(); ++i) {
        const auto& a = ring.points[i];
        const auto& b = ring.points[(i + 1) % ring.points.size()];
        turn += std::atan2(a.kx * b.ky - a.ky * b.kx, a.kx * b.kx + a.ky * b.ky);
    }
    CHECK(std::abs(std::abs(turn) - 2 * pi) < 1e-9);

    LayeredConfig far{Stacking::ABBA, 1, 0.0, MonolayerModel::qwz(3.5)};
    auto none = characterize(sample_grid(TaspSource::global(far, 3), 64, 64));
    CHECK(none.extraction.accepted.empty());
    CHECK(none.extraction.rejected.empty());
    CHECK(none.total == 0);
}

TEST_CASE("haldane BA bilayer has three closed rings") {
    LayeredConfig cfg{Stacking::BA, 2, 0.4, MonolayerModel::haldane(2 * std::sqrt(3.0))};
    auto rep = characterize(sample_grid(TaspSource::global(cfg, 3), 256, 256, 4));
    REQUIRE(rep.extraction.accepted.size() == 3);
    CHECK(rep.extraction.rejected.empty());
    for (const auto& c : rep.extraction.accepted) {
        CHECK(c.contractible());
        CHECK(c.max_tasp < default_tol_bis);
        for (const auto& k : c.points) CHECK(std::abs(cfg.monolayer.field(k).h3) < 1e-7);
    }
    LayeredConfig mono{Stacking::ABBA, 1, 0.0, cfg.monolayer};
    auto c = chern_fhs_confirmed(mono, 1, 60);
    CHECK(rep.total == 2 * c.value);
}

TEST_CASE("dynamical field matches the closed forms") {
    SUBCASE("ABBA subspaces") {
        for (int r = 1; r <= 2; ++r) {
            auto src = TaspSource::subspace(abba(1.0, 0.4), r, 3);
            auto ext = extract_bis(sample_grid(src, 128, 128));
            REQUIRE(ext.accepted.size() == 1);
            auto c = ext.accepted[0];
            dynamical_field(c, src);
            auto ref = closed_form_field(c, src);
            double worst = 0.0;
            for (size_t i = 0; i < c.points.size(); ++i) {
                CHECK(std::abs(std::hypot(c.field[i][0], c.field[i][1]) - 1.0) < 1e-12);
                worst = std::max(worst, direction_error(c.field[i], ref[i]));
            }
            CHECK(worst < 1e-6);
        }
    }
    SUBCASE("point with h2 = 0 and h1 + t > 0") {
        auto src = TaspSource::subspace(abba(1.0, 0.4), 1, 3);
        // h3 = 0 at ky = 0 needs cos kx = 0, so kx = pi/2 where h1 + t = 1.4
        BisContour c;
        for (int i = 0; i < 64; ++i) c.points.push_back(Momentum{pi / 2, -0.01 + 0.02 * i / 63.0});
        // walking down keeps the h3 > 0 side (kx > pi/2) on the left
        std::reverse(c.points.begin(), c.points.end());
        dynamical_field(c, src);
        auto mid = c.field[32];
        CHECK(std::abs(c.points[32].ky) < 2e-4);
        CHECK(direction_error(mid, {1.0, 0.0}) < 1e-3);
    }
    SUBCASE("BA bilayer, j = 3: direction of (h1, h2)") {
        auto src = TaspSource::global(ba(1.0, 0.4), 3);
        auto ext = extract_bis(sample_grid(src, 128, 128));
        REQUIRE(ext.accepted.size() == 1);
        auto c = ext.accepted[0];
        dynamical_field(c, src);
        double worst = 0.0;
        for (size_t i = 0; i < c.points.size(); ++i) {
            auto h = src.cfg.monolayer.field(c.points[i]);
            double n = std::hypot(h.h1, h.h2);
            worst = std::max(worst, direction_error(c.field[i], {h.h1 / n, h.h2 / n}));
        }
        CHECK(worst < 1e-6);
    }
    SUBCASE("BA bilayer, j = 1") {
        auto src = TaspSource::global(ba(1.0, 0.4), 1);
        auto ext = extract_bis(sample_grid(src, 128, 128));
        REQUIRE_FALSE(ext.accepted.empty());
        for (auto c : ext.accepted) {
            CHECK(c.criterion == 1);
            dynamical_field(c, src);
            auto ref = closed_form_field(c, src);
            double worst = 0.0;
            for (size_t i = 0; i < c.points.size(); ++i) worst = std::max(worst, direction_error(c.field[i], ref[i]));
            CHECK(worst < 1e-6);
        }
    }
    SUBCASE("closed form vanishing at a point") {
        BisContour c;
        c.points.push_back(Momentum{0, 0});
        CHECK_THROWS_AS(closed_form_field(c, TaspSource::global(ba(1.0, 0.4), 3)), DegenerateField);
    }
}

TEST_CASE("winding basics") {
    BisContour c;
    for (int i = 0; i < 64; ++i) {
        double a = 2 * pi * i / 64;
        c.points.push_back(Momentum{std::cos(a), std::sin(a)});
        c.field.push_back({1.0, 0.0});
    }
    auto w = winding(c, 1);
    CHECK(w.value == 0);
    CHECK(w.residual == 0.0);

    for (int i = 0; i < 64; ++i) {
        double a = -2 * 2 * pi * i / 64;
        c.field[static_cast<size_t>(i)] = {std::cos(a), std::sin(a)};
    }
    auto w2 = winding(c, 3);
    CHECK(w2.value == -6);
    CHECK(std::abs(w2.raw + 2.0) < 1e-12);

    BisContour small;
    for (int i = 0; i < 31; ++i) small.field.push_back({1.0, 0.0}), small.points.push_back(Momentum{0.0, 0.1 * i});
    CHECK_THROWS_AS(winding(small, 1), ContourError);

    // a half turn between neighbours is unresolved
    c.field[10] = {-c.field[9][0], -c.field[9][1]};
    CHECK_THROWS_AS(winding(c, 1), ContourError);
}

TEST_CASE("bilayer winding values at m = 1, t = 0.4") {
    auto cfg = abba(1.0, 0.4);
    for (int r = 1; r <= 2; ++r) {
        auto rep = characterize(sample_grid(TaspSource::subspace(cfg, r, 3), 256, 256, 4));
        REQUIRE(rep.windings.size() == 1);
        CHECK(rep.windings[0].value == -1);
        CHECK(rep.windings[0].residual < 0.05);
    }
    auto b = characterize(sample_grid(TaspSource::global(ba(1.0, 0.4), 3), 256, 256, 4));
    CHECK(b.total == -2);
    REQUIRE(b.windings.size() == 1);
    CHECK(b.windings[0].value == -2);
}

TEST_CASE("refinement and delta invariance") {
    for (auto cfg : {abba(1.0, 0.4), abba(1.0, 1.2), abba(-1.0, 0.6), abba(1.5, 0.3, 3)}) {
        int ref = abba_total(cfg, 128);
        CHECK(abba_total(cfg, 256) == ref);
        CHECK(abba_total(cfg, 512) == ref);
        CHECK(abba_total(cfg, 128, 1e-3) == ref);
    }
    for (auto cfg : {ba(1.0, 0.4), ba(1.0, 1.0, 3), ba(-1.0, 0.4)}) {
        auto src = TaspSource::global(cfg, 3);
        int ref = characterize(sample_grid(src, 128, 128)).total;
        CHECK(characterize(sample_grid(src, 256, 256)).total == ref);
        CHECK(characterize(sample_grid(src, 512, 512, 4)).total == ref);
        CHECK(characterize(sample_grid(src, 128, 128), default_tol_bis, 1e-3).total == ref);
    }
}

TEST_CASE("subspace winding equals the subsystem degree") {
    for (double m : {-1.5, -0.5, 0.5, 1.0, 1.7, 2.5})
        for (double t : {0.2, 0.45, 0.9}) {
            for (int n : {2, 3}) {
                auto cfg = abba(m, t, n);
                SineModes modes(n);
                for (int r = 1; r <= n; ++r) {
                    double shift = 2 * t * modes.cos_theta(r);
                    int oracle_deg = oracle::shifted_qwz_degree(m, shift);
                    auto src = TaspSource::subspace(cfg, r, 3);
                    int w = characterize(sample_grid(src, 256, 256, 4)).total;
                    CHECK_MESSAGE(w == oracle_deg, "m=" << m << " t=" << t << " N=" << n << " r=" << r);
                    auto h = [&](Momentum k) { return src.effective_field(k); };
                    CHECK(chern_two_band_confirmed(h, Cell::for_model(ModelKind::QWZ), 60).value == oracle_deg);
                }
            }
        }
}

TEST_CASE("trivial regime: no sigma1 zero along BIS_I") {
    auto trivial = TaspSource::subspace(abba(1.0, 1.2), 1, 3);
    auto rep = characterize(sample_grid(trivial, 256, 256));
    REQUIRE_FALSE(rep.extraction.accepted.empty());
    for (const auto& c : rep.extraction.accepted) CHECK(sign_changes(c, trivial, 1) == 0);
    CHECK(abba_total(abba(1.0, 1.2), 256) == 0);

    // topological counterpart: the sigma1 component changes sign twice
    auto topo = TaspSource::subspace(abba(1.0, 0.4), 1, 3);
    auto ext = extract_bis(sample_grid(topo, 256, 256));
    REQUIRE(ext.accepted.size() == 1);
    CHECK(sign_changes(ext.accepted[0], topo, 1) == 2);
}

TEST_CASE("contour csv") {
    auto src = TaspSource::subspace(abba(1.0, 0.4), 1, 3);
    auto rep = characterize(sample_grid(src, 64, 64));
    REQUIRE(rep.extraction.accepted.size() == 1);
    std::ostringstream os;
    write_contour_csv(os, rep.extraction.accepted[0]);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "kx,ky,g1,g2,component");
    size_t rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 4);
        CHECK(line.substr(line.rfind(',') + 1) == src.tag());
    }
    CHECK(rows == rep.extraction.accepted[0].points.size());
    CHECK(os.str().find('\r') == std::string::npos);
}
