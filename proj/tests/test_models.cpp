#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "layered/errors.hpp"
#include "layered/models.hpp"
#include "oracles.hpp"

using namespace layered;
constexpr double pi = std::numbers::pi;

TEST_CASE("qwz field values") {
    auto a = qwz_field({0, 0}, 1.0);
    CHECK(a.h1 == 0.0);
    CHECK(a.h2 == 0.0);
    CHECK(a.h3 == -1.0);
    auto b = qwz_field({pi / 2, 0}, 1.0);
    CHECK(b.h1 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(b.h3) < 1e-15);
    auto c = qwz_field({pi / 4, 0}, 1.0);
    CHECK(std::abs(c.h1 - std::sqrt(2.0) / 2) < 1e-15);
    CHECK(std::abs(c.h3 + std::sqrt(2.0) / 2) < 1e-15);
}

TEST_CASE("haldane field values") {
    const double s3 = std::sqrt(3.0);
    auto a = haldane_field({0, 0}, 2 * s3);
    CHECK(a.h1 == doctest::Approx(12.0));
    CHECK(a.h2 == 0.0);
    CHECK(a.h3 == doctest::Approx(2 * s3));
    auto b = haldane_field({0, 0}, 0.0);
    CHECK(b.h1 == doctest::Approx(12.0));
    CHECK(b.h3 == 0.0);

    // second transcription of the three sums
    for (int s = 0; s < 50; ++s) {
        double kx = oracle::uniform(-4, 4), ky = oracle::uniform(-4, 4), m = oracle::uniform(-5, 5);
        double h1 = 4 * (std::cos(ky) + std::cos(-s3 / 2 * kx - ky / 2) + std::cos(s3 / 2 * kx - ky / 2));
        double h2 = 4 * (std::sin(ky) + std::sin(-s3 / 2 * kx - ky / 2) + std::sin(s3 / 2 * kx - ky / 2));
        double h3 = m - 2 * (std::sin(-s3 * kx) + std::sin(-s3 / 2 * kx + 1.5 * ky) +
                             std::sin(-s3 / 2 * kx - 1.5 * ky));
        auto h = haldane_field({kx, ky}, m);
        CHECK(std::abs(h.h1 - h1) < 1e-14);
        CHECK(std::abs(h.h2 - h2) < 1e-14);
        CHECK(std::abs(h.h3 - h3) < 1e-14);
    }
}

TEST_CASE("monolayer reduction for N = 1") {
    FieldVector h{0.3, -0.7, 1.1};
    for (auto st : {Stacking::ABBA, Stacking::BA}) {
        auto H = build_layered(h, LayeredConfig{st, 1, 0.4, {}});
        REQUIRE(H.rows() == 2);
        CHECK(std::abs(H(0, 0) - cplx(1.1)) < 1e-15);
        CHECK(std::abs(H(0, 1) - cplx(0.3, 0.7)) < 1e-15);
        CHECK(std::abs(H(1, 0) - cplx(0.3, -0.7)) < 1e-15);
        CHECK(std::abs(H(1, 1) - cplx(-1.1)) < 1e-15);
    }
}

TEST_CASE("bilayer matrices match the displayed 4x4 forms") {
    const double t = 0.4;
    for (int s = 0; s < 20; ++s) {
        Momentum k{oracle::uniform(-pi, pi), oracle::uniform(-pi, pi)};
        auto h = qwz_field(k, 1.0);
        cplx hm(h.h1, -h.h2), hp(h.h1, h.h2);
        Eigen::Matrix4cd abba, ba;
        abba << h.h3, hm, 0, t,
                hp, -h.h3, t, 0,
                0, t, h.h3, hm,
                t, 0, hp, -h.h3;
        ba << h.h3, hm, 0, 0,
              hp, -h.h3, t, 0,
              0, t, h.h3, hm,
              0, 0, hp, -h.h3;
        LayeredConfig c1{Stacking::ABBA, 2, t, MonolayerModel::qwz(1.0)};
        LayeredConfig c2{Stacking::BA, 2, t, MonolayerModel::qwz(1.0)};
        CHECK((build_layered(k, c1) - abba).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((build_layered(k, c2) - ba).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("layered builder agrees with site-by-site assembly and is Hermitian") {
    for (int s = 0; s < 60; ++s) {
        int n = 1 + s % 6;
        auto st = s % 2 ? Stacking::BA : Stacking::ABBA;
        double t = oracle::uniform(-2, 2);
        LayeredConfig cfg{st, n, t, s % 3 ? MonolayerModel::qwz(oracle::uniform(-3, 3))
                                          : MonolayerModel::haldane(oracle::uniform(-6, 6))};
        Momentum k{oracle::uniform(-4, 4), oracle::uniform(-4, 4)};
        auto H = build_layered(k, cfg);
        CHECK(hermiticity_defect(H) < 1e-12);
        auto ref = oracle::layered(cfg.monolayer.field(k), st, n, t);
        CHECK((H - ref).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("tensor form of the BA chain") {
    // (t/2)(S1 x s1 + S2 x s2) reproduces the Bernal couplings
    for (int n = 2; n <= 6; ++n) {
        const double t = 0.7;
        Eigen::MatrixXcd inter = 0.5 * t *
            (oracle::kron(sigma1_chain(n).cast<cplx>(), oracle::sx()) + oracle::kron(sigma2_chain(n), oracle::sy()));
        auto ref = oracle::layered(FieldVector{}, Stacking::BA, n, t);
        CHECK((inter - ref).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("anticommutator table") {
    auto find = [](const std::vector<AnticommutatorEntry>& tab, const std::string& a, const std::string& b) {
        for (const auto& e : tab)
            if ((e.first == a && e.second == b) || (e.first == b && e.second == a)) return e.norm;
        return -1.0;
    };
    auto abba = anticommutator_table(LayeredConfig{Stacking::ABBA, 2, 0.4, {}});
    CHECK(find(abba, "1⊗σ2", "Σ1⊗σ1") < 1e-12);
    CHECK(find(abba, "1⊗σ3", "Σ1⊗σ1") < 1e-12);

    auto ba = anticommutator_table(LayeredConfig{Stacking::BA, 2, 0.4, {}});
    // frozen from direct products: {1 x s1, S2 x s2} = S2 x {s1, s2} = 0
    CHECK(find(ba, "1⊗σ1", "Σ2⊗σ2") < 1e-12);
    CHECK(find(ba, "1⊗σ1", "Σ1⊗σ1") == doctest::Approx(4.0));
    CHECK(find(ba, "1⊗σ2", "Σ2⊗σ2") == doctest::Approx(4.0));

    for (int n = 1; n <= 6; ++n)
        for (auto st : {Stacking::ABBA, Stacking::BA}) {
            auto tab = anticommutator_table(LayeredConfig{st, n, 0.4, {}});
            if (n > 1) CHECK(find(tab, "1⊗σ3", "Σ1⊗σ1") < 1e-12);
            auto all = anticommuting_with_all(tab);
            CHECK(std::find(all.begin(), all.end(), "1⊗σ3") != all.end());
        }
}

TEST_CASE("sampling cells") {
    auto q = Cell::for_model(ModelKind::QWZ);
    CHECK(q.area() == doctest::Approx(4 * pi * pi));
    auto h = Cell::for_model(ModelKind::Haldane);
    CHECK(h.area() > 0);
    // the Bloch matrix is periodic on the Haldane cell
    LayeredConfig cfg{Stacking::BA, 2, 0.4, MonolayerModel::haldane(2 * std::sqrt(3.0))};
    for (int s = 0; s < 10; ++s) {
        Momentum k{oracle::uniform(-3, 3), oracle::uniform(-3, 3)};
        auto H0 = build_layered(k, cfg);
        CHECK((build_layered(k + h.g1, cfg) - H0).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((build_layered(k + h.g2, cfg) - H0).cwiseAbs().maxCoeff() < 1e-12);
        auto r = h.reduce(k);
        auto uv = h.fractional(r);
        CHECK(uv[0] >= 0.0);
        CHECK(uv[0] < 1.0);
        CHECK(uv[1] >= 0.0);
        CHECK(uv[1] < 1.0);
        CHECK((build_layered(r, cfg) - H0).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("parsing and validation") {
    CHECK(parse_stacking("ABBA") == Stacking::ABBA);
    CHECK(parse_stacking("ab&ba") == Stacking::ABBA);
    CHECK(parse_stacking("ba") == Stacking::BA);
    CHECK_THROWS_AS(parse_stacking("aa"), ConfigError);
    CHECK(parse_model("Haldane") == ModelKind::Haldane);
    CHECK_THROWS_AS(parse_model("kane-mele"), ConfigError);
    CHECK_THROWS_AS((LayeredConfig{Stacking::BA, 0, 0.1, {}}.validate()), ConfigError);
}
