#include <doctest.h>

#include <cmath>
#include <random>

#include "sbp/ansatz.hpp"
#include "sbp/energy.hpp"
#include "sbp/errors.hpp"
#include "support.hpp"

using namespace sbp;

namespace {

constexpr double kPi = 3.14159265358979323846;

double max_abs(const ScalarField3D& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::fabs(v));
    return m;
}

// reflection index for the periodic grid, x -> -x (the face plane i = 0 maps to itself)
int mirror(int i, int n) { return (n - i) % n; }

}  // namespace

TEST_SUITE("ansatz") {

TEST_CASE("peak positions") {
    auto P = peak_positions(PeakConfig(1.0, 0.0, 0.0, 4));
    REQUIRE(P.size() == 4);
    const Eigen::Vector3d expect[4] = {{1, 0, 0}, {0, 0, -1}, {-1, 0, 0}, {0, 0, 1}};
    for (int j = 0; j < 4; ++j) CHECK((P[j] - expect[j]).norm() < 1e-15);

    auto Q = peak_positions(PeakConfig(3.7, 0.4, 1.1, 2));
    CHECK((Q[0] + Q[1]).norm() < 1e-14);

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> r(0.5, 20), t(0, 2 * kPi), f(0, kPi);
    for (int i = 0; i < 20; ++i) {
        PeakConfig c(r(rng), t(rng), f(rng), 2 + i % 6);
        for (const auto& p : peak_positions(c)) CHECK(test::rel(p.norm(), c.r) < 1e-12);
    }
    CHECK_THROWS_AS(PeakConfig(0.0, 0.0, 1.0, 2), InvalidArgument);
    CHECK_THROWS_AS(PeakConfig(1.0, 0.0, 1.0, 1), InvalidArgument);
}

TEST_CASE("chords") {
    CHECK(chord(2, 2, 1) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(chord(4, 2, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(chord(6, 2, 1) == doctest::Approx(1.0).epsilon(1e-14));
    for (int K = 2; K <= 7; ++K)
        for (int j = 1; j <= K; ++j)
            for (int k = 1; k <= K; ++k) {
                CHECK(chord(K, j, k) == chord(K, k, j));
                CHECK((chord(K, j, k) == 0.0) == (j == k));
                Eigen::Vector3d d = chord_vector(K, j, k), e = chord_vector(K, k, j);
                CHECK((d + e).norm() == 0.0);
                CHECK(std::fabs(d.norm() - chord(K, j, k)) < 1e-14);
            }
}

TEST_CASE("exponent windows") {
    auto [l6, b6] = choose_exponents(6.0);
    CHECK(l6 == doctest::Approx(3.6).epsilon(1e-15));
    CHECK(b6 == doctest::Approx(1.2 / 7.0).epsilon(1e-15));
    CHECK_THROWS_AS(choose_exponents(3.0 + std::sqrt(7.0)), AlphaTooSmall);
    CHECK_THROWS_AS(choose_exponents(5.0), AlphaTooSmall);
    auto [l10, b10] = choose_exponents(10.0);
    CHECK(l10 == doctest::Approx((8.0 / 3.0 + 10.0) / 2.0).epsilon(1e-15));
    CHECK(l10 > 8.0 / 3.0);
    CHECK(l10 < 10.0);
    CHECK(b10 > 0.0);
    CHECK(b10 < (10.0 - l10) / 11.0);
}

TEST_CASE("admissible interval") {
    auto pot = PotentialSpec::radial(6.0);
    ReductionParams rp = ReductionParams::make(0.05, 1.0, 3.0, 6.0, 3.6, 1.2 / 7.0);
    auto iv = admissible_interval(rp, pot);
    REQUIRE(iv.has_value());
    double ref = std::pow(0.05, -2.4 / 7.0);
    CHECK(ref == doctest::Approx(2.79).epsilon(2e-3));
    CHECK(rp.reference_radius() == doctest::Approx(ref).epsilon(1e-14));
    CHECK(iv->first < ref);
    CHECK(ref < iv->second);

    // a steep cap violates the V bound everywhere once eps is close to 1
    rp.eps = 0.9;
    CHECK_FALSE(admissible_interval(rp, PotentialSpec::with_scale(6.0, Eigen::Matrix3d::Identity(), 50.0)).has_value());

    double prev_ratio = 1e300, prev_hi = 0.0;
    for (double e : {0.2, 0.1, 0.05, 0.025, 0.0125}) {
        rp.eps = e;
        auto w = admissible_interval(rp, pot);
        REQUIRE(w.has_value());
        double ratio = w->first / w->second;
        CHECK(ratio < prev_ratio);
        CHECK(w->second > prev_hi);
        prev_ratio = ratio;
        prev_hi = w->second;
    }
}

TEST_CASE("potential family") {
    for (const auto& pot : {PotentialSpec::radial(6.0), PotentialSpec::anisotropic(6.0), PotentialSpec::radial(10.0)}) {
        CHECK(pot(Eigen::Vector3d::Zero()) == 1.0);
        CHECK(sampled_c31_norm(pot, pot.scale) <= 1.0 + 1e-12);
        std::mt19937_64 rng(4);
        std::normal_distribution<double> nd;
        double lo = 1e300, hi = -1e300;
        for (int i = 0; i < 500; ++i) {
            Eigen::Vector3d x(nd(rng), nd(rng), nd(rng));
            double v = pot(x);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            if (x.norm() < 1.0) {
                CHECK(v == doctest::Approx(1.0 + std::pow(pot.g(x), pot.alpha)).epsilon(1e-15));
                CHECK(pot.g(x) > 0.0);
                if (x.norm() > 0.5) CHECK(v > 1.0);
            }
        }
        CHECK(lo >= 1.0);
        double lmax = pot.hess.eigenvalues().real().maxCoeff();
        CHECK(hi <= std::max(pot.outer_level, 1.0 + std::pow(pot.scale * lmax * pot.outer_end * pot.outer_end, pot.alpha)));
    }
    CHECK(PotentialSpec::radial().is_radial());
    CHECK_FALSE(PotentialSpec::anisotropic().is_radial());
    CHECK_THROWS_AS(PotentialSpec::radial(5.0), AlphaTooSmall);
    CHECK_THROWS_AS(PotentialSpec::make(6.0, Eigen::Vector3d(1, -1, 1).asDiagonal()), InvalidArgument);
    CHECK(PotentialSpec::constant_one()(Eigen::Vector3d(0.3, 2, 9)) == 1.0);
}

TEST_CASE("sampled potential has its strict minimum at the center") {
    auto pot = PotentialSpec::radial(6.0);
    // spacing coarse enough that V - 1 is representable next to the center
    UniformGrid g(8.0, 32);
    ScalarField3D V = potential_field(pot, 1.0, g);
    const int c = g.n / 2;
    CHECK(g.coord(c) == 0.0);
    CHECK(V.at(c, c, c) == 1.0);
    int at_one = 0;
    for (double v : V.values()) at_one += v <= 1.0;
    CHECK(at_one == 1);
}

TEST_CASE("ansatz values") {
    auto prof = test::profile(2.0);
    UniformGrid g(20.0, 80);
    CHECK(g.spacing() == 0.5);
    PeakConfig cfg(6.0, 0.0, kPi / 2, 2);
    ScalarField3D W = build_W(cfg, *prof, g);
    // peaks at (-6, 0, 0) and (6, 0, 0), both grid nodes
    CHECK(W.at(28, 40, 40) >= prof->u0());
    CHECK(W.at(52, 40, 40) >= prof->u0());
    CHECK_THROWS_AS(build_W(PeakConfig(6.0, 0.0, kPi / 2, 2), *prof, UniformGrid(10.0, 40)), GridTooSmall);
    CHECK_THROWS_AS(build_W(PeakConfig(0.9, 0.0, kPi / 2, 2), *prof, g), PeaksUnresolved);
}

TEST_CASE("rotation leaves the ansatz energy unchanged for radial V") {
    auto prof = test::profile(2.0);
    UniformGrid g = test::margin_grid(5.0, *prof, 0.35);
    ReductionParams rp = ReductionParams::make(0.1, 4.0, 2.0, 6.0);
    EnergyContext ctx(rp, PotentialSpec::radial(6.0), g, prof);
    double e0 = energy(ctx, build_W(PeakConfig(5.0, 0.0, kPi / 2, 2), *prof, g));
    for (double d : {0.3, 1.1}) {
        double e1 = energy(ctx, build_W(PeakConfig(5.0, d, kPi / 2, 2), *prof, g));
        double e2 = energy(ctx, build_W(PeakConfig(5.0, d, kPi / 2 - 0.4 * d, 2), *prof, g));
        CHECK(test::rel(e1, e0) < 1e-4);
        CHECK(test::rel(e2, e0) < 1e-4);
    }
}

TEST_CASE("label symmetry of the construction") {
    auto prof = test::profile(2.0);
    UniformGrid g = test::margin_grid(4.0, *prof, 0.45);
    auto P = peak_positions(PeakConfig(4.0, 0.3, 1.2, 3));
    std::vector<Eigen::Vector3d> Q{P[1], P[2], P[0]};
    ScalarField3D a = build_sum(P, *prof, g), b = build_sum(Q, *prof, g);
    CHECK(a.values() == b.values());
    ReductionParams rp = ReductionParams::make(0.1, 4.0, 2.0, 6.0);
    EnergyContext ctx(rp, PotentialSpec::radial(6.0), g, prof);
    CHECK(energy(ctx, a) == energy(ctx, b));
    TangentSpace ta(translation_basis(P, *prof, g)), tb(translation_basis(Q, *prof, g));
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
            for (int s = 0; s < 3; ++s)
                for (int t = 0; t < 3; ++t)
                    CHECK(ta.gram()(3 * ((j + 1) % 3) + s, 3 * ((k + 1) % 3) + t) == tb.gram()(3 * j + s, 3 * k + t));
}

TEST_CASE("tangent fields match finite differences with order 2") {
    auto prof = test::profile(2.0);
    UniformGrid g = test::margin_grid(5.1, *prof, 0.45);
    const double r = 5.0, th = 0.4, ph = 1.2;
    auto T = tangent_basis(PeakConfig(r, th, ph, 3), *prof, g);
    auto fd = [&](int d, double h) {
        double dr = d == 0 ? h : 0, dt = d == 1 ? h : 0, dp = d == 2 ? h : 0;
        ScalarField3D up = build_W(PeakConfig(r + dr, th + dt, ph + dp, 3), *prof, g);
        ScalarField3D dn = build_W(PeakConfig(r - dr, th - dt, ph - dp, 3), *prof, g);
        return norm_l2((1.0 / (2 * h)) * (up - dn) - T[d]);
    };
    for (int d = 0; d < 3; ++d) {
        double e2 = fd(d, 1e-2), e3 = fd(d, 1e-3);
        double order = std::log10(e2 / e3);
        CAPTURE(d);
        CHECK(order > 1.8);
        CHECK(order < 2.2);
        CHECK(e2 < 1e-3 * norm_l2(T[d]));
    }
}

TEST_CASE("polar field is odd under the peak exchange") {
    auto prof = test::profile(2.0);
    UniformGrid g = test::margin_grid(4.0, *prof, 0.45);
    auto T = tangent_basis(PeakConfig(4.0, 0.0, kPi / 2, 2), *prof, g);
    const ScalarField3D& pol = T[2];
    double worst = 0.0;
    for (int k = 0; k < g.n; ++k)
        for (int j = 0; j < g.n; ++j)
            for (int i = 1; i < g.n; ++i) worst = std::max(worst, std::fabs(pol.at(i, j, k) + pol.at(mirror(i, g.n), j, k)));
    CHECK(worst <= 1e-12 * max_abs(pol));
}

TEST_CASE("azimuthal field vanishes on the axis") {
    auto prof = test::profile(2.0);
    UniformGrid g = test::margin_grid(4.0, *prof, 0.45);
    auto azi = [&](double ph) { return norm_l2(tangent_basis(PeakConfig(4.0, 0.2, ph, 2), *prof, g)[1]); };
    double rad = norm_l2(tangent_basis(PeakConfig(4.0, 0.2, 0.0, 2), *prof, g)[0]);
    CHECK(azi(0.0) < 1e-14 * rad);
    CHECK(azi(0.01) / azi(0.1) == doctest::Approx(0.1).epsilon(1e-2));
    CHECK(azi(1e-3) < azi(0.01));
}

TEST_CASE("Gram matrix") {
    auto prof = test::profile(3.0);
    GroundStateConstants gc = constants(*prof);
    UniformGrid g = test::margin_grid(10.0, *prof, 0.3);
    for (auto [th, ph] : {std::pair{0.0, kPi / 2}, std::pair{0.7, 1.1}, std::pair{2.0, kPi / 6}}) {
        CAPTURE(th);
        CAPTURE(ph);
        Eigen::Matrix3d G = gram_matrix(PeakConfig(10.0, th, ph, 2), *prof, g);
        if (ph == kPi / 2) CHECK(test::rel(G(0, 0), 2.0 * gc.norm_d1U_h1_sq) < 1e-2);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                CHECK(G(a, b) == G(b, a));
                if (a != b) CHECK(std::fabs(G(a, b)) <= 1e-2 * std::sqrt(G(a, a) * G(b, b)));
            }
    }
    CHECK_THROWS_AS(gram_matrix(PeakConfig(10.0, 0.0, 0.0, 2), *prof, g), SingularGram);
}

TEST_CASE("tangent projection is H1 orthogonal") {
    auto prof = test::profile(2.0);
    UniformGrid g = test::margin_grid(5.0, *prof, 0.45);
    auto T = tangent_basis(PeakConfig(5.0, 0.5, 1.3, 3), *prof, g);
    TangentSpace ts({T[0], T[1], T[2]});
    std::mt19937_64 rng(8);
    for (int t = 0; t < 3; ++t) {
        ScalarField3D f = test::smooth_field(g, rng, 4);
        f += build_W(PeakConfig(5.0, 0.5, 1.3, 3), *prof, g);
        ScalarField3D n = ts.project_normal(f);
        for (int d = 0; d < 3; ++d) CHECK(std::fabs(inner_h1(n, T[d])) <= 1e-10 * norm_h1(f) * norm_h1(T[d]));
    }
}

TEST_CASE("overlap decay and symmetry") {
    auto prof = test::profile(3.0);
    GroundStateConstants gc = constants(*prof);
    UniformGrid g = test::margin_grid(12.0, *prof, 0.3);
    std::vector<double> rs{6, 8, 10, 12}, lo;
    for (double r : rs) {
        PeakConfig cfg(r, 0.2, 1.4, 2);
        double o12 = overlap(cfg, *prof, g, 1, 2), o21 = overlap(cfg, *prof, g, 2, 1);
        CHECK(o12 == o21);
        REQUIRE(o12 > 0.0);
        lo.push_back(std::log(o12));
    }
    double mx = 0, my = 0;
    for (int i = 0; i < 4; ++i) {
        mx += rs[i] / 4;
        my += lo[i] / 4;
    }
    double sxy = 0, sxx = 0;
    for (int i = 0; i < 4; ++i) {
        sxy += (rs[i] - mx) * (lo[i] - my);
        sxx += (rs[i] - mx) * (rs[i] - mx);
    }
    const double gamma = chord(2, 2, 1), sigma = gc.sigma;
    CHECK(sxy / sxx <= -gamma * sigma * prof->eta_fit * 0.9);
    CHECK(std::exp(lo.back()) < 1e-3 * (gc.norm_l2_sq + gc.norm_grad_sq));
    CHECK_THROWS_AS(overlap(PeakConfig(6, 0, 1, 2), *prof, g, 1, 1), InvalidArgument);
}

}

// Norm of a well separated pair against the rate e^{-2 eta r chord}.
TEST_SUITE("ansatz_pair_norm") {

TEST_CASE("pair norm approaches twice the single norm at rate e^{-2 eta r chord}") {
    auto prof = test::profile(2.0);
    const double r = 8.0;
    UniformGrid g = test::margin_grid(r, *prof, 0.4);
    ScalarField3D W = build_W(PeakConfig(r, 0.0, kPi / 2, 2), *prof, g);
    ScalarField3D U = build_peak(Eigen::Vector3d(r, 0, 0), *prof, g);
    double dev = test::rel(integrate(product(W, W)), 2.0 * integrate(product(U, U)));
    CHECK(dev <= std::exp(-2.0 * prof->eta_fit * r * chord(2, 2, 1)));
}

}
