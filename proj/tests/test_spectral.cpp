#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "monofk/geometry.hpp"
#include "monofk/special_functions.hpp"
#include "monofk/spectral.hpp"

using namespace monofk;

struct BesselRef {
    double mu, x, J;
};
struct GammaRef {
    double x, G;
};
struct GlRef {
    double node, weight;
};
struct HarmNormRef {
    int n, ell, m;
    double absN;
};
struct HarmRef {
    int n, ell, m, chart;
    double theta, phi, re, im;
};

#include "ref_tables.inc"

namespace {

Point3 unit_vec(double theta, double phi) {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
            std::cos(theta)};
}

double bump_value(const RadialProfile& p, double k) {
    if (k <= p.k_lo || k >= p.k_hi) return 0.0;
    double u = (2.0 * k - p.k_lo - p.k_hi) / (p.k_hi - p.k_lo);
    return p.amplitude * std::exp(-1.0 / (1.0 - u * u));
}

SectionInD single_term(int n, int ell, int m, std::complex<double> coeff = {1.0, 0.0}) {
    SectionTerm t;
    t.coeff = coeff;
    t.mode = AngularMode{n, ell, m};
    t.profile = RadialProfile{RadialProfile::Kind::SmoothBump, 1.0, 3.0, 1.0};
    SectionInD s;
    s.terms.push_back(t);
    return s;
}

} // namespace

TEST_CASE("mu of a mode") {
    CHECK(mu_of({0, 0, 0}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(mu_of({1, 1, 0}) == doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));
    CHECK(mu_of({2, 2, -1}) == doctest::Approx(1.5).epsilon(1e-15));
    // m does not enter
    CHECK(mu_of({1, 2, -2}) == mu_of({1, 2, 2}));
}

TEST_CASE("harmonic normalization magnitudes") {
    for (const auto& ref : kHarmNormRefs) {
        auto table = harmonic_table({ref.n, ref.ell, ref.m});
        CHECK(table.normalization ==
              doctest::Approx(ref.absN).epsilon(1e-12));
    }
}

TEST_CASE("harmonic pointwise values") {
    for (const auto& ref : kHarmRefs) {
        auto table = harmonic_table({ref.n, ref.ell, ref.m});
        ChartId chart = ref.chart > 0 ? ChartId::Plus : ChartId::Minus;
        auto got = harmonic_eval(table, chart, unit_vec(ref.theta, ref.phi));
        CHECK(std::abs(got - std::complex<double>(ref.re, ref.im)) <= 1e-13);
    }
}

TEST_CASE("harmonic chart transition") {
    // on the overlap the chart representations differ by exp(2 i n phi)
    for (AngularMode mode : {AngularMode{1, 1, 0}, AngularMode{1, 2, -2},
                             AngularMode{2, 3, -1}, AngularMode{-1, 2, 1}}) {
        auto table = harmonic_table(mode);
        for (double theta : {1.2, 2.0})
            for (double phi : {2.0, -1.3, 0.4}) {
                Point3 u = unit_vec(theta, phi);
                auto yp = harmonic_eval(table, ChartId::Plus, u);
                auto ym = harmonic_eval(table, ChartId::Minus, u);
                auto phase = std::polar(1.0, 2.0 * mode.n * azimuth(u));
                CHECK(std::abs(yp - phase * ym) <= 1e-13);
            }
    }
}

TEST_CASE("harmonic orthonormality for charge one") {
    std::vector<HarmonicTable> tables;
    for (int ell = 1; ell <= 3; ++ell)
        for (int m = -ell; m <= ell; ++m) tables.push_back(harmonic_table({1, ell, m}));

    auto xi = gauss_legendre(24, -1.0, 1.0);
    const int n_phi = 64;
    std::vector<std::vector<std::complex<double>>> vals(tables.size());
    std::vector<double> wts;
    for (size_t i = 0; i < xi.nodes.size(); ++i) {
        double theta = std::acos(xi.nodes[i]);
        for (int j = 0; j < n_phi; ++j) {
            double phi = 2.0 * M_PI * j / n_phi;
            Point3 u = unit_vec(theta, phi);
            for (size_t a = 0; a < tables.size(); ++a)
                vals[a].push_back(harmonic_eval(tables[a], ChartId::Plus, u));
            wts.push_back(xi.weights[i] * 2.0 * M_PI / n_phi);
        }
    }
    double worst = 0.0;
    for (size_t a = 0; a < tables.size(); ++a)
        for (size_t b = a; b < tables.size(); ++b) {
            std::complex<double> g = 0.0;
            for (size_t p = 0; p < wts.size(); ++p)
                g += wts[p] * std::conj(vals[a][p]) * vals[b][p];
            double want = (a == b) ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(g - want));
        }
    CHECK(worst <= 1e-8);
}

TEST_CASE("harmonic table rejects bad modes") {
    CHECK_THROWS_AS((void)harmonic_table({2, 1, 0}), std::invalid_argument);
    CHECK_THROWS_AS((void)harmonic_table({1, 1, 2}), std::invalid_argument);
    CHECK_THROWS_AS((void)harmonic_eval(harmonic_table({1, 1, 0}), ChartId::Plus,
                                        Point3{0.0, 0.0, 0.0}),
                    std::domain_error);
}

TEST_CASE("angular momentum eigenvalue residuals") {
    for (int m : {0, 1}) {
        auto table = harmonic_table({1, 1, m});
        Point3 u = unit_vec(M_PI / 2.0, 1.0);
        auto res = angular_momentum_check(table, ChartId::Plus, u, 1e-4);
        double y = std::abs(harmonic_eval(table, ChartId::Plus, u));
        CHECK(res.r3 <= 1e-7 * y);
        CHECK(res.r2 <= 1e-5 * 2.0 * y);
    }
}

TEST_CASE("parseval identity for the bump spectrum") {
    RadialProfile prof{RadialProfile::Kind::SmoothBump, 1.0, 3.0, 1.0};
    double mu = mu_of({1, 1, 0});
    auto kg = gauss_legendre(96, prof.k_lo, prof.k_hi);
    double rhs = 0.0;
    for (size_t i = 0; i < kg.nodes.size(); ++i) {
        double s = bump_value(prof, kg.nodes[i]);
        rhs += kg.weights[i] * s * s * kg.nodes[i] * kg.nodes[i];
    }
    auto rq = make_radial_quadrature(1e-6, 160.0, prof.k_hi);
    double lhs = 0.0;
    for (const auto& panel : rq.panels)
        for (size_t i = 0; i < panel.nodes.size(); ++i) {
            double r = panel.nodes[i];
            double v = fourier_bessel_inverse(prof, mu, r);
            lhs += panel.weights[i] * v * v * r * r;
        }
    CHECK(std::abs(lhs - rhs) / rhs <= 1e-6);
}

TEST_CASE("transform round trip recovers the spectrum") {
    RadialProfile prof{RadialProfile::Kind::SmoothBump, 1.0, 3.0, 1.0};
    double mu = mu_of({1, 1, 0});
    auto kg = gauss_legendre(48, prof.k_lo, prof.k_hi);
    auto rq = make_radial_quadrature(1e-6, 320.0, prof.k_hi);
    auto psi = [&](double r) {
        return std::complex<double>(fourier_bessel_inverse(prof, mu, r), 0.0);
    };
    auto back = fourier_bessel_forward(psi, mu, kg, rq);
    double sup = 0.0, scale = 0.0;
    for (size_t i = 0; i < kg.nodes.size(); ++i) {
        sup = std::max(sup, std::abs(back[i] - bump_value(prof, kg.nodes[i])));
        scale = std::max(scale, std::abs(bump_value(prof, kg.nodes[i])));
    }
    CHECK(sup / scale <= 1e-6);
}

TEST_CASE("scaled kernel solves the radial equation") {
    double mu = mu_of({1, 1, 0});
    for (double k : {1.0, 2.0}) {
        double r = 1.7, h = 1e-4;
        auto u = [&](double rr) { return scaled_bessel(mu, k * rr); };
        double upp = (u(r + h) - 2.0 * u(r) + u(r - h)) / (h * h);
        double up = (u(r + h) - u(r - h)) / (2.0 * h);
        double resid = upp + 2.0 / r * up + (k * k - (mu * mu - 0.25) / (r * r)) * u(r);
        CHECK(std::abs(resid) <= 1e-6 * k * k * std::abs(u(r)));
    }
}

TEST_CASE("radial quadrature covers the interval") {
    auto rq = make_radial_quadrature(1e-6, 160.0, 3.0);
    double covered = 0.0, wsum = 0.0;
    double lo = 1e300, hi = -1e300;
    for (const auto& panel : rq.panels) {
        covered += panel.b - panel.a;
        lo = std::min(lo, panel.a);
        hi = std::max(hi, panel.b);
        for (double w : panel.weights) wsum += w;
    }
    CHECK(lo == doctest::Approx(1e-6).epsilon(1e-12));
    CHECK(hi == doctest::Approx(160.0).epsilon(1e-12));
    CHECK(covered == doctest::Approx(160.0 - 1e-6).epsilon(1e-10));
    CHECK(wsum == doctest::Approx(160.0 - 1e-6).epsilon(1e-10));
    CHECK_THROWS_AS((void)make_radial_quadrature(-1.0, 2.0, 3.0), std::invalid_argument);
    CHECK_THROWS_AS((void)make_radial_quadrature(2.0, 1.0, 3.0), std::invalid_argument);
}

TEST_CASE("section value fixtures") {
    // charge zero reference point
    {
        SectionInD sec = single_term(0, 0, 0);
        Point3 x{0.3, -0.2, 0.5};
        auto v = section_eval(semigroup_apply(sec, 0.4), x, ChartId::Plus).value;
        CHECK(v.real() == doctest::Approx(0.126544906054516).epsilon(1e-12));
        CHECK(std::abs(v.imag()) <= 1e-15);
    }
    // charge one reference point in the x1-x3 plane
    {
        SectionInD sec = single_term(1, 1, 0);
        Point3 x{1.2, 0.0, 1.6};
        auto v0 = section_eval(sec, x, ChartId::Plus).value;
        CHECK(v0.real() == doctest::Approx(-0.00962424491693931).epsilon(1e-12));
        CHECK(std::abs(v0.imag()) <= 1e-15);
        auto vt = section_eval(semigroup_apply(sec, 0.5), x, ChartId::Plus).value;
        CHECK(vt.real() == doctest::Approx(0.00283742778988779).epsilon(1e-12));
        CHECK(std::abs(vt.imag()) <= 1e-15);
    }
    // the m = 0 charge-one harmonic vanishes on the positive axis
    {
        SectionInD sec = single_term(1, 1, 0);
        auto v = section_eval(sec, Point3{0.0, 0.0, 2.0}, ChartId::Plus).value;
        CHECK(std::abs(v) <= 1e-300);
    }
}

TEST_CASE("section modulus is chart independent") {
    SectionInD sec = single_term(1, 1, 0);
    ChartAtlas atlas{1, 0.5, 0.5};
    for (Point3 x : {Point3{1.0, 0.8, 0.1}, Point3{-0.4, 1.3, -0.2}}) {
        auto vp = section_eval(sec, x, ChartId::Plus).value;
        auto vm = section_eval(sec, x, ChartId::Minus).value;
        CHECK(std::abs(std::abs(vp) - std::abs(vm)) <= 1e-12 * std::abs(vp));
        CHECK(std::abs(vp - transition_phase(atlas, x) * vm) <= 1e-12 * std::abs(vp));
    }
}

TEST_CASE("semigroup identity and composition") {
    SectionInD sec = single_term(1, 1, 0);
    Point3 x{1.2, 0.0, 1.6};
    auto v0 = section_eval(sec, x, ChartId::Plus).value;
    auto v0t = section_eval(semigroup_apply(sec, 0.0), x, ChartId::Plus).value;
    CHECK(std::abs(v0t - v0) == 0.0);
    auto va = section_eval(semigroup_apply(semigroup_apply(sec, 0.2), 0.3), x, ChartId::Plus);
    auto vb = section_eval(semigroup_apply(sec, 0.5), x, ChartId::Plus);
    CHECK(std::abs(va.value - vb.value) <= 1e-12);
}

TEST_CASE("generator matches the time derivative of the semigroup") {
    SectionInD sec = single_term(1, 1, 0);
    Point3 x{1.2, 0.0, 1.6};
    double t = 0.3, h = 1e-4;
    auto vp = section_eval(semigroup_apply(sec, t + h), x, ChartId::Plus).value;
    auto vm = section_eval(semigroup_apply(sec, t - h), x, ChartId::Plus).value;
    auto hv = section_eval(hamiltonian_apply(semigroup_apply(sec, t)), x, ChartId::Plus).value;
    CHECK(std::abs((vp - vm) / (2.0 * h) + hv) <= 1e-6 * std::abs(hv));
}

TEST_CASE("section evaluation is linear in the terms") {
    std::complex<double> a{0.3, -0.4}, b{1.1, 0.25};
    SectionInD s1 = single_term(1, 1, 0, a);
    SectionInD s2 = single_term(1, 2, 1, b);
    SectionInD both = s1;
    both.terms.push_back(s2.terms[0]);
    CHECK(both.charge() == 1);
    Point3 x{0.7, -0.9, 1.1};
    auto v1 = section_eval(s1, x, ChartId::Plus).value;
    auto v2 = section_eval(s2, x, ChartId::Plus).value;
    auto v = section_eval(both, x, ChartId::Plus).value;
    CHECK(std::abs(v - (v1 + v2)) <= 1e-13);
    auto hv = section_eval(hamiltonian_apply(both), x, ChartId::Plus).value;
    auto hv1 = section_eval(hamiltonian_apply(s1), x, ChartId::Plus).value;
    auto hv2 = section_eval(hamiltonian_apply(s2), x, ChartId::Plus).value;
    CHECK(std::abs(hv - (hv1 + hv2)) <= 1e-13);
}

TEST_CASE("section json round trip and validation") {
    SectionInD both = single_term(1, 1, 0, {0.3, -0.4});
    both.terms.push_back(single_term(1, 2, 1, {1.1, 0.25}).terms[0]);
    both.terms[1].profile.k_lo = 0.5;
    both.terms[1].profile.k_hi = 2.5;
    both.terms[1].profile.amplitude = 0.7;

    SectionInD back = section_from_json(section_to_json(both));
    REQUIRE(back.terms.size() == 2);
    CHECK(back.charge() == 1);
    Point3 x{0.7, -0.9, 1.1};
    auto v = section_eval(both, x, ChartId::Plus).value;
    auto w = section_eval(back, x, ChartId::Plus).value;
    CHECK(std::abs(v - w) == 0.0);

    CHECK_THROWS_AS(
        (void)section_from_json(R"({"n":2,"terms":[{"re":1,"im":0,"ell":1,"m":0,"k_lo":1,"k_hi":3,"amplitude":1}]})"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        (void)section_from_json(R"({"n":1,"terms":[{"re":1,"im":0,"ell":1,"m":2,"k_lo":1,"k_hi":3,"amplitude":1}]})"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        (void)section_from_json(R"({"n":1,"terms":[{"re":1,"im":0,"ell":1,"m":0,"k_lo":3,"k_hi":1,"amplitude":1}]})"),
        std::invalid_argument);
    CHECK_THROWS_AS((void)section_from_json(R"({"terms":[]})"), std::exception);
}

TEST_CASE("covariant derivative transforms with the transition phase") {
    SectionInD sec = single_term(1, 1, 0);
    ChartAtlas atlas{1, 0.5, 0.5};
    Point3 x{1.1, -0.7, 0.2};
    for (int dir : {0, 1, 2}) {
        auto dp = covariant_derivative_fd(sec, x, ChartId::Plus, dir, 1e-5, atlas);
        auto dm = covariant_derivative_fd(sec, x, ChartId::Minus, dir, 1e-5, atlas);
        auto phase = transition_phase(atlas, x);
        CHECK(std::abs(dp - phase * dm) <= 1e-6 * (std::abs(dp) + 1e-6));
    }
    CHECK_THROWS_AS((void)covariant_derivative_fd(sec, x, ChartId::Plus, 3, 1e-5, atlas),
                    std::invalid_argument);
}
