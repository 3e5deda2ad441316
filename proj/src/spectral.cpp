#include "monofk/spectral.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include <nlohmann/json.hpp>

namespace monofk {

namespace {

constexpr double kPi = 3.14159265358979323846;

double ipow(double base, int e) {
    if (e < 0) return 1.0 / ipow(base, -e);
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

std::complex<double> cpow_nonneg(std::complex<double> base, int e) {
    std::complex<double> r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

double falling(int a, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= a - i;
    return r;
}

double binom(int a, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r *= double(a - k + i) / i;
    return r;
}

double eval_expansion(const HarmonicTable::ChartExpansion& ce, double xi) {
    double g = 0.0;
    for (std::size_t i = 0; i < ce.coef.size(); ++i)
        g += ce.coef[i] * ipow(1.0 - xi, ce.pow_minus[i]) * ipow(1.0 + xi, ce.pow_plus[i]);
    return g;
}

// Cache of Gauss-Legendre rules on [0, 1], keyed by node count.
const QuadratureRule& unit_gl(int npts) {
    static std::map<int, QuadratureRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(npts);
    if (it == cache.end()) it = cache.emplace(npts, gauss_legendre(npts, 0.0, 1.0)).first;
    return it->second;
}

// Cache of harmonic tables, keyed by (n, ell, m).
const HarmonicTable& cached_table(const AngularMode& mode) {
    static std::map<std::tuple<int, int, int>, HarmonicTable> cache;
    static std::mutex mtx;
    const auto key = std::make_tuple(mode.n, mode.ell, mode.m);
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, harmonic_table(mode)).first;
    return it->second;
}

double spectrum_value(const RadialProfile& profile, double k, double t_evolved, int h_power) {
    const double u = (2.0 * k - profile.k_lo - profile.k_hi) / (profile.k_hi - profile.k_lo);
    const double u2 = 1.0 - u * u;
    if (u2 <= 0.0) return 0.0;
    double spec = profile.amplitude * std::exp(-1.0 / u2);
    if (t_evolved != 0.0) spec *= std::exp(-0.5 * k * k * t_evolved);
    for (int p = 0; p < h_power; ++p) spec *= 0.5 * k * k;
    return spec;
}

Point3 shifted(Point3 p, int direction, double h) {
    switch (direction) {
        case 0: p.x1 += h; break;
        case 1: p.x2 += h; break;
        default: p.x3 += h; break;
    }
    return p;
}

} // namespace

int SectionInD::charge() const { return terms.empty() ? 0 : terms.front().mode.n; }

double mu_of(const AngularMode& mode) {
    return std::sqrt(double(mode.ell) * (mode.ell + 1) - double(mode.n) * mode.n + 0.25);
}

HarmonicTable harmonic_table(const AngularMode& mode) {
    const int n = mode.n, l = mode.ell, m = mode.m;
    if (l < std::abs(n) || std::abs(m) > l)
        throw std::invalid_argument("harmonic_table: need ell >= |n| and |m| <= ell");
    HarmonicTable t;
    t.mode = mode;
    // Orientation: the coefficient of the highest power of (1 + xi) in the
    // Rodrigues derivative has sign (-1)^(l - n + min(0, n + m)); flipping by
    // it reproduces the classical harmonics at n = 0.
    const int par = ((l - n + std::min(0, n + m)) % 2 + 2) % 2;
    const double sigma = par == 0 ? 1.0 : -1.0;
    for (int cs : {+1, -1}) {
        auto& ce = cs > 0 ? t.plus : t.minus;
        const int s = m + cs * n;
        ce.s = s;
        const int a = (n + m - std::abs(s)) / 2;
        const int b = (m - n - std::abs(s)) / 2;
        const int jlo = std::max(0, m - n);
        const int jhi = std::min(l + m, l - n);
        for (int j = jlo; j <= jhi; ++j) {
            double c = binom(l + m, j) * falling(l - n, j) * falling(l + n, l + m - j);
            if (j % 2) c = -c;
            ce.coef.push_back(sigma * c);
            ce.pow_minus.push_back(l - n - j + a);
            ce.pow_plus.push_back(n - m + j + b);
        }
    }
    // Normalization from the sphere integral of |Y|^2: on each hemisphere the
    // integrand (1 - xi^2)^|s| G^2 is a polynomial in xi of degree <= 2l.
    const int npts = l + 4;
    double total = 0.0;
    for (int cs : {+1, -1}) {
        const auto& ce = cs > 0 ? t.plus : t.minus;
        const auto g = gauss_legendre(npts, cs > 0 ? 0.0 : -1.0, cs > 0 ? 1.0 : 0.0);
        for (int i = 0; i < npts; ++i) {
            const double xi = g.nodes[i];
            const double G = eval_expansion(ce, xi);
            total += g.weights[i] * ipow(1.0 - xi * xi, std::abs(ce.s)) * G * G;
        }
    }
    if (!(total > 0.0) || !std::isfinite(total))
        throw std::runtime_error("harmonic_table: normalization integral not representable");
    t.normalization = 1.0 / std::sqrt(2.0 * kPi * total);
    return t;
}

std::complex<double> harmonic_eval(const HarmonicTable& table, ChartId chart, const Point3& u) {
    const double r = norm(u);
    if (!(r > 0.0)) throw std::domain_error("harmonic_eval: zero vector");
    const auto& ce = chart == ChartId::Plus ? table.plus : table.minus;
    const double xi = u.x3 / r;
    std::complex<double> w(u.x1 / r, u.x2 / r);
    if (ce.s < 0) w = std::conj(w);
    const std::complex<double> ang = cpow_nonneg(w, std::abs(ce.s));
    return table.normalization * ang * eval_expansion(ce, xi);
}

AngularResiduals angular_momentum_check(const HarmonicTable& table, ChartId chart,
                                        const Point3& u, double h_fd) {
    const double r = norm(u);
    if (!(r > 0.0)) throw std::domain_error("angular_momentum_check: zero vector");
    const double th0 = std::acos(u.x3 / r);
    const double ph0 = std::atan2(u.x2, u.x1);
    using C = std::complex<double>;
    using F = std::function<C(double, double)>;
    const F y = [&table, chart](double th, double ph) {
        const Point3 p{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
        return harmonic_eval(table, chart, p);
    };
    const double n = table.mode.n;
    const double csign = chart == ChartId::Plus ? 1.0 : -1.0;
    auto lift = [n, csign, h_fd](int which, F f) -> F {
        return [=](double th, double ph) -> C {
            const C I(0.0, 1.0);
            const C fp = (f(th, ph + h_fd) - f(th, ph - h_fd)) / (2.0 * h_fd);
            if (which == 3) return -I * fp - csign * n * f(th, ph);
            const C ft = (f(th + h_fd, ph) - f(th - h_fd, ph)) / (2.0 * h_fd);
            const double s = std::sin(th), c = std::cos(th);
            const double pole = (csign > 0.0 ? 1.0 - c : 1.0 + c) / s;
            if (which == 1)
                return I * (std::sin(ph) * ft + (c / s) * std::cos(ph) * fp) -
                       n * std::cos(ph) * pole * f(th, ph);
            return I * (-std::cos(ph) * ft + (c / s) * std::sin(ph) * fp) -
                   n * std::sin(ph) * pole * f(th, ph);
        };
    };
    const C y0 = y(th0, ph0);
    AngularResiduals res;
    res.r3 = std::abs(lift(3, y)(th0, ph0) - double(table.mode.m) * y0);
    C lsq = 0.0;
    for (int which : {1, 2, 3}) lsq += lift(which, lift(which, y))(th0, ph0);
    res.r2 = std::abs(lsq - double(table.mode.ell) * (table.mode.ell + 1) * y0);
    return res;
}

RadialQuadrature make_radial_quadrature(double r_min, double r_max, double k_max,
                                        int panels_per_decade, int base_nodes) {
    if (!(0.0 < r_min && r_min < r_max) || panels_per_decade < 1 || base_nodes < 2)
        throw std::invalid_argument("make_radial_quadrature: bad arguments");
    RadialQuadrature q;
    const double decades = std::log10(r_max / r_min);
    const int npanels = std::max(1, int(std::ceil(panels_per_decade * decades)));
    double lo = r_min;
    for (int p = 0; p < npanels; ++p) {
        const double hi =
            p + 1 == npanels ? r_max : r_min * std::pow(r_max / r_min, double(p + 1) / npanels);
        const int nn = std::max(base_nodes, int(std::ceil(1.1 * k_max * (hi - lo))) + 16);
        q.panels.push_back(gauss_legendre(nn, lo, hi));
        lo = hi;
    }
    return q;
}

std::vector<std::complex<double>>
fourier_bessel_forward(const std::function<std::complex<double>(double)>& psi, double mu,
                       const QuadratureRule& kGrid, const RadialQuadrature& rQuad) {
    struct Sample { double r, w; std::complex<double> p; };
    std::vector<Sample> samples;
    for (const auto& panel : rQuad.panels)
        for (std::size_t i = 0; i < panel.nodes.size(); ++i) {
            const double r = panel.nodes[i];
            samples.push_back({r, panel.weights[i], psi(r)});
        }
    std::vector<std::complex<double>> out(kGrid.nodes.size());
    for (std::size_t j = 0; j < kGrid.nodes.size(); ++j) {
        const double k = kGrid.nodes[j];
        std::complex<double> acc = 0.0;
        for (const auto& s : samples) acc += s.w * scaled_bessel(mu, k * s.r) * s.p * s.r * s.r;
        out[j] = acc;
    }
    return out;
}

std::complex<double> fourier_bessel_inverse(const std::vector<std::complex<double>>& spectrum,
                                            const QuadratureRule& kGrid, double mu, double r) {
    if (spectrum.size() != kGrid.nodes.size())
        throw std::invalid_argument("fourier_bessel_inverse: spectrum/grid size mismatch");
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        const double k = kGrid.nodes[i];
        acc += kGrid.weights[i] * scaled_bessel(mu, k * r) * spectrum[i] * k * k;
    }
    return acc;
}

double fourier_bessel_inverse(const RadialProfile& profile, double mu, double r,
                              double t_evolved, int h_power) {
    if (!(r > 0.0)) throw std::domain_error("fourier_bessel_inverse: r <= 0");
    const double klo = profile.k_lo, khi = profile.k_hi;
    const int npts = std::max(256, int(std::ceil(r * (khi - klo) / 2.0)) + 64);
    const auto& g = unit_gl(npts);
    double sum = 0.0;
    for (int i = 0; i < npts; ++i) {
        const double k = klo + (khi - klo) * g.nodes[i];
        const double w = (khi - klo) * g.weights[i];
        const double spec = spectrum_value(profile, k, t_evolved, h_power);
        sum += w * scaled_bessel(mu, k * r) * spec * k * k;
    }
    return sum;
}

SectionInD semigroup_apply(const SectionInD& section, double t) {
    SectionInD out = section;
    for (auto& term : out.terms) term.t_evolved += t;
    return out;
}

SectionInD hamiltonian_apply(const SectionInD& section) {
    SectionInD out = section;
    for (auto& term : out.terms) term.h_power += 1;
    return out;
}

FiberValue section_eval(const SectionInD& section, const Point3& x, ChartId chart) {
    const double r = norm(x);
    if (!(r > 0.0)) throw std::domain_error("section_eval: origin");
    FiberValue out;
    out.chart = chart;
    out.value = 0.0;
    const Point3 u{x.x1 / r, x.x2 / r, x.x3 / r};
    for (const auto& term : section.terms) {
        const double radial = fourier_bessel_inverse(term.profile, mu_of(term.mode), r,
                                                     term.t_evolved, term.h_power);
        out.value += term.coeff * radial * harmonic_eval(cached_table(term.mode), chart, u);
    }
    return out;
}

std::complex<double> covariant_derivative_fd(const SectionInD& section, const Point3& x,
                                             ChartId chart, int direction, double h_fd,
                                             const ChartAtlas& atlas) {
    if (direction < 0 || direction > 2)
        throw std::invalid_argument("covariant_derivative_fd: direction must be 0, 1 or 2");
    const auto vp = section_eval(section, shifted(x, direction, h_fd), chart).value;
    const auto vm = section_eval(section, shifted(x, direction, -h_fd), chart).value;
    const auto v0 = section_eval(section, x, chart).value;
    const Covector3 A = connection_form(atlas, chart, x);
    const double Ak = direction == 0 ? A.c1 : direction == 1 ? A.c2 : A.c3;
    return (vp - vm) / (2.0 * h_fd) - std::complex<double>(0.0, 1.0) * Ak * v0;
}

SectionInD section_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    SectionInD s;
    const int n = j.at("n").get<int>();
    for (const auto& tj : j.at("terms")) {
        SectionTerm t;
        t.coeff = {tj.at("re").get<double>(), tj.at("im").get<double>()};
        t.mode = AngularMode{n, tj.at("ell").get<int>(), tj.at("m").get<int>()};
        t.profile.k_lo = tj.at("k_lo").get<double>();
        t.profile.k_hi = tj.at("k_hi").get<double>();
        t.profile.amplitude = tj.at("amplitude").get<double>();
        if (t.mode.ell < std::abs(n) || std::abs(t.mode.m) > t.mode.ell)
            throw std::invalid_argument("section_from_json: need ell >= |n| and |m| <= ell");
        if (!(0.0 < t.profile.k_lo && t.profile.k_lo < t.profile.k_hi))
            throw std::invalid_argument("section_from_json: need 0 < k_lo < k_hi");
        s.terms.push_back(t);
    }
    return s;
}

std::string section_to_json(const SectionInD& section) {
    nlohmann::json j;
    j["n"] = section.charge();
    j["terms"] = nlohmann::json::array();
    for (const auto& t : section.terms) {
        j["terms"].push_back({{"re", t.coeff.real()},
                              {"im", t.coeff.imag()},
                              {"ell", t.mode.ell},
                              {"m", t.mode.m},
                              {"k_lo", t.profile.k_lo},
                              {"k_hi", t.profile.k_hi},
                              {"amplitude", t.profile.amplitude}});
    }
    return j.dump(2);
}

} // namespace monofk
