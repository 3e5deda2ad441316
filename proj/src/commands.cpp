#include "monofk/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "monofk/stochastic.hpp"

namespace monofk {

namespace {

using json = nlohmann::ordered_json;

// Uniform draws for check-point sampling, from the same counter-based
// generator as the path streams but on a disjoint tag so reports stay
// reproducible from (config, seed, version).
struct UniformStream {
    uint64_t key = 0;
    uint32_t tag = 0;
    uint64_t index = 0;
    int have = 0;
    uint32_t buf[4] = {0, 0, 0, 0};

    double next() {
        if (have == 0) {
            uint32_t counter[4] = {tag, static_cast<uint32_t>(index & 0xffffffffu),
                                   static_cast<uint32_t>(index >> 32), 0u};
            Philox4x32::block(key, counter, buf);
            ++index;
            have = 4;
        }
        return (static_cast<double>(buf[--have]) + 0.5) * 0x1p-32;
    }
};

json point_json(const Point3& x) { return json::array({x.x1, x.x2, x.x3}); }

json complex_json(const std::complex<double>& z) {
    json j;
    j["re"] = z.real();
    j["im"] = z.imag();
    return j;
}

struct ReportBuilder {
    json rep;
    bool all = true;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    ReportBuilder(const char* command, const RunConfig& cfg) {
        rep["command"] = command;
        rep["version"] = kVersion;
        rep["seed"] = cfg.seed;
        json in;
        in["charge"] = cfg.charge;
        in["delta"] = cfg.delta;
        in["switch_margin"] = cfg.switch_margin;
        in["n_paths"] = cfg.n_paths;
        in["n_steps"] = cfg.n_steps;
        in["t"] = cfg.t;
        in["x"] = point_json(cfg.x);
        in["c_budget"] = cfg.c_budget;
        in["holonomy_segments"] = cfg.holonomy_segments;
        if (!cfg.csv_path.empty()) in["csv_path"] = cfg.csv_path;
        if (cfg.section) in["section"] = json::parse(section_to_json(*cfg.section));
        rep["inputs"] = std::move(in);
        rep["results"] = json::object();
        rep["checks"] = json::array();
    }

    void result(const std::string& name, json value) { rep["results"][name] = std::move(value); }

    // residual-style check: pass iff value <= tolerance
    void check(const std::string& name, double value, double tolerance,
               const std::string& criterion) {
        json c;
        c["name"] = name;
        c["value"] = value;
        c["tolerance"] = tolerance;
        c["criterion"] = criterion;
        c["pass"] = value <= tolerance;
        all = all && (value <= tolerance);
        rep["checks"].push_back(std::move(c));
    }

    // window-style check: pass iff lo <= value <= hi
    void check_range(const std::string& name, double value, double lo, double hi,
                     const std::string& criterion) {
        json c;
        c["name"] = name;
        c["value"] = value;
        c["window"] = json::array({lo, hi});
        c["criterion"] = criterion;
        c["pass"] = (value >= lo && value <= hi);
        all = all && (value >= lo && value <= hi);
        rep["checks"].push_back(std::move(c));
    }

    CommandResult finish() {
        rep["all_passed"] = all;
        rep["duration_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return CommandResult{rep.dump(2) + "\n", all};
    }
};

SectionInD default_section(int charge) {
    SectionInD s;
    SectionTerm term;
    term.coeff = {1.0, 0.0};
    term.mode = {charge, std::abs(charge), 0};
    term.profile = {RadialProfile::Kind::SmoothBump, 1.0, 3.0, 1.0};
    s.terms.push_back(term);
    return s;
}

SectionInD section_for(const RunConfig& cfg) {
    return cfg.section ? *cfg.section : default_section(cfg.charge);
}

ChartId home_chart(const Point3& x) {
    return x.x3 / norm(x) >= 0.0 ? ChartId::Plus : ChartId::Minus;
}

double bump_spectrum(const RadialProfile& p, double k) {
    if (k <= p.k_lo || k >= p.k_hi) return 0.0;
    double u = (2.0 * k - p.k_lo - p.k_hi) / (p.k_hi - p.k_lo);
    return p.amplitude * std::exp(-1.0 / (1.0 - u * u));
}

double fit_slope(const std::vector<double>& lx, const std::vector<double>& ly) {
    size_t n = lx.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

BrownianPath subsample(const BrownianPath& fine, int stride) {
    BrownianPath coarse;
    for (size_t j = 0; j < fine.points.size(); j += stride) {
        coarse.times.push_back(fine.times[j]);
        coarse.points.push_back(fine.points[j]);
    }
    return coarse;
}

void write_csv(const std::string& path, const std::vector<std::array<double, 5>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open csv path: " + path);
    out << "h,n_paths,value_re,value_im,stderr\n";
    char line[256];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g\n", r[0], r[1], r[2],
                      r[3], r[4]);
        out << line;
    }
}

} // namespace

RunConfig run_config_from_json(const std::string& text) {
    json doc = json::parse(text);
    if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
    RunConfig cfg;
    for (const auto& [key, value] : doc.items()) {
        if (key == "charge") {
            cfg.charge = value.get<int>();
        } else if (key == "delta") {
            cfg.delta = value.get<double>();
        } else if (key == "switch_margin") {
            cfg.switch_margin = value.get<double>();
        } else if (key == "seed") {
            cfg.seed = value.get<uint64_t>();
        } else if (key == "n_paths") {
            cfg.n_paths = value.get<long>();
        } else if (key == "n_steps") {
            cfg.n_steps = value.get<int>();
        } else if (key == "t") {
            cfg.t = value.get<double>();
        } else if (key == "x") {
            if (!value.is_array() || value.size() != 3)
                throw std::invalid_argument("config key x must be an array of three reals");
            cfg.x = {value[0].get<double>(), value[1].get<double>(), value[2].get<double>()};
        } else if (key == "section") {
            cfg.section = section_from_json(value.dump());
        } else if (key == "c_budget") {
            cfg.c_budget = value.get<double>();
        } else if (key == "holonomy_segments") {
            cfg.holonomy_segments = value.get<int>();
        } else if (key == "csv_path") {
            cfg.csv_path = value.get<std::string>();
        } else {
            throw std::invalid_argument("unknown config key: " + key);
        }
    }
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
        throw std::invalid_argument("delta must lie in (0, 1)");
    if (!(cfg.switch_margin > 0.0 && cfg.switch_margin <= 1.0))
        throw std::invalid_argument("switch_margin must lie in (0, 1]");
    if (cfg.n_paths < 1) throw std::invalid_argument("n_paths must be positive");
    if (cfg.n_steps < 1) throw std::invalid_argument("n_steps must be positive");
    if (cfg.t < 0.0) throw std::invalid_argument("t must be nonnegative");
    if (cfg.holonomy_segments < 1) throw std::invalid_argument("holonomy_segments must be positive");
    if (cfg.section && cfg.section->charge() != cfg.charge && !cfg.section->terms.empty())
        throw std::invalid_argument("section charge does not match config charge");
    return cfg;
}

CommandResult cmd_geometry(const RunConfig& cfg) {
    ReportBuilder rb("geometry", cfg);
    ChartAtlas atlas{cfg.charge, cfg.delta, cfg.switch_margin};
    ChartAtlas unit{1, cfg.delta, cfg.switch_margin};

    // holonomy against the flux of the field through the spherical cap
    auto h3 = loop_holonomy(unit, ChartId::Plus, M_PI / 3.0, cfg.holonomy_segments);
    rb.result("holonomy_theta_pi_over_3", complex_json(h3));
    rb.check("holonomy_theta_pi_over_3_error", std::abs(h3 - std::complex<double>(-1.0, 0.0)),
             1e-5, "|holonomy - (-1)| <= 1e-5 for n=1, theta=pi/3");
    auto h2 = loop_holonomy(unit, ChartId::Plus, M_PI / 2.0, cfg.holonomy_segments);
    rb.result("holonomy_theta_pi_over_2", complex_json(h2));
    rb.check("holonomy_theta_pi_over_2_error", std::abs(h2 - std::complex<double>(1.0, 0.0)),
             1e-5, "|holonomy - 1| <= 1e-5 for n=1, theta=pi/2");
    {
        double theta = 1.0;
        auto hg = loop_holonomy(atlas, ChartId::Plus, theta, cfg.holonomy_segments);
        auto predicted = std::polar(1.0, 2.0 * M_PI * cfg.charge * (1.0 - std::cos(theta)));
        rb.result("holonomy_theta_1", complex_json(hg));
        rb.check("holonomy_flux_error", std::abs(hg - predicted), 1e-5,
                 "|holonomy - exp(i 2 pi n (1-cos theta))| <= 1e-5 at theta=1");
    }

    // gauge relation A+ - A- = 2n d(phi) at random overlap points
    {
        UniformStream us{cfg.seed, 101};
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i) {
            double xi = (2.0 * us.next() - 1.0) * 0.95 * cfg.delta;
            double r = 0.5 + 2.5 * us.next();
            double phi = (2.0 * us.next() - 1.0) * M_PI;
            double s = std::sqrt(1.0 - xi * xi);
            Point3 x{r * s * std::cos(phi), r * s * std::sin(phi), r * xi};
            auto ap = connection_form(atlas, ChartId::Plus, x);
            auto am = connection_form(atlas, ChartId::Minus, x);
            double rho2 = x.x1 * x.x1 + x.x2 * x.x2;
            double g1 = -x.x2 / rho2, g2 = x.x1 / rho2;
            worst = std::max(worst, std::abs(ap.c1 - am.c1 - 2.0 * cfg.charge * g1));
            worst = std::max(worst, std::abs(ap.c2 - am.c2 - 2.0 * cfg.charge * g2));
            worst = std::max(worst, std::abs(ap.c3 - am.c3));
        }
        rb.result("gauge_relation_sup_residual", worst);
        rb.check("gauge_relation", worst, 1e-12,
                 "sup_k |A+_k - A-_k - 2 n d(phi)_k| <= 1e-12 at 1e4 random overlap points");
    }

    // component bound on the Plus connection over its chart
    {
        UniformStream us{cfg.seed, 102};
        int violations = 0;
        for (int i = 0; i < 10000; ++i) {
            double xi = -cfg.delta + (1.0 + cfg.delta) * us.next();
            double r = 0.1 + 4.9 * us.next();
            double phi = (2.0 * us.next() - 1.0) * M_PI;
            double s = std::sqrt(std::max(0.0, 1.0 - xi * xi));
            Point3 x{r * s * std::cos(phi), r * s * std::sin(phi), r * xi};
            auto a = connection_form(atlas, ChartId::Plus, x);
            double bound = std::abs(cfg.charge) / ((1.0 - cfg.delta) * r) * (1.0 + 1e-12);
            if (std::abs(a.c1) > bound || std::abs(a.c2) > bound || std::abs(a.c3) > bound)
                ++violations;
        }
        rb.result("connection_bound_violations", violations);
        rb.check("connection_bound", static_cast<double>(violations), 0.0,
                 "|A+_k| <= |n| ((1-delta) |x|)^{-1} on the Plus chart, 1e4 samples, 0 violations");
    }

    // divergence of the Plus connection vanishes (central differences)
    {
        UniformStream us{cfg.seed, 103};
        double worst = 0.0;
        double h = 1e-5;
        for (int i = 0; i < 100; ++i) {
            double xi = -0.9 * cfg.delta + (1.0 + 0.9 * cfg.delta) * us.next() * 0.999;
            double r = 0.5 + 2.5 * us.next();
            double phi = (2.0 * us.next() - 1.0) * M_PI;
            double s = std::sqrt(std::max(0.0, 1.0 - xi * xi));
            Point3 x{r * s * std::cos(phi), r * s * std::sin(phi), r * xi};
            double div = 0.0;
            for (int k = 0; k < 3; ++k) {
                Point3 xp = x, xm = x;
                (k == 0 ? xp.x1 : k == 1 ? xp.x2 : xp.x3) += h;
                (k == 0 ? xm.x1 : k == 1 ? xm.x2 : xm.x3) -= h;
                auto fp = connection_form(atlas, ChartId::Plus, xp);
                auto fm = connection_form(atlas, ChartId::Plus, xm);
                div += ((k == 0 ? fp.c1 - fm.c1 : k == 1 ? fp.c2 - fm.c2 : fp.c3 - fm.c3)) /
                       (2.0 * h);
            }
            worst = std::max(worst, std::abs(div));
        }
        rb.result("divergence_sup", worst);
        rb.check("divergence_free", worst, 1e-8,
                 "|div A+| <= 1e-8 by central differences (h=1e-5) at 100 random points");
    }

    // transition phases are unit modulus on the overlap
    {
        UniformStream us{cfg.seed, 104};
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            double xi = (2.0 * us.next() - 1.0) * 0.95 * cfg.delta;
            double r = 0.5 + 2.5 * us.next();
            double phi = (2.0 * us.next() - 1.0) * M_PI;
            double s = std::sqrt(1.0 - xi * xi);
            Point3 x{r * s * std::cos(phi), r * s * std::sin(phi), r * xi};
            worst = std::max(worst, std::abs(std::abs(transition_phase(atlas, x)) - 1.0));
        }
        rb.result("transition_modulus_sup_deviation", worst);
        rb.check("transition_unit_modulus", worst, 1e-12,
                 "||exp(2 i n phi)| - 1| <= 1e-12 at 1e3 random overlap points");
    }

    // charge zero means both connections vanish identically
    {
        ChartAtlas flat{0, cfg.delta, cfg.switch_margin};
        UniformStream us{cfg.seed, 105};
        double sup = 0.0;
        for (int i = 0; i < 100; ++i) {
            double xi = (2.0 * us.next() - 1.0) * 0.95 * cfg.delta;
            double r = 0.5 + 2.5 * us.next();
            double phi = (2.0 * us.next() - 1.0) * M_PI;
            double s = std::sqrt(1.0 - xi * xi);
            Point3 x{r * s * std::cos(phi), r * s * std::sin(phi), r * xi};
            for (ChartId c : {ChartId::Plus, ChartId::Minus}) {
                auto a = connection_form(flat, c, x);
                sup = std::max({sup, std::abs(a.c1), std::abs(a.c2), std::abs(a.c3)});
            }
        }
        rb.result("zero_charge_connection_sup", sup);
        rb.check("zero_charge_connection", sup, 0.0, "n=0 connection vanishes identically");
    }

    return rb.finish();
}

CommandResult cmd_spectral(const RunConfig& cfg) {
    ReportBuilder rb("spectral", cfg);
    RadialProfile prof{RadialProfile::Kind::SmoothBump, 1.0, 3.0, 1.0};

    // transform order for the headline mode
    double mu11 = mu_of({1, 1, 0});
    rb.result("mu_n1_l1", mu11);
    rb.check("mu_n1_l1_identity", std::abs(mu11 - std::sqrt(1.25)), 1e-12,
             "mu(n=1, l=1) = sqrt(5)/2 = 1.118034 within 1e-12");

    // Parseval: int |psi|^2 r^2 dr = int |psi#|^2 k^2 dk
    for (double mu : {mu11, 1.5, 2.9580398915498081}) {
        auto kg = gauss_legendre(96, prof.k_lo, prof.k_hi);
        double rhs = 0.0;
        for (size_t i = 0; i < kg.nodes.size(); ++i) {
            double s = bump_spectrum(prof, kg.nodes[i]);
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
        char name[64];
        std::snprintf(name, sizeof name, "parseval_mu_%.6f", mu);
        rb.result(name, std::abs(lhs - rhs) / rhs);
        rb.check(std::string(name) + "_rel_error", std::abs(lhs - rhs) / rhs, 1e-6,
                 "Parseval relative error <= 1e-6");
    }

    // transform round trip on a k-grid
    {
        auto kg = gauss_legendre(48, prof.k_lo, prof.k_hi);
        auto rq = make_radial_quadrature(1e-6, 320.0, prof.k_hi);
        auto psi = [&](double r) {
            return std::complex<double>(fourier_bessel_inverse(prof, mu11, r), 0.0);
        };
        auto back = fourier_bessel_forward(psi, mu11, kg, rq);
        double sup = 0.0, scale = 0.0;
        for (size_t i = 0; i < kg.nodes.size(); ++i) {
            sup = std::max(sup, std::abs(back[i] - bump_spectrum(prof, kg.nodes[i])));
            scale = std::max(scale, std::abs(bump_spectrum(prof, kg.nodes[i])));
        }
        rb.result("round_trip_sup_error", sup / scale);
        rb.check("round_trip", sup / scale, 1e-6,
                 "sup_k |forward(inverse(psi#)) - psi#| <= 1e-6 relative to max |psi#|");
    }

    // the scaled kernel solves the radial eigenvalue equation
    for (double k : {1.0, 2.0}) {
        double r = 1.7, h = 1e-4;
        auto u = [&](double rr) { return scaled_bessel(mu11, k * rr); };
        double upp = (u(r + h) - 2.0 * u(r) + u(r - h)) / (h * h);
        double up = (u(r + h) - u(r - h)) / (2.0 * h);
        double resid = upp + 2.0 / r * up + (k * k - (mu11 * mu11 - 0.25) / (r * r)) * u(r);
        double rel = std::abs(resid) / (k * k * std::abs(u(r)));
        char name[64];
        std::snprintf(name, sizeof name, "radial_eigenfunction_rel_residual_k%.0f", k);
        rb.result(name, rel);
        rb.check(name, rel, 1e-6,
                 "|u'' + (2/r) u' + (k^2 - (mu^2 - 1/4)/r^2) u| <= 1e-6 k^2 |u|, h_fd=1e-4");
    }

    // angular momentum eigenvalue residuals
    for (int m : {0, 1}) {
        auto table = harmonic_table({1, 1, m});
        double th = M_PI / 2.0, ph = 1.0;
        Point3 u{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
        auto res = angular_momentum_check(table, ChartId::Plus, u, 1e-4);
        double y = std::abs(harmonic_eval(table, ChartId::Plus, u));
        char n3[64], n2[64];
        std::snprintf(n3, sizeof n3, "l3_residual_m%d", m);
        std::snprintf(n2, sizeof n2, "l2_residual_m%d", m);
        rb.result(n3, res.r3);
        rb.result(n2, res.r2);
        rb.check(n3, res.r3, 1e-7 * y, "|L3 Y - m Y| <= 1e-7 |Y| at FD step 1e-4");
        rb.check(n2, res.r2, 1e-5 * 2.0 * y, "|L^2 Y - l(l+1) Y| <= 1e-5 l(l+1) |Y| at FD step 1e-4");
    }

    // semigroup at t=0 is the identity, and evolution times compose
    {
        SectionInD sec = default_section(1);
        Point3 x{1.2, 0.0, 1.6};
        auto v0 = section_eval(sec, x, ChartId::Plus).value;
        auto v0t = section_eval(semigroup_apply(sec, 0.0), x, ChartId::Plus).value;
        rb.result("semigroup_t0_deviation", std::abs(v0t - v0));
        rb.check("semigroup_identity_at_t0", std::abs(v0t - v0), 0.0,
                 "e^{-H 0} Psi = Psi exactly");
        auto va = section_eval(semigroup_apply(semigroup_apply(sec, 0.2), 0.3), x, ChartId::Plus);
        auto vb = section_eval(semigroup_apply(sec, 0.5), x, ChartId::Plus);
        rb.result("semigroup_composition_deviation", std::abs(va.value - vb.value));
        rb.check("semigroup_composition", std::abs(va.value - vb.value), 1e-12,
                 "|e^{-H 0.3} e^{-H 0.2} Psi - e^{-H 0.5} Psi| <= 1e-12");
    }

    // power-law behavior of the section at both ends of the radial range
    {
        SectionInD sec = default_section(1);
        double th = 0.9, ph = 0.4;
        Point3 dir{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
        std::vector<double> lx, ly;
        for (int j = 0; j < 9; ++j) {
            double r = 1e-4 * std::pow(10.0, j / 8.0);
            Point3 x{dir.x1 * r, dir.x2 * r, dir.x3 * r};
            lx.push_back(std::log(r));
            ly.push_back(std::log(std::abs(section_eval(sec, x, ChartId::Plus).value)));
        }
        double slope = fit_slope(lx, ly);
        rb.result("small_r_slope", slope);
        rb.check_range("small_r_slope", slope, 0.5 * (std::sqrt(5.0) - 1.0) - 0.05,
                       0.5 * (std::sqrt(5.0) - 1.0) + 0.05,
                       "log-log slope of |Psi| over r in [1e-4, 1e-3] = (sqrt(5)-1)/2 +- 0.05");

        RadialProfile narrow{RadialProfile::Kind::SmoothBump, 1.9995, 2.0005, 1.0};
        lx.clear();
        ly.clear();
        for (int j = 0; j < 9; ++j) {
            double base = 100.0 * std::pow(10.0, j / 8.0);
            double env = 0.0;
            for (int i = 0; i < 64; ++i) {
                double r = base + (M_PI / 2.0) * i / 63.0;
                env = std::max(env, std::abs(fourier_bessel_inverse(narrow, mu11, r)));
            }
            lx.push_back(std::log(base));
            ly.push_back(std::log(env));
        }
        double slope_far = fit_slope(lx, ly);
        rb.result("large_r_slope", slope_far);
        rb.check_range("large_r_slope", slope_far, -1.1, -0.9,
                       "log-log slope of the oscillation envelope over r in [1e2, 1e3] = -1 +- 0.1");
    }

    return rb.finish();
}

CommandResult cmd_fk(const RunConfig& cfg) {
    if (!(cfg.t > 0.0))
        throw std::invalid_argument("t must be positive; at t=0 the estimate degenerates to the "
                                    "section value itself");
    if (cfg.n_steps < 10)
        throw std::invalid_argument("t must cover at least ten steps (n_steps >= 10)");

    ReportBuilder rb("fk", cfg);
    ChartAtlas atlas{cfg.charge, cfg.delta, cfg.switch_margin};
    SectionInD section = section_for(cfg);
    double h = cfg.t / cfg.n_steps;

    ChartId chart = home_chart(cfg.x);
    auto spectral = section_eval(semigroup_apply(section, cfg.t), cfg.x, chart).value;

    PathConfig tmpl{cfg.t, cfg.n_steps, cfg.seed, 0};
    auto est = fk_estimate(section, cfg.x, cfg.t, cfg.n_paths, tmpl, atlas);

    double diff = std::abs(est.mean - spectral);
    double budget = 3.0 * est.stderr_ + cfg.c_budget * std::sqrt(h);

    rb.result("h", h);
    rb.result("mc_mean", complex_json(est.mean));
    rb.result("mc_stderr", est.stderr_);
    rb.result("spectral", complex_json(spectral));
    rb.result("difference", diff);
    rb.result("agreement_budget", budget);
    rb.result("n_rejected", est.n_rejected);
    rb.check("fk_agreement", diff, budget,
             "|mc_mean - spectral| <= 3 stderr + c_budget sqrt(h)");

    // optional step-refinement table, emitted when a csv path is configured
    if (!cfg.csv_path.empty()) {
        std::vector<std::array<double, 5>> rows;
        json table = json::array();
        for (int mult : {1, 4, 16}) {
            int steps = cfg.n_steps * mult;
            double hm = cfg.t / steps;
            PathConfig pt{cfg.t, steps, cfg.seed, 0};
            auto em = fk_estimate(section, cfg.x, cfg.t, cfg.n_paths, pt, atlas);
            rows.push_back({hm, static_cast<double>(cfg.n_paths), em.mean.real(),
                            em.mean.imag(), em.stderr_});
            json row;
            row["h"] = hm;
            row["n_paths"] = cfg.n_paths;
            row["value"] = complex_json(em.mean);
            row["stderr"] = em.stderr_;
            table.push_back(std::move(row));
        }
        write_csv(cfg.csv_path, rows);
        rb.result("refinement_table", std::move(table));
    }

    return rb.finish();
}

CommandResult cmd_convergence(const RunConfig& cfg) {
    ReportBuilder rb("convergence", cfg);
    ChartAtlas atlas{cfg.charge, cfg.delta, cfg.switch_margin};
    SectionInD section = section_for(cfg);
    ChartId chart = home_chart(cfg.x);

    // stderr should fall like 1/sqrt(N)
    {
        std::vector<double> lx, ly;
        std::vector<std::array<double, 5>> rows;
        json table = json::array();
        int steps = 500;
        double h = cfg.t / steps;
        for (long n_paths : {1000L, 10000L, 100000L}) {
            PathConfig tmpl{cfg.t, steps, cfg.seed, 0};
            auto est = fk_estimate(section, cfg.x, cfg.t, n_paths, tmpl, atlas);
            lx.push_back(std::log(static_cast<double>(n_paths)));
            ly.push_back(std::log(est.stderr_));
            rows.push_back({h, static_cast<double>(n_paths), est.mean.real(), est.mean.imag(),
                            est.stderr_});
            json row;
            row["h"] = h;
            row["n_paths"] = n_paths;
            row["value"] = complex_json(est.mean);
            row["stderr"] = est.stderr_;
            table.push_back(std::move(row));
        }
        double slope = fit_slope(lx, ly);
        rb.result("stderr_table", std::move(table));
        rb.result("stderr_slope", slope);
        rb.check_range("stderr_slope", slope, -0.55, -0.45,
                       "log stderr vs log N slope over N in {1e3, 1e4, 1e5} = -0.5 +- 0.05");
        if (!cfg.csv_path.empty()) write_csv(cfg.csv_path, rows);
    }

    // per-path studies on dyadically refined copies of the same paths:
    // one fine path per stream, subsampled at strides 16/4/1 so the path is
    // fixed while h varies. The start point sits in the equatorial band so
    // every path exercises both charts.
    {
        const int n0 = 256;
        const int nf = 16 * n0;
        const int n_study = 1000;
        const Point3 x_study{2.0, 0.0, 0.2};
        const double t_study = 0.4;
        ChartAtlas narrow{cfg.charge, 0.3, cfg.switch_margin};
        ChartAtlas wide{cfg.charge, 0.6, cfg.switch_margin};
        ChartId study_chart = home_chart(x_study);
        rb.result("study_x", point_json(x_study));
        rb.result("study_t", t_study);
        rb.result("study_n_steps_coarse", n0);

        auto g = [](const Point3& x) { return x.x3 / norm(x); };
        auto grad_g = [](const Point3& x) {
            double r = norm(x), r3 = r * r * r;
            return Covector3{-x.x3 * x.x1 / r3, -x.x3 * x.x2 / r3,
                             1.0 / r - x.x3 * x.x3 / r3};
        };

        double chart_diff[2] = {0.0, 0.0};
        double refine_diff[2] = {0.0, 0.0};
        double grad_resid[2] = {0.0, 0.0};
        long used = 0;

        for (long i = 0; i < n_study; ++i) {
            PathConfig pc{t_study, nf, cfg.seed, static_cast<uint64_t>(i)};
            auto fine = sample_brownian_path(x_study, pc);
            BrownianPath grids[3] = {subsample(fine, 16), subsample(fine, 4), fine};

            std::complex<double> v_narrow[2], v_wide[2], v_own[3];
            bool ok = true;
            for (int gi = 0; gi < 3 && ok; ++gi) {
                try {
                    auto st = stochastic_transport(grids[gi], atlas, study_chart);
                    v_own[gi] =
                        transport_inverse_apply(st, section, grids[gi], atlas, study_chart);
                    if (gi < 2) {
                        auto sn = stochastic_transport(grids[gi], narrow, study_chart);
                        v_narrow[gi] =
                            transport_inverse_apply(sn, section, grids[gi], narrow, study_chart);
                        auto sw = stochastic_transport(grids[gi], wide, study_chart);
                        v_wide[gi] =
                            transport_inverse_apply(sw, section, grids[gi], wide, study_chart);
                    }
                } catch (const std::runtime_error&) {
                    ok = false;
                }
            }
            if (ok) {
                ++used;
                for (int gi = 0; gi < 2; ++gi)
                    chart_diff[gi] += std::abs(v_narrow[gi] - v_wide[gi]);
                refine_diff[0] += std::abs(v_own[0] - v_own[1]);
                refine_diff[1] += std::abs(v_own[1] - v_own[2]);
            }
            for (int gi = 0; gi < 2; ++gi) {
                const BrownianPath& p = grids[gi];
                grad_resid[gi] += std::abs(stratonovich_integral(p, grad_g) -
                                           (g(p.points.back()) - g(p.points.front())));
            }
        }

        double r_chart = chart_diff[0] / chart_diff[1];
        double r_refine = refine_diff[0] / refine_diff[1];
        double r_grad = grad_resid[0] / grad_resid[1];
        rb.result("paths_used", used);
        rb.result("chart_choice_diff_h", chart_diff[0] / used);
        rb.result("chart_choice_diff_h4", chart_diff[1] / used);
        rb.result("chart_choice_shrink", r_chart);
        rb.result("refinement_diff_h", refine_diff[0] / used);
        rb.result("refinement_diff_h4", refine_diff[1] / used);
        rb.result("refinement_shrink", r_refine);
        rb.result("gradient_residual_h", grad_resid[0] / n_study);
        rb.result("gradient_residual_h4", grad_resid[1] / n_study);
        rb.result("gradient_residual_shrink", r_grad);
        rb.check_range("chart_choice_shrink", r_chart, 1.4, 2.6,
                       "mean per-path |v(delta=0.3) - v(delta=0.6)| shrinks by 2x (+-30%) "
                       "under h -> h/4, 1000 fixed paths");
        rb.check_range("refinement_shrink", r_refine, 1.4, 2.6,
                       "mean per-path |v(h) - v(h/4)| shrinks by 2x (+-30%) under h -> h/4, "
                       "1000 fixed paths");
        rb.check_range("gradient_residual_shrink", r_grad, 1.4, 2.6,
                       "mean per-path Stratonovich gradient-identity residual shrinks by 2x "
                       "(+-30%) under h -> h/4, 1000 fixed paths");
    }

    return rb.finish();
}

} // namespace monofk
