#include "monofk/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

namespace monofk {

namespace {

constexpr double kPi = 3.14159265358979323846;

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline double to_unit(uint32_t w) { return (double(w) + 0.5) * (1.0 / 4294967296.0); }

// Three standard normals from one Philox block via Box-Muller.
void step_normals(uint64_t key, uint32_t step, uint32_t retry, uint64_t path, double z[3]) {
    const uint32_t counter[4] = {step, retry, uint32_t(path), uint32_t(path >> 32)};
    uint32_t w[4];
    Philox4x32::block(key, counter, w);
    const double u0 = to_unit(w[0]), u1 = to_unit(w[1]);
    const double u2 = to_unit(w[2]), u3 = to_unit(w[3]);
    const double r0 = std::sqrt(-2.0 * std::log(u0));
    z[0] = r0 * std::cos(2.0 * kPi * u1);
    z[1] = r0 * std::sin(2.0 * kPi * u1);
    z[2] = std::sqrt(-2.0 * std::log(u2)) * std::cos(2.0 * kPi * u3);
}

double xi_of(const Point3& x) { return x.x3 / norm(x); }

bool in_overlap(const ChartAtlas& atlas, const Point3& x) {
    return std::abs(xi_of(x)) < atlas.delta;
}

void apply_switch(TransportState& state, const ChartAtlas& atlas, const Point3& x, int step) {
    const double phi = azimuth(x);
    const ChartId from = state.chart;
    const ChartId to = from == ChartId::Plus ? ChartId::Minus : ChartId::Plus;
    // v_plus = exp(2 i n phi) v_minus, so leaving Plus divides by the
    // transition phase and leaving Minus multiplies by it.
    state.phase_angle += (from == ChartId::Plus ? -2.0 : 2.0) * atlas.n * phi;
    state.chart = to;
    // A switch-and-switch-back at one grid point composes to the identity;
    // drop the pair so switch_times stays strictly increasing.
    if (!state.switch_times.empty() && state.switch_times.back().step == step &&
        state.switch_times.back().to == from && state.switch_times.back().from == to) {
        state.switch_times.pop_back();
        return;
    }
    state.switch_times.push_back({step, from, to});
}

} // namespace

void Philox4x32::block(uint64_t key, const uint32_t counter[4], uint32_t out[4]) {
    uint32_t c0 = counter[0], c1 = counter[1], c2 = counter[2], c3 = counter[3];
    uint32_t k0 = uint32_t(key), k1 = uint32_t(key >> 32);
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k0 += kPhiloxW0;
            k1 += kPhiloxW1;
        }
        const uint64_t p0 = uint64_t(kPhiloxM0) * c0;
        const uint64_t p1 = uint64_t(kPhiloxM1) * c2;
        const uint32_t n0 = uint32_t(p1 >> 32) ^ c1 ^ k0;
        const uint32_t n1 = uint32_t(p1);
        const uint32_t n2 = uint32_t(p0 >> 32) ^ c3 ^ k1;
        const uint32_t n3 = uint32_t(p0);
        c0 = n0;
        c1 = n1;
        c2 = n2;
        c3 = n3;
    }
    out[0] = c0;
    out[1] = c1;
    out[2] = c2;
    out[3] = c3;
}

BrownianPath sample_brownian_path(const Point3& x0, const PathConfig& cfg) {
    if (!(norm(x0) > 0.0)) throw std::domain_error("sample_brownian_path: start at origin");
    if (cfg.n_steps < 1 || !(cfg.t_final > 0.0))
        throw std::invalid_argument("sample_brownian_path: need n_steps >= 1 and t_final > 0");
    const int n = cfg.n_steps;
    const double sh = std::sqrt(cfg.t_final / n);
    const double reject_radius = 1e-9 * std::max(1.0, norm(x0));
    BrownianPath path;
    path.times.resize(n + 1);
    path.points.resize(n + 1);
    path.points[0] = x0;
    long rejections = 0;
    for (int j = 0; j <= n; ++j) path.times[j] = cfg.t_final * j / n;
    for (int j = 1; j <= n; ++j) {
        const Point3& prev = path.points[j - 1];
        for (uint32_t retry = 0;; ++retry) {
            double z[3];
            step_normals(cfg.seed, uint32_t(j), retry, cfg.path_index, z);
            const Point3 cand{prev.x1 + sh * z[0], prev.x2 + sh * z[1], prev.x3 + sh * z[2]};
            if (norm(cand) > reject_radius) {
                path.points[j] = cand;
                break;
            }
            if (++rejections > 1000000)
                throw std::runtime_error("sample_brownian_path: resample budget exceeded");
        }
    }
    return path;
}

double ito_integral(const BrownianPath& path, const std::function<Covector3(const Point3&)>& f) {
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < path.points.size(); ++j) {
        const Point3& a = path.points[j];
        const Point3& b = path.points[j + 1];
        const Covector3 fa = f(a);
        acc += fa.c1 * (b.x1 - a.x1) + fa.c2 * (b.x2 - a.x2) + fa.c3 * (b.x3 - a.x3);
    }
    return acc;
}

double stratonovich_integral(const BrownianPath& path,
                             const std::function<Covector3(const Point3&)>& f) {
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < path.points.size(); ++j) {
        const Point3& a = path.points[j];
        const Point3& b = path.points[j + 1];
        const Covector3 fa = f(a);
        const Covector3 fb = f(b);
        acc += 0.5 * ((fa.c1 + fb.c1) * (b.x1 - a.x1) + (fa.c2 + fb.c2) * (b.x2 - a.x2) +
                      (fa.c3 + fb.c3) * (b.x3 - a.x3));
    }
    return acc;
}

TransportState stochastic_transport(const BrownianPath& path, const ChartAtlas& atlas,
                                    ChartId start_chart, const std::vector<int>& forced_toggles) {
    if (path.points.size() < 1) throw std::invalid_argument("stochastic_transport: empty path");
    if (!chart_contains(atlas, start_chart, path.points.front()))
        throw std::domain_error("stochastic_transport: start point outside start chart");
    TransportState state;
    state.chart = start_chart;
    const double trigger = atlas.delta * atlas.switch_margin;
    const int last = int(path.points.size()) - 1;

    auto forced_count = [&forced_toggles](int step) {
        return std::count(forced_toggles.begin(), forced_toggles.end(), step);
    };
    auto run_forced = [&](int step) {
        const long c = forced_count(step);
        for (long i = 0; i < c; ++i) {
            if (!in_overlap(atlas, path.points[step]))
                throw std::domain_error("stochastic_transport: forced toggle outside overlap");
            apply_switch(state, atlas, path.points[step], step);
        }
    };

    for (int j = 0; j < last; ++j) {
        run_forced(j);
        const Point3& a = path.points[j];
        const Point3& b = path.points[j + 1];
        if (!(norm(a) > 0.0) || !(norm(b) > 0.0))
            throw std::runtime_error("stochastic_transport: origin collision");
        if (chart_contains(atlas, state.chart, b)) {
            // Increment lies in the current chart; accumulate, then let the
            // hysteresis rule fire at the new point.
            const Covector3 fa = connection_form(atlas, state.chart, a);
            const Covector3 fb = connection_form(atlas, state.chart, b);
            state.phase_angle += 0.5 * ((fa.c1 + fb.c1) * (b.x1 - a.x1) +
                                        (fa.c2 + fb.c2) * (b.x2 - a.x2) +
                                        (fa.c3 + fb.c3) * (b.x3 - a.x3));
            const double xib = xi_of(b);
            const bool fire = state.chart == ChartId::Plus ? xib < -trigger : xib > trigger;
            if (fire) apply_switch(state, atlas, b, j + 1);
        } else if (in_overlap(atlas, a)) {
            // New point jumped past the whole hysteresis band: switch at the
            // old point, then take the increment in the new chart.
            apply_switch(state, atlas, a, j);
            const Covector3 fa = connection_form(atlas, state.chart, a);
            const Covector3 fb = connection_form(atlas, state.chart, b);
            state.phase_angle += 0.5 * ((fa.c1 + fb.c1) * (b.x1 - a.x1) +
                                        (fa.c2 + fb.c2) * (b.x2 - a.x2) +
                                        (fa.c3 + fb.c3) * (b.x3 - a.x3));
        } else {
            throw std::runtime_error(
                "stochastic_transport: step straddles both chart boundaries (h too coarse)");
        }
    }
    run_forced(last);
    return state;
}

std::complex<double> transport_inverse_apply(const TransportState& state,
                                             const SectionInD& section, const BrownianPath& path,
                                             const ChartAtlas& atlas, ChartId output_chart) {
    if (path.points.empty()) throw std::invalid_argument("transport_inverse_apply: empty path");
    const Point3& x0 = path.points.front();
    const Point3& xN = path.points.back();
    if (!chart_contains(atlas, output_chart, x0))
        throw std::domain_error("transport_inverse_apply: start point outside output chart");
    const ChartId start_chart =
        state.switch_times.empty() ? state.chart : state.switch_times.front().from;
    std::complex<double> v =
        section_eval(section, xN, state.chart).value * std::polar(1.0, -state.phase_angle);
    if (output_chart != start_chart) {
        const std::complex<double> rel = transition_phase(atlas, x0);
        v *= output_chart == ChartId::Plus ? rel : 1.0 / rel;
    }
    return v;
}

int worker_count() {
    if (const char* env = std::getenv("MONOFK_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? int(hw) : 1;
}

FkEstimate fk_estimate(const SectionInD& section, const Point3& x, double t, long n_paths,
                       const PathConfig& cfg_template, const ChartAtlas& atlas) {
    if (n_paths < 1) throw std::invalid_argument("fk_estimate: n_paths < 1");
    if (!(norm(x) > 0.0)) throw std::domain_error("fk_estimate: x at origin");
    const ChartId chart = xi_of(x) >= 0.0 ? ChartId::Plus : ChartId::Minus;

    std::vector<std::complex<double>> values(n_paths);
    std::vector<char> accepted(n_paths, 0);
    auto run_range = [&](long lo, long hi) {
        for (long i = lo; i < hi; ++i) {
            PathConfig cfg = cfg_template;
            cfg.t_final = t;
            cfg.path_index = uint64_t(i);
            try {
                const BrownianPath path = sample_brownian_path(x, cfg);
                const TransportState state = stochastic_transport(path, atlas, chart);
                values[i] = transport_inverse_apply(state, section, path, atlas, chart);
                accepted[i] = 1;
            } catch (const std::runtime_error&) {
                // resample budget / straddle / origin collision: drop the path
            }
        }
    };

    const int workers = std::min<long>(worker_count(), n_paths);
    if (workers <= 1) {
        run_range(0, n_paths);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (n_paths + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const long lo = w * chunk;
            const long hi = std::min<long>(n_paths, lo + chunk);
            if (lo < hi) pool.emplace_back(run_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    FkEstimate est;
    std::complex<double> sum = 0.0;
    for (long i = 0; i < n_paths; ++i)
        if (accepted[i]) {
            sum += values[i];
            ++est.n_paths;
        }
    est.n_rejected = n_paths - est.n_paths;
    if (est.n_rejected * 100 > n_paths)
        throw std::runtime_error("fk_estimate: more than 1% of paths rejected");
    est.mean = sum / double(est.n_paths);
    double ss = 0.0;
    for (long i = 0; i < n_paths; ++i)
        if (accepted[i]) ss += std::norm(values[i] - est.mean);
    est.stderr_ = est.n_paths > 1 ? std::sqrt(ss / (double(est.n_paths - 1) * est.n_paths)) : 0.0;
    return est;
}

} // namespace monofk
