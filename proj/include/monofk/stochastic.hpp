#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "monofk/geometry.hpp"
#include "monofk/spectral.hpp"

namespace monofk {

/// Philox4x32-10 counter-based generator: stateless block cipher mapping a
/// (key, counter) pair to four 32-bit words, so any path and step can be
/// reconstructed in isolation.
struct Philox4x32 {
    static void block(uint64_t key, const uint32_t counter[4], uint32_t out[4]);
};

/// Time grid and stream identity of one Brownian path.
struct PathConfig {
    double t_final = 1.0;
    int n_steps = 100;
    uint64_t seed = 0;
    uint64_t path_index = 0;
};

/// Realized Brownian path: times[0] = 0, points[0] = start, i.i.d. N(0, h)
/// coordinate increments with h = t_final/n_steps.
struct BrownianPath {
    std::vector<double> times;
    std::vector<Point3> points;
};

/// Stochastic parallel transport state: Pi = exp(i phase_angle) in the
/// current chart, with the record of discrete switch times.
struct TransportState {
    struct Switch {
        int step = 0;
        ChartId from = ChartId::Plus;
        ChartId to = ChartId::Minus;
    };
    ChartId chart = ChartId::Plus;
    double phase_angle = 0.0;
    std::vector<Switch> switch_times;
};

/// Monte Carlo Feynman-Kac estimate.
struct FkEstimate {
    std::complex<double> mean;
    double stderr_ = 0.0;
    long n_paths = 0;
    long n_rejected = 0;
};

/// Sample a Brownian path from the counter-based stream keyed by
/// (cfg.seed, cfg.path_index). Steps landing within 1e-9 * max(1, |x0|) of
/// the origin are rejected and redrawn; more than 1e6 rejections throw.
BrownianPath sample_brownian_path(const Point3& x0, const PathConfig& cfg);

/// Left-endpoint sum  sum_j f(X_j) . (X_{j+1} - X_j).
double ito_integral(const BrownianPath& path, const std::function<Covector3(const Point3&)>& f);

/// Midpoint sum  sum_j (f(X_j) + f(X_{j+1}))/2 . (X_{j+1} - X_j).
double stratonovich_integral(const BrownianPath& path,
                             const std::function<Covector3(const Point3&)>& f);

/// Walk the path accumulating the Stratonovich midpoint sum of the current
/// chart's connection; switch charts by the hysteresis rule (leave Plus once
/// x3/|x| < -delta*switch_margin, mirror for Minus), applying the transition
/// phase exactly at the switch grid point. forced_toggles lists step indices
/// at which a chart switch is additionally forced (the point must lie in the
/// overlap); listing an index twice is an exact no-op pair.
TransportState stochastic_transport(const BrownianPath& path, const ChartAtlas& atlas,
                                    ChartId start_chart,
                                    const std::vector<int>& forced_toggles = {});

/// Pi_t^{-1} Psi(X_t): evaluate the section at the endpoint in the final
/// chart, unwind the accumulated phase, and re-express at the start point in
/// output_chart.
std::complex<double> transport_inverse_apply(const TransportState& state,
                                             const SectionInD& section, const BrownianPath& path,
                                             const ChartAtlas& atlas, ChartId output_chart);

/// Monte Carlo estimate of E^x[Pi_t^{-1} Psi(X_t)] over n_paths independent
/// paths (path_index = 0..n_paths-1 on top of cfg.seed). The reduction is a
/// fixed-order sequential pass over the per-path values, so the result is
/// independent of the worker count. Paths whose sampling fails are counted
/// in n_rejected; more than 1% rejected aborts.
FkEstimate fk_estimate(const SectionInD& section, const Point3& x, double t, long n_paths,
                       const PathConfig& cfg_template, const ChartAtlas& atlas);

/// Worker count used by fk_estimate: MONOFK_THREADS if set, else hardware
/// concurrency.
int worker_count();

} // namespace monofk
