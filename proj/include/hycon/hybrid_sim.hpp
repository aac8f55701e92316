#pragma once

/// @file hybrid_sim.hpp
/// Hybrid time domains and exact-flow simulation of linear flow/jump networks:
///
///     flow:  x' = -L_f x              between jumps
///     jump:  x+ = (I - alpha L_j) x   at each jump time

#include <bit>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <unordered_map>
#include <vector>

#include "hycon/error.hpp"
#include "hycon/matrix.hpp"
#include "hycon/partition.hpp"
#include "hycon/spectral.hpp"

namespace hycon {

enum class DomainKind { Periodic, Random };

struct HybridTimeDomain {
    DomainKind kind = DomainKind::Periodic;
    std::vector<double> jump_times;  ///< strictly increasing, all in (0, horizon]
    double horizon = 0.0;
    double tau_min = 0.0;  ///< dwell bounds; equal to the period for periodic domains
    double tau_max = 0.0;
    std::uint64_t seed = 0;

    [[nodiscard]] std::size_t jump_count() const noexcept { return jump_times.size(); }

    /// Gaps between consecutive jumps, starting from t = 0.
    [[nodiscard]] std::vector<double> dwell_times() const {
        std::vector<double> out;
        double prev = 0.0;
        for (double t : jump_times) {
            out.push_back(t - prev);
            prev = t;
        }
        return out;
    }

    friend bool operator==(const HybridTimeDomain&, const HybridTimeDomain&) = default;
};

/// Jumps at tau, 2 tau, ... up to and including the horizon.
[[nodiscard]] inline HybridTimeDomain periodic_domain(double tau, double horizon) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("periodic_domain: period must be positive");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("periodic_domain: horizon must be positive");
    HybridTimeDomain d;
    d.kind = DomainKind::Periodic;
    d.horizon = horizon;
    d.tau_min = d.tau_max = tau;
    for (std::size_t k = 1;; ++k) {
        const double t = static_cast<double>(k) * tau;
        if (t > horizon * (1.0 + 1e-14)) break;
        d.jump_times.push_back(std::min(t, horizon));
    }
    return d;
}

/// Dwell times drawn independently and uniformly from the open interval
/// (tau_min, tau_max) with a seeded 64-bit Mersenne Twister.
[[nodiscard]] inline HybridTimeDomain random_domain(double tau_min, double tau_max, std::uint64_t seed,
                                                    double horizon) {
    if (!(tau_min > 0.0) || !(tau_min < tau_max) || !std::isfinite(tau_max)) {
        throw InvalidArgument("random_domain: need 0 < tau_min < tau_max");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("random_domain: horizon must be positive");
    HybridTimeDomain d;
    d.kind = DomainKind::Random;
    d.horizon = horizon;
    d.tau_min = tau_min;
    d.tau_max = tau_max;
    d.seed = seed;
    std::mt19937_64 rng(seed);
    auto uniform01 = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    double t = 0.0;
    for (;;) {
        double dwell = 0.0;
        do {
            dwell = tau_min + uniform01() * (tau_max - tau_min);
        } while (!(dwell > tau_min && dwell < tau_max));
        t += dwell;
        if (t > horizon) break;
        d.jump_times.push_back(t);
    }
    return d;
}

struct Sample {
    double t = 0.0;
    std::size_t j = 0;
    Vector x;
};

struct HybridTrajectory {
    std::vector<Sample> samples;
    HybridTimeDomain domain;
    double sample_dt = 0.0;

    [[nodiscard]] const Sample& final_sample() const { return samples.back(); }
};

/// Simulates x' = F x between jumps and x+ = J x at each jump. Within each
/// flow interval the state is sampled at the interval start, at every
/// multiple of `sample_dt` strictly inside, and at the interval end; the flow
/// is evaluated exactly as expm(F (t - t_j)) x(t_j).
[[nodiscard]] inline HybridTrajectory simulate_linear(const Matrix& flow_generator, const Matrix& jump_map,
                                                      const HybridTimeDomain& domain, std::span<const double> x0,
                                                      double sample_dt) {
    const std::size_t n = x0.size();
    if (flow_generator.rows() != n || flow_generator.cols() != n || jump_map.rows() != n || jump_map.cols() != n) {
        throw DimensionError("simulate: state length " + std::to_string(n) + " vs flow " + flow_generator.shape() +
                             ", jump " + jump_map.shape());
    }
    if (!(sample_dt > 0.0) || !std::isfinite(sample_dt)) throw InvalidArgument("simulate: sample_dt must be positive");
    for (double v : x0)
        if (!std::isfinite(v)) throw InvalidArgument("simulate: non-finite initial state");

    HybridTrajectory traj;
    traj.domain = domain;
    traj.sample_dt = sample_dt;

    std::unordered_map<std::uint64_t, Matrix> cache;
    auto propagator = [&](double dt) -> const Matrix& {
        const auto key = std::bit_cast<std::uint64_t>(dt);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        if (cache.size() > 4096) cache.clear();
        return cache.emplace(key, expm(flow_generator * dt)).first->second;
    };
    auto record = [&](double t, std::size_t j, Vector x) {
        for (double v : x)
            if (!std::isfinite(v)) throw DivergenceError(t, j);
        traj.samples.push_back({t, j, std::move(x)});
    };

    Vector start(x0.begin(), x0.end());
    double t_start = 0.0;
    for (std::size_t j = 0; j <= domain.jump_times.size(); ++j) {
        const bool last = j == domain.jump_times.size();
        const double t_end = last ? domain.horizon : domain.jump_times[j];
        record(t_start, j, start);
        auto k = static_cast<std::int64_t>(std::floor(t_start / sample_dt)) + 1;
        for (;; ++k) {
            const double t = static_cast<double>(k) * sample_dt;
            if (t >= t_end) break;
            if (t <= t_start) continue;
            record(t, j, propagator(t - t_start) * start);
        }
        Vector end = t_end > t_start ? propagator(t_end - t_start) * start : start;
        if (t_end > t_start) record(t_end, j, end);
        if (last) break;
        start = jump_map * end;
        t_start = t_end;
    }
    return traj;
}

[[nodiscard]] inline HybridTrajectory simulate(const Matrix& l_flow, const Matrix& l_jump, double alpha,
                                               const HybridTimeDomain& domain, std::span<const double> x0,
                                               double sample_dt) {
    if (l_flow.shape() != l_jump.shape()) {
        throw DimensionError("simulate: flow " + l_flow.shape() + " vs jump " + l_jump.shape());
    }
    if (!(alpha > 0.0)) throw InvalidArgument("simulate: gain must be positive");
    return simulate_linear(-l_flow, Matrix::identity(l_jump.rows()) - alpha * l_jump, domain, x0, sample_dt);
}

/// Largest within-cell range of x; zero iff x is constant on every cell.
[[nodiscard]] inline double cell_spread(std::span<const double> x, const Partition& p) {
    if (x.size() != p.size()) {
        throw DimensionError("cell_spread: state length " + std::to_string(x.size()) + " vs partition over " +
                              std::to_string(p.size()) + " nodes");
    }
    double spread = 0.0;
    for (const auto& cell : p.cells()) {
        double lo = x[cell.front()];
        double hi = lo;
        for (Node v : cell) {
            lo = std::min(lo, x[v]);
            hi = std::max(hi, x[v]);
        }
        spread = std::max(spread, hi - lo);
    }
    return spread;
}

[[nodiscard]] inline double max_cell_spread(const HybridTrajectory& traj, const Partition& p) {
    double s = 0.0;
    for (const auto& sample : traj.samples) s = std::max(s, cell_spread(sample.x, p));
    return s;
}

/// Comma-separated rows "t,j,x_0,...,x_{N-1}" with 17 significant digits.
inline void write_trajectory_csv(std::ostream& os, const HybridTrajectory& traj) {
    const std::size_t n = traj.samples.empty() ? 0 : traj.samples.front().x.size();
    os << "t,j";
    for (std::size_t i = 0; i < n; ++i) os << ",x_" << i;
    os << '\n';
    const auto old = os.precision(17);
    for (const auto& s : traj.samples) {
        os << s.t << ',' << s.j;
        for (double v : s.x) os << ',' << v;
        os << '\n';
    }
    os.precision(old);
}

}  // namespace hycon
