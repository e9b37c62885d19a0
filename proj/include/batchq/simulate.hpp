#pragma once

#include <cstdint>
#include <vector>

#include "batchq/model.hpp"
#include "batchq/steady_state.hpp"

namespace batchq {

struct SimConfig {
    std::uint64_t slots = 10'000'000;
    /// Leading slots excluded from the histograms.
    std::uint64_t warmup = 10'000;
    std::uint64_t seed = 1;
    /// Queue lengths >= histogram_cap share one overflow bucket.
    int histogram_cap = 512;
    /// Batch-means batches for the confidence half-widths.
    int batches = 100;
};

/// max(10^4, 20 / (1 - tail_rate)) slots.
std::uint64_t default_warmup(double tail_rate);

/// Histogram of observed queue lengths at one kind of epoch.
struct EmpiricalDist {
    EpochKind kind;
    /// counts[n] for n < cap, counts[cap] is the overflow bucket.
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;
    /// 95% normal-approximation half-width per bin, from batch means.
    /// Empty when the histogram was not produced by simulate().
    std::vector<double> half_width_95;

    int cap() const noexcept { return static_cast<int>(counts.size()) - 1; }
    double prob(int n) const;
    std::vector<double> probs() const;
};

struct SimResult {
    EmpiricalDist arbitrary;
    EmpiricalDist pre_arrival;
    std::uint64_t arrivals = 0;
    std::uint64_t observed_slots = 0;
};

/// Slot-by-slot replay of the early arrival system. Each slot records the
/// queue at its opening boundary, admits a batch if the inter-arrival
/// counter has run out, then completes a service with probability mu and
/// removes min(Y, queue) customers. Independent generator streams drive
/// inter-arrival times, batch sizes, service trials and capacities, so a
/// fixed seed replays bit-identically.
SimResult simulate(const QueueModel& model, const SimConfig& cfg);

struct CompareReport {
    EpochKind kind;
    double tvd;
    /// Per-bin z-scores, bins 0..cap-1 then the overflow bucket.
    std::vector<double> z;
    double max_abs_z;
    int worst_bin;
    double tvd_threshold;
    double z_threshold;
    bool pass;
};

inline constexpr double kDefaultTvdThreshold = 5e-3;
inline constexpr double kDefaultZThreshold = 4.0;

/// Throws Error{EpochKindMismatch}.
CompareReport compare(const EpochDist& analytic, const EmpiricalDist& empirical,
                      double tvd_threshold = kDefaultTvdThreshold,
                      double z_threshold = kDefaultZThreshold);

}  // namespace batchq
