#include "batchq/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <variant>

#include "batchq/error.hpp"

namespace batchq {

std::uint64_t default_warmup(double tail_rate) {
    const double w = tail_rate < 1.0 ? 20.0 / (1.0 - tail_rate) : 1e4;
    return std::max<std::uint64_t>(10'000, static_cast<std::uint64_t>(std::ceil(w)));
}

double EmpiricalDist::prob(int n) const {
    if (total == 0 || n < 0 || n >= static_cast<int>(counts.size())) return 0.0;
    return static_cast<double>(counts[static_cast<std::size_t>(n)]) / static_cast<double>(total);
}

std::vector<double> EmpiricalDist::probs() const {
    std::vector<double> p(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) p[i] = prob(static_cast<int>(i));
    return p;
}

namespace {

enum Stream : std::uint32_t { kInterArrival = 1, kBatchSize = 2, kServiceTrial = 3, kCapacity = 4 };

std::mt19937_64 make_stream(std::uint64_t seed, Stream s) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(s)};
    return std::mt19937_64(seq);
}

// Positive integer law backed by either a finite pmf or a geometric law.
class IntegerSampler {
public:
    explicit IntegerSampler(const std::variant<FinitePmf, Geometric>& law) {
        if (const auto* f = std::get_if<FinitePmf>(&law)) {
            std::vector<double> w;
            for (const auto& pt : f->points()) {
                values_.push_back(pt.point);
                w.push_back(pt.mass);
            }
            pick_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
        } else {
            geometric_ = true;
            geo_ = std::geometric_distribution<std::int64_t>(std::get<Geometric>(law).p);
        }
    }

    std::int64_t operator()(std::mt19937_64& rng) {
        if (geometric_) return geo_(rng) + 1;
        return values_[pick_(rng)];
    }

private:
    bool geometric_ = false;
    std::vector<std::int64_t> values_;
    std::discrete_distribution<std::size_t> pick_;
    std::geometric_distribution<std::int64_t> geo_;
};

// Accumulates per-batch proportions for the batch-means variance.
class BatchMeans {
public:
    explicit BatchMeans(std::size_t bins) : current_(bins, 0), sum_(bins, 0.0), sumsq_(bins, 0.0) {}

    void add(std::size_t bin) {
        ++current_[bin];
        ++current_total_;
    }

    void close_batch() {
        if (current_total_ > 0) {
            const double n = static_cast<double>(current_total_);
            for (std::size_t i = 0; i < current_.size(); ++i) {
                const double p = static_cast<double>(current_[i]) / n;
                sum_[i] += p;
                sumsq_[i] += p * p;
            }
            ++closed_;
        }
        std::fill(current_.begin(), current_.end(), 0);
        current_total_ = 0;
    }

    std::vector<double> half_widths() const {
        std::vector<double> hw(sum_.size(), 0.0);
        if (closed_ < 2) return hw;
        const double b = closed_;
        for (std::size_t i = 0; i < sum_.size(); ++i) {
            const double mean = sum_[i] / b;
            const double var = std::max(0.0, (sumsq_[i] - b * mean * mean) / (b - 1.0));
            hw[i] = 1.96 * std::sqrt(var / b);
        }
        return hw;
    }

private:
    std::vector<std::uint64_t> current_;
    std::uint64_t current_total_ = 0;
    std::vector<double> sum_;
    std::vector<double> sumsq_;
    int closed_ = 0;
};

}  // namespace

SimResult simulate(const QueueModel& model, const SimConfig& cfg) {
    if (cfg.warmup >= cfg.slots || cfg.histogram_cap < 1 || cfg.batches < 1)
        throw Error(ErrorCode::InvalidModel,
                    "simulation needs warmup < slots, histogram_cap >= 1 and batches >= 1");

    auto rng_arrival = make_stream(cfg.seed, kInterArrival);
    auto rng_batch = make_stream(cfg.seed, kBatchSize);
    auto rng_service = make_stream(cfg.seed, kServiceTrial);
    auto rng_capacity = make_stream(cfg.seed, kCapacity);

    IntegerSampler inter_arrival(model.arrival().law());
    IntegerSampler batch_size(std::variant<FinitePmf, Geometric>(model.batch()));
    IntegerSampler capacity(model.capacity().law());
    std::bernoulli_distribution completes(model.mu());

    const std::size_t bins = static_cast<std::size_t>(cfg.histogram_cap) + 1;
    SimResult out;
    out.arbitrary = {EpochKind::Arbitrary, std::vector<std::uint64_t>(bins, 0), 0, {}};
    out.pre_arrival = {EpochKind::PreArrival, std::vector<std::uint64_t>(bins, 0), 0, {}};
    BatchMeans arb_bm(bins);
    BatchMeans pre_bm(bins);

    const std::uint64_t observed = cfg.slots - cfg.warmup;
    const std::uint64_t batch_len = std::max<std::uint64_t>(1, observed / static_cast<std::uint64_t>(cfg.batches));
    const auto bin_of = [&](std::int64_t q) {
        return static_cast<std::size_t>(std::min<std::int64_t>(q, cfg.histogram_cap));
    };

    std::int64_t queue = 0;
    std::int64_t until_arrival = 0;
    for (std::uint64_t k = 0; k < cfg.slots; ++k) {
        const bool record = k >= cfg.warmup;
        if (record) {
            const std::uint64_t pos = k - cfg.warmup;
            if (pos > 0 && pos % batch_len == 0 && pos / batch_len < static_cast<std::uint64_t>(cfg.batches)) {
                arb_bm.close_batch();
                pre_bm.close_batch();
            }
            const std::size_t bin = bin_of(queue);
            ++out.arbitrary.counts[bin];
            arb_bm.add(bin);
        }
        if (until_arrival == 0) {
            if (record) {
                const std::size_t bin = bin_of(queue);
                ++out.pre_arrival.counts[bin];
                pre_bm.add(bin);
                ++out.arrivals;
            }
            queue += batch_size(rng_batch);
            until_arrival = inter_arrival(rng_arrival);
        }
        --until_arrival;
        if (completes(rng_service)) queue -= std::min(queue, capacity(rng_capacity));
    }
    arb_bm.close_batch();
    pre_bm.close_batch();

    out.observed_slots = observed;
    out.arbitrary.total = observed;
    out.pre_arrival.total = out.arrivals;
    out.arbitrary.half_width_95 = arb_bm.half_widths();
    out.pre_arrival.half_width_95 = pre_bm.half_widths();
    return out;
}

CompareReport compare(const EpochDist& analytic, const EmpiricalDist& empirical, double tvd_threshold,
                      double z_threshold) {
    if (analytic.kind() != empirical.kind) {
        throw Error(ErrorCode::EpochKindMismatch, std::string("cannot compare ") +
                                                      to_string(analytic.kind()) + " with " +
                                                      to_string(empirical.kind) + " histogram");
    }
    const int cap = empirical.cap();
    const auto exact = analytic.truncate(cap - 1);
    std::vector<double> expected = exact.probs;
    expected.push_back(std::max(0.0, 1.0 - exact.captured));

    CompareReport rep{analytic.kind(), 0.0, {}, 0.0, 0, tvd_threshold, z_threshold, false};
    const double n = static_cast<double>(empirical.total);
    for (int i = 0; i <= cap; ++i) {
        const double p = std::max(0.0, expected[static_cast<std::size_t>(i)]);
        const double phat = empirical.prob(i);
        rep.tvd += 0.5 * std::abs(phat - p);
        // Binomial variance at the null p, inflated by the autocorrelation
        // factor the batch means measure at the observed proportion. A sparse
        // bin can be short of counts (null variance wins) or hold one
        // clustered excursion (batch-means variance wins).
        double var = n > 0 ? p * (1.0 - p) / n : 0.0;
        if (!empirical.half_width_95.empty()) {
            const double bm = empirical.half_width_95[static_cast<std::size_t>(i)] / 1.96;
            if (phat > 0.0 && phat < 1.0) var *= std::max(1.0, bm * bm / (phat * (1.0 - phat) / n));
            var = std::max(var, bm * bm);
        }
        const double se = std::sqrt(var);
        const double z = se > 0.0 ? (phat - p) / se : 0.0;
        rep.z.push_back(z);
        if (std::abs(z) > rep.max_abs_z) {
            rep.max_abs_z = std::abs(z);
            rep.worst_bin = i;
        }
    }
    rep.pass = rep.tvd < tvd_threshold && rep.max_abs_z < z_threshold;
    return rep;
}

}  // namespace batchq
