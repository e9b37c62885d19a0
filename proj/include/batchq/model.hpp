#pragma once

#include "batchq/pgf.hpp"

namespace batchq {

/// GI^X/Geo^Y/1 queue under the early arrival system.
///
/// Arrivals happen just after a slot boundary, departures just before the
/// next one, so a batch may leave in the slot it arrived. The server
/// completes a service with probability mu per slot and then removes
/// min(Y, queue) customers.
class QueueModel {
public:
    const InterArrivalDist& arrival() const noexcept { return arrival_; }
    const FinitePmf& batch() const noexcept { return batch_; }
    const CapacityDist& capacity() const noexcept { return capacity_; }
    double mu() const noexcept { return mu_; }

    /// Batch arrival rate per slot, 1 / E[A].
    double lambda() const noexcept { return lambda_; }
    double g_bar() const noexcept { return g_bar_; }
    double y_bar() const noexcept { return y_bar_; }
    double rho() const noexcept { return rho_; }
    /// Largest arriving batch size.
    int b() const noexcept { return batch_.max_support(); }

    friend bool operator==(const QueueModel& x, const QueueModel& y) {
        return x.arrival_ == y.arrival_ && x.batch_ == y.batch_ && x.capacity_ == y.capacity_ &&
               x.mu_ == y.mu_;
    }

private:
    friend QueueModel build_model(InterArrivalDist, FinitePmf, double, CapacityDist);
    QueueModel(InterArrivalDist a, FinitePmf g, double mu, CapacityDist y);

    InterArrivalDist arrival_;
    FinitePmf batch_;
    CapacityDist capacity_;
    double mu_;
    double lambda_;
    double g_bar_;
    double y_bar_;
    double rho_;
};

/// Validates and assembles a model. mu must lie in (0, 1]; mu = 1 is
/// accepted for simulation only, the analytic solvers reject it.
///
/// Throws Error{InvalidModel} for a bad mu and Error{Unstable} when
/// rho = lambda g_bar / (mu y_bar) >= 1.
QueueModel build_model(InterArrivalDist arrival, FinitePmf batch, double mu, CapacityDist capacity);

}  // namespace batchq
