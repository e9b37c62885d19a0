#pragma once

// Stationary law of the slot-level Markov chain, built and solved directly.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"

namespace oracle {

struct ChainDist {
    std::vector<double> arbitrary;
    std::vector<double> pre_arrival;
};

// State (queue length q, slots until the next arrival u). Each slot: if u == 0
// a batch joins and u is redrawn as A - 1, otherwise u decreases; then with
// probability mu a capacity Y is drawn and min(Y, q) customers leave.
// Geometric arrivals (geometric_p > 0) collapse u to a single state with an
// arrival probability per slot. Queue lengths are cut at q_max: mass that would
// leave the range stays at q_max, so q_max must sit well past the tail.
inline ChainDist markov_stationary(const Dense& arrival, double geometric_p, const Dense& batch,
                                   double mu, const Dense& capacity, int q_max) {
    const bool geo = geometric_p > 0.0;
    const int phases = geo ? 1 : static_cast<int>(arrival.size()) - 1;
    const int nq = q_max + 1;
    const int n = phases * nq;
    auto at = [nq](int u, int q) { return u * nq + q; };

    // A = (P - I)^T with the last row replaced by ones; A pi = e_last.
    std::vector<Eigen::Triplet<double>> trip;
    auto add = [&](int from, int to, double w) {
        if (w != 0.0 && to != n - 1) trip.emplace_back(to, from, w);
    };
    // service step from queue length m, scattering into phase u
    auto serve = [&](int from, int u, int m, double w) {
        add(from, at(u, m), w * (1.0 - mu));
        for (std::size_t y = 1; y < capacity.size(); ++y)
            add(from, at(u, std::max(0, m - static_cast<int>(y))), w * mu * capacity[y]);
    };
    for (int u = 0; u < phases; ++u) {
        for (int q = 0; q < nq; ++q) {
            const int from = at(u, q);
            if (from != n - 1) trip.emplace_back(from, from, -1.0);
            if (geo) {
                serve(from, 0, q, 1.0 - geometric_p);
                for (std::size_t x = 1; x < batch.size(); ++x)
                    serve(from, 0, std::min(q_max, q + static_cast<int>(x)), geometric_p * batch[x]);
            } else if (u == 0) {
                for (std::size_t x = 1; x < batch.size(); ++x)
                    for (int a = 1; a <= phases; ++a)
                        serve(from, a - 1, std::min(q_max, q + static_cast<int>(x)),
                              batch[x] * arrival[static_cast<std::size_t>(a)]);
            } else {
                serve(from, u - 1, q, 1.0);
            }
        }
    }
    for (int i = 0; i < n; ++i) trip.emplace_back(n - 1, i, 1.0);

    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw std::runtime_error("markov_stationary: factorization failed");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs[n - 1] = 1.0;
    const Eigen::VectorXd pi = lu.solve(rhs);

    ChainDist out{std::vector<double>(static_cast<std::size_t>(nq), 0.0),
                  std::vector<double>(static_cast<std::size_t>(nq), 0.0)};
    double at_zero = 0.0;
    for (int u = 0; u < phases; ++u)
        for (int q = 0; q < nq; ++q) out.arbitrary[static_cast<std::size_t>(q)] += pi[at(u, q)];
    for (int q = 0; q < nq; ++q) at_zero += pi[at(0, q)];
    for (int q = 0; q < nq; ++q) out.pre_arrival[static_cast<std::size_t>(q)] = pi[at(0, q)] / at_zero;
    return out;
}

// Continuous-time chain for Erlang(stages, stage_rate) inter-arrival times
// (stages = 1 is Poisson): state (arrival phase k, queue length q). From the
// last phase an arrival adds a batch; service completions at rate mu_hat
// remove min(Y, q). Pre-arrival law: queue length conditioned on the last
// phase, which arrivals leave at a constant rate.
inline ChainDist ctmc_stationary(int stages, double stage_rate, const Dense& batch, double mu_hat,
                                 const Dense& capacity, int q_max) {
    const int nq = q_max + 1;
    const int n = stages * nq;
    auto at = [nq](int k, int q) { return k * nq + q; };

    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> out_rate(static_cast<std::size_t>(n), 0.0);
    auto add = [&](int from, int to, double w) {
        if (w == 0.0 || to == from) return;
        out_rate[static_cast<std::size_t>(from)] += w;
        if (to != n - 1) trip.emplace_back(to, from, w);
    };
    for (int k = 0; k < stages; ++k) {
        for (int q = 0; q < nq; ++q) {
            const int from = at(k, q);
            if (k + 1 < stages) {
                add(from, at(k + 1, q), stage_rate);
            } else {
                for (std::size_t x = 1; x < batch.size(); ++x)
                    add(from, at(0, std::min(q_max, q + static_cast<int>(x))), stage_rate * batch[x]);
            }
            for (std::size_t y = 1; y < capacity.size(); ++y)
                add(from, at(k, std::max(0, q - static_cast<int>(y))), mu_hat * capacity[y]);
        }
    }
    for (int i = 0; i + 1 < n; ++i) trip.emplace_back(i, i, -out_rate[static_cast<std::size_t>(i)]);
    for (int i = 0; i < n; ++i) trip.emplace_back(n - 1, i, 1.0);

    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw std::runtime_error("ctmc_stationary: factorization failed");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs[n - 1] = 1.0;
    const Eigen::VectorXd pi = lu.solve(rhs);

    ChainDist out{std::vector<double>(static_cast<std::size_t>(nq), 0.0),
                  std::vector<double>(static_cast<std::size_t>(nq), 0.0)};
    double last = 0.0;
    for (int k = 0; k < stages; ++k)
        for (int q = 0; q < nq; ++q) out.arbitrary[static_cast<std::size_t>(q)] += pi[at(k, q)];
    for (int q = 0; q < nq; ++q) last += pi[at(stages - 1, q)];
    for (int q = 0; q < nq; ++q) out.pre_arrival[static_cast<std::size_t>(q)] = pi[at(stages - 1, q)] / last;
    return out;
}

}  // namespace oracle
