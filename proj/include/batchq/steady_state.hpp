#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "batchq/char_eq.hpp"
#include "batchq/model.hpp"

namespace batchq {

enum class EpochKind { PreArrival, Arbitrary };

const char* to_string(EpochKind kind);

/// Queue-length distribution of the form p_n = Re sum_j w_j r_j^n, except for
/// the first head.size() values, which are given explicitly.
class EpochDist {
public:
    EpochDist(EpochKind kind, std::vector<cplx> roots, std::vector<cplx> weights,
              std::vector<double> head = {});

    EpochKind kind() const noexcept { return kind_; }
    const std::vector<cplx>& roots() const noexcept { return roots_; }
    const std::vector<cplx>& weights() const noexcept { return weights_; }

    /// p_n for any n >= 0.
    double operator()(int n) const;
    /// |Im sum_j w_j r_j^n|; zero inside the explicit head.
    double imag_residue(int n) const;
    /// Closed form of sum_n n p_n.
    double mean() const;
    /// Largest root modulus.
    double tail_rate() const noexcept { return tail_rate_; }
    /// Smallest N with tail_rate^N < eps, capped at `cap`.
    int cutoff(double eps = 1e-12, int cap = 100000) const;

    struct Truncation {
        std::vector<double> probs;  // p_0 .. p_N
        double captured;            // their sum
    };
    Truncation truncate(int n_max) const;

private:
    EpochKind kind_;
    std::vector<cplx> roots_;
    std::vector<cplx> weights_;
    std::vector<double> head_;
    double tail_rate_;
};

/// Constants c_j of p_n(0) = sum_j c_j r_j^n and the quantities derived from
/// them.
struct SteadySolution {
    std::shared_ptr<const QueueModel> model;
    std::vector<cplx> roots;
    std::vector<cplx> constants;
    double lambda;
    /// Arbitrary-epoch weights: p_n = sum_j K_j r_j^n for n >= 1.
    std::vector<cplx> coeffs_K;
    double p0;
    /// p_0 .. p_{b-1} at an arbitrary epoch, evaluated without negative powers of r_j.
    std::vector<double> head;
    double tail_rate;
    /// |row residual| of the linear system, rows k = b-1 .. 1 then the rate row.
    std::vector<double> residuals;
    double condition_estimate;
    std::vector<std::string> warnings;
};

/// Solution of sum_j c_j r_j^-k = 0 (k = 1..b-1), sum_j c_j / (1 - r_j) = rate.
struct BoundarySystem {
    std::vector<cplx> constants;
    std::vector<double> residuals;
    double condition_estimate;
};

/// Throws Error{SingularSystem} when a pivot of the scaled system falls
/// below 1e-13.
BoundarySystem solve_boundary_system(std::span<const cplx> roots, double rate);

inline constexpr double kIllConditioned = 1e12;

SteadySolution solve_constants(const CharSystem& cs, const QueueModel& model);

/// find_interior_roots followed by solve_constants.
SteadySolution solve_steady_state(const QueueModel& model);

/// p_n^- = (1/lambda) sum_j c_j r_j^n.
EpochDist pre_arrival_dist(const SteadySolution& sol);

/// p_n = sum_j K_j r_j^n (n >= b), explicit head below b, p_0 by
/// complementation in closed form.
EpochDist arbitrary_dist(const SteadySolution& sol);

double mean_queue_length(const EpochDist& dist);

struct TailInfo {
    double rate;
    bool dominant_real;
    bool dominant_unique;
    bool dominant_simple;
    /// Largest modulus among the remaining roots (0 for b = 1).
    double second_modulus;
};

TailInfo tail_decay_rate(const SteadySolution& sol);

enum class SpecialCase { None, BatchArrivalUnitService, UnitArrivalBatchService, UnitBoth };

/// GI^X/Geo/1 when Y(s) = s, GI/Geo^Y/1 when G(s) = s, GI/Geo/1 when both.
SpecialCase classify(const QueueModel& model);

/// Same solution as the general path through the reduced closed forms.
/// Throws Error{NotSpecialCase}.
SteadySolution solve_special(const QueueModel& model);

/// Residuals of the boundary equations for n = 1..b-1 before their
/// reduction to the power-sum rows; they vanish for a correct solution.
std::vector<double> boundary_residuals(const SteadySolution& sol);

struct ArbitraryLaw {
    std::vector<cplx> coeffs_K;
    std::vector<double> head;  // p_0 .. p_{b-1}
};

/// Arbitrary-epoch law p_n = Re sum_j c_j H(r_j) (sum_i g_i r_j^(n-i) - r_j^n),
/// n >= 1, with H = U / scale - shift and U = 1 / (1 - Y). K_j is the
/// coefficient of r_j^n. Below n = b the negative powers of r_j are removed
/// with the boundary equations sum_j c_j r_j^-k = 0 before summing, so small
/// clustered roots do not cancel. p_0 follows by complementation.
ArbitraryLaw arbitrary_law(std::span<const cplx> roots, std::span<const cplx> constants,
                           const FinitePmf& batch, const CapacityDist& capacity, double scale,
                           double shift);

}  // namespace batchq
