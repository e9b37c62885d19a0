#include "batchq/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "batchq/error.hpp"

namespace batchq {

const char* to_string(EpochKind kind) {
    return kind == EpochKind::PreArrival ? "pre-arrival" : "arbitrary";
}

EpochDist::EpochDist(EpochKind kind, std::vector<cplx> roots, std::vector<cplx> weights,
                     std::vector<double> head)
    : kind_(kind), roots_(std::move(roots)), weights_(std::move(weights)), head_(std::move(head)),
      tail_rate_(0.0) {
    for (const cplx& r : roots_) tail_rate_ = std::max(tail_rate_, std::abs(r));
}

double EpochDist::operator()(int n) const {
    if (n < 0) return 0.0;
    if (static_cast<std::size_t>(n) < head_.size()) return head_[static_cast<std::size_t>(n)];
    cplx acc{0.0};
    for (std::size_t j = 0; j < roots_.size(); ++j) acc += weights_[j] * ipow(roots_[j], n);
    return acc.real();
}

double EpochDist::imag_residue(int n) const {
    if (n < 0 || static_cast<std::size_t>(n) < head_.size()) return 0.0;
    cplx acc{0.0};
    for (std::size_t j = 0; j < roots_.size(); ++j) acc += weights_[j] * ipow(roots_[j], n);
    return std::abs(acc.imag());
}

double EpochDist::mean() const {
    // sum_{n >= h} n r^n = r^h (h - (h - 1) r) / (1 - r)^2
    const int h = std::max<int>(1, static_cast<int>(head_.size()));
    double head_part = 0.0;
    for (int n = 1; n < h; ++n) head_part += n * head_[static_cast<std::size_t>(n)];
    cplx acc{0.0};
    for (std::size_t j = 0; j < roots_.size(); ++j) {
        const cplx r = roots_[j];
        acc += weights_[j] * ipow(r, h) * (static_cast<double>(h) - (h - 1.0) * r) / ((1.0 - r) * (1.0 - r));
    }
    return head_part + acc.real();
}

int EpochDist::cutoff(double eps, int cap) const {
    if (tail_rate_ <= 0.0) return 1;
    const double n = std::ceil(std::log(eps) / std::log(tail_rate_));
    if (!std::isfinite(n) || n > cap) return cap;
    return std::max(1, static_cast<int>(n));
}

EpochDist::Truncation EpochDist::truncate(int n_max) const {
    Truncation t;
    t.probs.reserve(static_cast<std::size_t>(n_max) + 1);
    // running powers keep this O(N b)
    std::vector<cplx> pw(roots_.size(), cplx{1.0});
    double sum = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        double p;
        if (static_cast<std::size_t>(n) < head_.size()) {
            p = head_[static_cast<std::size_t>(n)];
        } else {
            cplx acc{0.0};
            for (std::size_t j = 0; j < roots_.size(); ++j) acc += weights_[j] * pw[j];
            p = acc.real();
        }
        for (std::size_t j = 0; j < roots_.size(); ++j) pw[j] *= roots_[j];
        t.probs.push_back(p);
        sum += p;
    }
    t.captured = sum;
    return t;
}

double mean_queue_length(const EpochDist& dist) { return dist.mean(); }

BoundarySystem solve_boundary_system(std::span<const cplx> roots, double rate) {
    const std::size_t b = roots.size();
    // Unknowns x_j = c_j r_j^-(b-1); row for k then reads sum_j x_j r_j^(b-1-k).
    std::vector<std::vector<cplx>> a(b, std::vector<cplx>(b));
    for (std::size_t row = 0; row + 1 < b; ++row) {
        const int k = static_cast<int>(b) - 1 - static_cast<int>(row);
        for (std::size_t j = 0; j < b; ++j) a[row][j] = ipow(roots[j], static_cast<int>(b) - 1 - k);
    }
    for (std::size_t j = 0; j < b; ++j)
        a[b - 1][j] = ipow(roots[j], static_cast<int>(b) - 1) / (1.0 - roots[j]);

    for (std::size_t i = 0; i < b; ++i) {
        double big = 0.0;
        for (const cplx& v : a[i]) big = std::max(big, std::abs(v));
        if (big == 0.0) throw Error(ErrorCode::SingularSystem, "zero row in boundary system");
        for (cplx& v : a[i]) v /= big;
    }

    const auto scaled = a;
    double norm1 = 0.0;
    for (std::size_t j = 0; j < b; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < b; ++i) col += std::abs(a[i][j]);
        norm1 = std::max(norm1, col);
    }

    // LU with partial pivoting; inverse columns come along for the condition estimate
    std::vector<std::vector<cplx>> inv(b, std::vector<cplx>(b, cplx{0.0}));
    for (std::size_t i = 0; i < b; ++i) inv[i][i] = 1.0;
    for (std::size_t col = 0; col < b; ++col) {
        std::size_t piv = col;
        for (std::size_t i = col + 1; i < b; ++i)
            if (std::abs(a[i][col]) > std::abs(a[piv][col])) piv = i;
        if (std::abs(a[piv][col]) < 1e-13) {
            std::ostringstream os;
            os << "pivot " << std::abs(a[piv][col]) << " in column " << col
               << " below 1e-13; roots are (nearly) repeated";
            throw Error(ErrorCode::SingularSystem, os.str());
        }
        std::swap(a[piv], a[col]);
        std::swap(inv[piv], inv[col]);
        for (std::size_t i = col + 1; i < b; ++i) {
            const cplx f = a[i][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t j = col; j < b; ++j) a[i][j] -= f * a[col][j];
            for (std::size_t j = 0; j < b; ++j) inv[i][j] -= f * inv[col][j];
        }
    }
    for (std::size_t ii = b; ii-- > 0;) {
        for (std::size_t k = ii + 1; k < b; ++k) {
            for (std::size_t j = 0; j < b; ++j) inv[ii][j] -= a[ii][k] * inv[k][j];
        }
        for (std::size_t j = 0; j < b; ++j) inv[ii][j] /= a[ii][ii];
    }
    double inv_norm1 = 0.0;
    for (std::size_t j = 0; j < b; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < b; ++i) col += std::abs(inv[i][j]);
        inv_norm1 = std::max(inv_norm1, col);
    }

    BoundarySystem out;
    out.condition_estimate = norm1 * inv_norm1;
    // The elimination above only screens for singularity. Its solution loses
    // digits when roots cluster, so the constants come from the closed form of
    // the same system: c_j = rate (1 - r_j) prod_{i != j} r_j (1 - r_i) / (r_j - r_i).
    out.constants.resize(b);
    for (std::size_t j = 0; j < b; ++j) {
        cplx c = rate * (1.0 - roots[j]);
        for (std::size_t i = 0; i < b; ++i)
            if (i != j) c *= roots[j] * (1.0 - roots[i]) / (roots[j] - roots[i]);
        out.constants[j] = c;
    }

    for (int k = static_cast<int>(b) - 1; k >= 1; --k) {
        cplx acc{0.0};
        for (std::size_t j = 0; j < b; ++j) acc += out.constants[j] * ipow(roots[j], -k);
        out.residuals.push_back(std::abs(acc));
    }
    cplx acc{0.0};
    for (std::size_t j = 0; j < b; ++j) acc += out.constants[j] / (1.0 - roots[j]);
    out.residuals.push_back(std::abs(acc - rate));
    return out;
}

namespace {

// Pairs each constant with its conjugate root so sums come out real.
void pair_conjugates(std::span<const cplx> roots, std::vector<cplx>& vals) {
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (roots[i].imag() == 0.0) {
            vals[i] = {vals[i].real(), 0.0};
            continue;
        }
        if (roots[i].imag() < 0.0) continue;
        for (std::size_t j = 0; j < roots.size(); ++j) {
            if (j != i && roots[j] == std::conj(roots[i])) {
                const cplx avg = 0.5 * (vals[i] + std::conj(vals[j]));
                vals[i] = avg;
                vals[j] = std::conj(avg);
                break;
            }
        }
    }
}

cplx batch_sum(const FinitePmf& batch, cplx r, int shift) {
    // sum_i g_i r^(shift - i)
    cplx acc{0.0};
    for (const auto& pt : batch.points()) acc += pt.mass * ipow(r, shift - pt.point);
    return acc;
}

// Taylor coefficients of 1 / (1 - Y(z)), indices 0 .. n - 1.
std::vector<double> renewal_series(const CapacityDist& capacity, int n) {
    std::vector<double> y(static_cast<std::size_t>(n), 0.0);
    if (const auto* f = std::get_if<FinitePmf>(&capacity.law())) {
        for (const auto& pt : f->points())
            if (pt.point < n) y[static_cast<std::size_t>(pt.point)] = pt.mass;
    } else {
        const double p = std::get<Geometric>(capacity.law()).p;
        double m = p;
        for (int k = 1; k < n; ++k, m *= 1.0 - p) y[static_cast<std::size_t>(k)] = m;
    }
    std::vector<double> u(static_cast<std::size_t>(n), 0.0);
    u[0] = 1.0;
    for (int l = 1; l < n; ++l) {
        double acc = 0.0;
        for (int k = 1; k <= l; ++k) acc += y[static_cast<std::size_t>(k)] * u[static_cast<std::size_t>(l - k)];
        u[static_cast<std::size_t>(l)] = acc;
    }
    return u;
}

}  // namespace

ArbitraryLaw arbitrary_law(std::span<const cplx> roots, std::span<const cplx> constants,
                           const FinitePmf& batch, const CapacityDist& capacity, double scale,
                           double shift) {
    const int b = batch.max_support();
    const auto& y = capacity.pgf();
    auto h_at = [&](cplx z) { return 1.0 / ((1.0 - y(z)) * scale) - shift; };

    // Per root, H_m(r) = (H(r) - sum_{l<m} h_l r^l) / r^m. Direct evaluation
    // loses about |r|^-m in relative accuracy; past 1e3 the series is used.
    std::vector<int> series_terms(roots.size(), 0);
    int n_coef = 1;
    for (std::size_t j = 0; j < roots.size(); ++j) {
        const double a = std::abs(roots[j]);
        if (b > 1 && std::pow(a, -(b - 1)) > 1e3) {
            series_terms[j] = static_cast<int>(std::ceil(std::log(1e-18) / std::log(a))) + 1;
            n_coef = std::max(n_coef, b + series_terms[j]);
        }
    }
    if (b > 1) n_coef = std::max(n_coef, b);
    std::vector<double> h = renewal_series(capacity, n_coef);
    for (double& v : h) v /= scale;
    h[0] -= shift;

    auto h_tail = [&](std::size_t j, int m) {
        const cplx r = roots[j];
        cplx acc{0.0};
        cplx pw{1.0};
        if (std::pow(std::abs(r), -m) > 1e3) {
            for (int l = m; l < m + series_terms[j]; ++l, pw *= r) acc += h[static_cast<std::size_t>(l)] * pw;
            return acc;
        }
        acc = h_at(r);
        for (int l = 0; l < m; ++l, pw *= r) acc -= h[static_cast<std::size_t>(l)] * pw;
        return acc / ipow(r, m);
    };

    ArbitraryLaw out;
    out.coeffs_K.resize(roots.size());
    std::vector<cplx> hr(roots.size());
    cplx beyond{0.0};  // sum_{n >= b} p_n
    for (std::size_t j = 0; j < roots.size(); ++j) {
        const cplx r = roots[j];
        hr[j] = h_at(r);
        out.coeffs_K[j] = constants[j] * hr[j] * (batch_sum(batch, r, 0) - 1.0);
        beyond += constants[j] * hr[j] * (batch_sum(batch, r, b) - ipow(r, b)) / (1.0 - r);
    }
    pair_conjugates(roots, out.coeffs_K);

    out.head.assign(static_cast<std::size_t>(b), 0.0);
    double head_sum = 0.0;
    for (int n = 1; n < b; ++n) {
        cplx acc{0.0};
        for (std::size_t j = 0; j < roots.size(); ++j) {
            const cplx r = roots[j];
            cplx term = -hr[j] * ipow(r, n);
            for (const auto& pt : batch.points())
                term += pt.mass * (pt.point <= n ? hr[j] * ipow(r, n - pt.point) : h_tail(j, pt.point - n));
            acc += constants[j] * term;
        }
        out.head[static_cast<std::size_t>(n)] = acc.real();
        head_sum += acc.real();
    }
    out.head[0] = 1.0 - head_sum - beyond.real();
    return out;
}

namespace {

SteadySolution assemble(const QueueModel& model, std::vector<cplx> roots, BoundarySystem sys) {
    std::vector<cplx> c = std::move(sys.constants);
    pair_conjugates(roots, c);
    ArbitraryLaw law = arbitrary_law(roots, c, model.batch(), model.capacity(), model.mu(), 1.0);

    double rate = 0.0;
    for (const cplx& r : roots) rate = std::max(rate, std::abs(r));

    SteadySolution sol{
        .model = std::make_shared<const QueueModel>(model),
        .roots = std::move(roots),
        .constants = std::move(c),
        .lambda = model.lambda(),
        .coeffs_K = std::move(law.coeffs_K),
        .p0 = law.head[0],
        .head = std::move(law.head),
        .tail_rate = rate,
        .residuals = std::move(sys.residuals),
        .condition_estimate = sys.condition_estimate,
        .warnings = {},
    };
    if (sol.condition_estimate > kIllConditioned) {
        std::ostringstream os;
        os << "IllConditioned: boundary system condition estimate " << sol.condition_estimate;
        sol.warnings.push_back(os.str());
    }
    return sol;
}

}  // namespace

SteadySolution solve_constants(const CharSystem& cs, const QueueModel& model) {
    if (static_cast<int>(cs.interior_roots.size()) != model.b())
        throw Error(ErrorCode::RootCountMismatch, "characteristic system does not match model b");
    auto sys = solve_boundary_system(cs.interior_roots, model.lambda());
    return assemble(model, cs.interior_roots, std::move(sys));
}

SteadySolution solve_steady_state(const QueueModel& model) {
    return solve_constants(find_interior_roots(model), model);
}

EpochDist pre_arrival_dist(const SteadySolution& sol) {
    std::vector<cplx> w(sol.constants.size());
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = sol.constants[j] / sol.lambda;
    return {EpochKind::PreArrival, sol.roots, std::move(w)};
}

EpochDist arbitrary_dist(const SteadySolution& sol) {
    return {EpochKind::Arbitrary, sol.roots, sol.coeffs_K, sol.head};
}

TailInfo tail_decay_rate(const SteadySolution& sol) {
    TailInfo t{sol.tail_rate, false, true, true, 0.0};
    std::size_t dom = 0;
    for (std::size_t j = 0; j < sol.roots.size(); ++j)
        if (std::abs(sol.roots[j]) == sol.tail_rate) dom = j;
    t.dominant_real = sol.roots[dom].imag() == 0.0;
    for (std::size_t j = 0; j < sol.roots.size(); ++j) {
        if (j == dom) continue;
        const double m = std::abs(sol.roots[j]);
        t.second_modulus = std::max(t.second_modulus, m);
        if (m >= sol.tail_rate * (1.0 - 1e-9)) t.dominant_unique = false;
        if (std::abs(sol.roots[j] - sol.roots[dom]) < 1e-6) t.dominant_simple = false;
    }
    return t;
}

SpecialCase classify(const QueueModel& model) {
    const bool unit_arrival = model.batch().max_support() == 1;
    const bool unit_service = model.capacity().is_unit();
    if (unit_arrival && unit_service) return SpecialCase::UnitBoth;
    if (unit_arrival) return SpecialCase::UnitArrivalBatchService;
    if (unit_service) return SpecialCase::BatchArrivalUnitService;
    return SpecialCase::None;
}

namespace {

// Single interior root of A(1 - mu + mu Y(s)) - s, real and in (0, 1).
double unit_batch_root(const QueueModel& model) {
    const auto& a = model.arrival().pgf();
    const auto& y = model.capacity().pgf();
    const double mu = model.mu();
    auto f = [&](double s) { return a(1.0 - mu + mu * y(cplx{s, 0.0})).real() - s; };
    double hi = 1.0 - 1e-3;
    while (f(hi) >= 0.0) {
        const double gap = 1.0 - hi;
        if (gap < 1e-14) throw Error(ErrorCode::RootCountMismatch, "no interior root below 1");
        hi = 1.0 - gap / 10.0;
    }
    std::uintmax_t iters = 200;
    const auto [lo_r, hi_r] = boost::math::tools::toms748_solve(
        f, 0.0, hi, f(0.0), f(hi), boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (lo_r + hi_r);
}

}  // namespace

SteadySolution solve_special(const QueueModel& model) {
    const SpecialCase kind = classify(model);
    if (kind == SpecialCase::None)
        throw Error(ErrorCode::NotSpecialCase, "model has neither G(s) = s nor Y(s) = s");
    if (!(model.mu() > 0.0 && model.mu() < 1.0))
        throw Error(ErrorCode::InvalidModel, "analytic solution needs 0 < mu < 1");

    const double lambda = model.lambda();
    const double mu = model.mu();

    if (kind == SpecialCase::BatchArrivalUnitService) {
        CharSystem cs = find_interior_roots(model);
        auto sys = solve_boundary_system(cs.interior_roots, lambda);
        std::vector<cplx> roots = cs.interior_roots;
        std::vector<cplx> c = sys.constants;
        pair_conjugates(roots, c);
        const int b = model.b();
        // With Y(s) = s, H(z) = (1 - mu + mu z) / (mu (1 - z)) and every shifted
        // tail H_m, m >= 1, is 1 / (mu (1 - z)).
        std::vector<cplx> k(roots.size());
        std::vector<double> head(static_cast<std::size_t>(b), 0.0);
        cplx beyond{0.0};
        for (std::size_t j = 0; j < roots.size(); ++j) {
            const cplx r = roots[j];
            const cplx lead = c[j] * (1.0 - mu + mu * r) / (mu * (1.0 - r));
            k[j] = lead * (batch_sum(model.batch(), r, 0) - 1.0);
            beyond += lead * (batch_sum(model.batch(), r, b) - ipow(r, b)) / (1.0 - r);
        }
        pair_conjugates(roots, k);
        double head_sum = 0.0;
        for (int n = 1; n < b; ++n) {
            cplx acc{0.0};
            for (std::size_t j = 0; j < roots.size(); ++j) {
                const cplx r = roots[j];
                const cplx hr = (1.0 - mu + mu * r) / (mu * (1.0 - r));
                cplx term = -hr * ipow(r, n);
                for (const auto& pt : model.batch().points())
                    term += pt.mass * (pt.point <= n ? hr * ipow(r, n - pt.point) : 1.0 / (mu * (1.0 - r)));
                acc += c[j] * term;
            }
            head[static_cast<std::size_t>(n)] = acc.real();
            head_sum += acc.real();
        }
        head[0] = 1.0 - head_sum - beyond.real();
        double rate = 0.0;
        for (const cplx& r : roots) rate = std::max(rate, std::abs(r));
        return SteadySolution{
            .model = std::make_shared<const QueueModel>(model),
            .roots = std::move(roots),
            .constants = std::move(c),
            .lambda = lambda,
            .coeffs_K = std::move(k),
            .p0 = head[0],
            .head = std::move(head),
            .tail_rate = rate,
            .residuals = std::move(sys.residuals),
            .condition_estimate = sys.condition_estimate,
            .warnings = {},
        };
    }

    const double r = unit_batch_root(model);
    const double c1 = lambda * (1.0 - r);
    double k1;
    double p0;
    if (kind == SpecialCase::UnitBoth) {
        k1 = lambda / mu * (1.0 - r) * (1.0 - mu + mu * r) / r;
        p0 = 1.0 - lambda / mu * (1.0 - mu + mu * r);
    } else {
        const double yr = model.capacity().pgf()(cplx{r, 0.0}).real();
        const double served = (1.0 - mu + mu * yr) / (mu * (1.0 - yr));
        k1 = lambda * (1.0 - r) * (1.0 - r) * served / r;
        p0 = 1.0 - lambda * (1.0 - r) * served;
    }
    return SteadySolution{
        .model = std::make_shared<const QueueModel>(model),
        .roots = {cplx{r, 0.0}},
        .constants = {cplx{c1, 0.0}},
        .lambda = lambda,
        .coeffs_K = {cplx{k1, 0.0}},
        .p0 = p0,
        .head = {p0},
        .tail_rate = r,
        .residuals = {std::abs(c1 / (1.0 - r) - lambda)},
        .condition_estimate = 1.0,
        .warnings = {},
    };
}

std::vector<double> boundary_residuals(const SteadySolution& sol) {
    const QueueModel& m = *sol.model;
    const int b = m.b();
    const double mu = m.mu();
    const auto& law = m.capacity().law();
    auto y_mass = [&](int i) {
        if (const auto* f = std::get_if<FinitePmf>(&law)) return f->mass_at(i);
        const double p = std::get<Geometric>(law).p;
        return p * std::pow(1.0 - p, i - 1);
    };
    std::vector<double> out;
    for (int n = 1; n <= b - 1; ++n) {
        cplx total{0.0};
        for (std::size_t j = 0; j < sol.roots.size(); ++j) {
            const cplx r = sol.roots[j];
            cplx bracket{0.0};
            for (int i = n + 1; i <= b; ++i) bracket += (1.0 - mu) * m.batch().mass_at(i) * ipow(r, -i);
            // only capacities i < b - n leave a nonzero tail sum over m
            for (int i = 1; i + n < b; ++i) {
                cplx tail{0.0};
                for (int mm = i + n + 1; mm <= b; ++mm) tail += m.batch().mass_at(mm) * ipow(r, -mm);
                bracket += mu * y_mass(i) * ipow(r, i) * tail;
            }
            total += sol.constants[j] * ipow(r, n) * bracket;
        }
        out.push_back(std::abs(total));
    }
    return out;
}

}  // namespace batchq
