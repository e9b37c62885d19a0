#include "batchq/ct_limit.hpp"

#include <algorithm>
#include <optional>
#include <cmath>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "batchq/char_eq.hpp"
#include "batchq/error.hpp"
#include "batchq/polynomial.hpp"

namespace batchq {

CtInterArrival::CtInterArrival(Law law) : law_(law) {
    const bool ok = std::visit(
        [](const auto& l) {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, Exponential>) return l.rate > 0.0;
            else if constexpr (std::is_same_v<T, DeterministicTime>) return l.duration > 0.0;
            else return l.stages >= 1 && l.rate > 0.0;
        },
        law_);
    if (!ok) throw Error(ErrorCode::InvalidModel, "continuous inter-arrival parameters must be positive");
}

double CtInterArrival::mean() const noexcept {
    return std::visit(
        [](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, Exponential>) return 1.0 / l.rate;
            else if constexpr (std::is_same_v<T, DeterministicTime>) return l.duration;
            else return l.stages / l.rate;
        },
        law_);
}

ValueAndSlope CtInterArrival::lst_d(cplx theta) const {
    return std::visit(
        [theta](const auto& l) -> ValueAndSlope {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                const cplx v = l.rate / (l.rate + theta);
                return {v, -v / (l.rate + theta)};
            } else if constexpr (std::is_same_v<T, DeterministicTime>) {
                const cplx v = std::exp(-l.duration * theta);
                return {v, -l.duration * v};
            } else {
                const cplx base = l.rate / (l.rate + theta);
                const cplx v = ipow(base, l.stages);
                return {v, -static_cast<double>(l.stages) * v / (l.rate + theta)};
            }
        },
        law_);
}

namespace {

// Tail point of an Erlang law beyond which less than 1e-12 mass remains.
double erlang_horizon(const Erlang& e) {
    return boost::math::gamma_q_inv(static_cast<double>(e.stages), 1e-12) / e.rate;
}

int slot_of(double t, double delta) {
    // smallest n with t <= n delta, tolerant to representation error in t / delta
    const double x = t / delta;
    const double r = std::round(x);
    if (std::abs(x - r) <= 1e-9 * std::max(1.0, x)) return std::max(1, static_cast<int>(r));
    return std::max(1, static_cast<int>(std::ceil(x)));
}

Poly poly_pow(const Poly& base, int k) {
    Poly out{1.0};
    Poly sq = base;
    for (; k > 0; k >>= 1) {
        if (k & 1) out = poly_mul(out, sq);
        if (k > 1) sq = poly_mul(sq, sq);
    }
    return out;
}

// With kappa = mu_hat / (nu + mu_hat) the Erlang transform at mu_hat (1 - Y)
// is ((1 - kappa) / (1 - kappa Y))^k, so clearing denominators leaves a
// polynomial. Empty when its degree would exceed the cap.
std::vector<cplx> erlang_candidates(const CtModel& model, const Erlang& e) {
    const double kappa = model.mu_hat() / (e.rate + model.mu_hat());
    const double lead = std::pow(1.0 - kappa, e.stages);
    const int b = model.b();
    const auto& batch = model.batch();

    if (const auto* g = std::get_if<Geometric>(&model.capacity().law())) {
        // u = s / (1 - q s) makes Y = p u
        const double q = 1.0 - g->p;
        Poly t{0.0};
        for (const auto& pt : batch.points()) {
            Poly term(static_cast<std::size_t>(b - pt.point), 0.0);
            term.push_back(pt.mass);
            for (int i = 0; i < pt.point; ++i) term = poly_mul(term, Poly{1.0, q});
            t = poly_add(t, term);
        }
        Poly shifted(static_cast<std::size_t>(b), 0.0);
        const Poly tail = poly_pow(Poly{1.0, -kappa * g->p}, e.stages);
        shifted.insert(shifted.end(), tail.begin(), tail.end());
        const Poly cleared = poly_trim(poly_sub(poly_scale(t, lead), shifted));
        std::vector<cplx> roots;
        for (const cplx& u : polynomial_roots(cleared)) {
            const cplx s = u / (1.0 + q * u);
            if (std::isfinite(s.real()) && std::isfinite(s.imag())) roots.push_back(s);
        }
        return roots;
    }

    const auto& y = std::get<FinitePmf>(model.capacity().law());
    if (static_cast<long>(e.stages) * y.max_support() + b > kMaxClearedDegree) return {};
    Poly t(static_cast<std::size_t>(b) + 1, 0.0);
    for (const auto& pt : batch.points()) t[static_cast<std::size_t>(b - pt.point)] = pt.mass;
    const Poly base = poly_sub(Poly{1.0}, poly_scale(y.coefficients(), kappa));
    Poly shifted(static_cast<std::size_t>(b), 0.0);
    const Poly tail = poly_pow(base, e.stages);
    shifted.insert(shifted.end(), tail.begin(), tail.end());
    return polynomial_roots(poly_trim(poly_sub(poly_scale(t, lead), shifted)));
}

}  // namespace

InterArrivalDist CtInterArrival::discretize(double delta) const {
    if (!(delta > 0.0)) throw Error(ErrorCode::InvalidModel, "slot width must be positive");
    if (const auto* e = std::get_if<Exponential>(&law_))
        return Geometric{-std::expm1(-e->rate * delta)};
    if (const auto* d = std::get_if<DeterministicTime>(&law_))
        return InterArrivalDist::deterministic(slot_of(d->duration, delta));

    const auto& e = std::get<Erlang>(law_);
    const int last = slot_of(erlang_horizon(e), delta);
    const double k = e.stages;
    std::vector<PmfPoint> pts;
    double prev_tail = 1.0;  // P(A > (n-1) delta)
    for (int n = 1; n < last; ++n) {
        const double tail = boost::math::gamma_q(k, e.rate * n * delta);
        pts.push_back({n, prev_tail - tail});
        prev_tail = tail;
    }
    pts.push_back({last, prev_tail});
    return FinitePmf(std::move(pts));
}

CtModel::CtModel(CtInterArrival a, FinitePmf g, double mu_hat, CapacityDist y)
    : arrival_(std::move(a)), batch_(std::move(g)), capacity_(std::move(y)), mu_hat_(mu_hat) {
    rho_ = lambda_hat() * batch_.mean() / (mu_hat_ * capacity_.mean());
}

CtModel build_ct_model(CtInterArrival arrival, FinitePmf batch, double mu_hat, CapacityDist capacity) {
    if (!(mu_hat > 0.0) || !std::isfinite(mu_hat)) {
        std::ostringstream os;
        os << "service rate " << mu_hat << " must be positive";
        throw Error(ErrorCode::InvalidModel, os.str());
    }
    CtModel m(std::move(arrival), std::move(batch), mu_hat, std::move(capacity));
    if (!(m.rho() < 1.0)) {
        std::ostringstream os;
        os.precision(6);
        os << "unstable model: rho = " << m.rho() << " >= 1";
        throw Error(ErrorCode::Unstable, os.str());
    }
    return m;
}

QueueModel discretize(const CtModel& model, double delta) {
    return build_model(model.arrival().discretize(delta), model.batch(), model.mu_hat() * delta,
                       model.capacity());
}

CtCharFunction::CtCharFunction(const CtModel& model)
    : arrival_(model.arrival()),
      capacity_(model.capacity().pgf()),
      mu_hat_(model.mu_hat()),
      b_(model.b()),
      batch_rev_(static_cast<std::size_t>(model.b()), 0.0) {
    for (const auto& pt : model.batch().points())
        batch_rev_[static_cast<std::size_t>(b_ - pt.point)] = pt.mass;
}

ValueAndSlope CtCharFunction::eval_d(cplx s) const {
    const auto y = capacity_.eval_d(s);
    const auto a = arrival_.lst_d(mu_hat_ * (1.0 - y.value));
    const auto g = poly_eval_d(batch_rev_, s);
    const cplx sb1 = ipow(s, b_ - 1);
    return {a.value * g.value - sb1 * s,
            -a.slope * mu_hat_ * y.slope * g.value + a.value * g.slope -
                static_cast<double>(b_) * sb1};
}

CtRoots ct_char_roots(const CtModel& model) {
    const double scale = std::max({1.0, model.lambda_hat(), model.mu_hat()});
    double delta = 1e-3 / scale;

    const auto& law = model.arrival().law();
    const int piece = std::visit(
        [](const auto& l) -> int {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, FinitePmf>) return l.max_support();
            else return 1;
        },
        model.capacity().law());
    double horizon = 0.0;
    if (const auto* d = std::get_if<DeterministicTime>(&law)) horizon = d->duration;
    if (const auto* e = std::get_if<Erlang>(&law)) horizon = erlang_horizon(*e);
    if (horizon > 0.0) {
        const int slots = std::clamp(600 / piece, 64, 512);
        delta = std::max(delta, horizon / slots);
    }
    delta = std::min(delta, 0.5 / model.mu_hat());

    const CtCharFunction fn(model);
    const AnalyticFunction f = [&fn](cplx s) { return fn.eval_d(s); };
    RootSelection opts;
    opts.candidate_radius = 1.25;
    opts.max_polish_move = 0.25;

    if (const auto* e = std::get_if<Erlang>(&law)) {
        const auto candidates = erlang_candidates(model, *e);
        if (!candidates.empty()) {
            RootSelection exact = opts;
            exact.max_polish_move = 1e-3;
            return {select_interior_roots(candidates, model.b(), f, exact), 0.0};
        }
    }

    std::optional<Error> last;
    for (int attempt = 0; attempt < 5; ++attempt) {
        try {
            const QueueModel dm = discretize(model, delta);
            const auto candidates = characteristic_candidates(dm.arrival().pgf(), dm.batch(), dm.mu(),
                                                               dm.capacity());
            return {select_interior_roots(candidates, model.b(), f, opts), delta};
        } catch (const Error& e) {
            if (e.code() != ErrorCode::RootCountMismatch && e.code() != ErrorCode::RepeatedRoot) throw;
            last = e;
        }
        delta /= 2.0;
    }
    throw *last;
}

CtSolution solve_ct(const CtModel& model) {
    auto [roots, delta] = ct_char_roots(model);
    const double lam = model.lambda_hat();
    auto sys = solve_boundary_system(roots, lam);
    std::vector<cplx> c = std::move(sys.constants);
    // conjugate pairs
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (roots[i].imag() == 0.0) c[i] = {c[i].real(), 0.0};
        if (roots[i].imag() <= 0.0) continue;
        for (std::size_t j = 0; j < roots.size(); ++j) {
            if (j == i || roots[j] != std::conj(roots[i])) continue;
            c[i] = 0.5 * (c[i] + std::conj(c[j]));
            c[j] = std::conj(c[i]);
        }
    }
    ArbitraryLaw law = arbitrary_law(roots, c, model.batch(), model.capacity(), model.mu_hat(), 0.0);
    return CtSolution{
        .roots = std::move(roots),
        .constants = std::move(c),
        .lambda_hat = lam,
        .coeffs_K = std::move(law.coeffs_K),
        .p0 = law.head[0],
        .head = std::move(law.head),
        .residuals = std::move(sys.residuals),
        .delta = delta,
    };
}

EpochDist ct_pre_arrival_dist(const CtSolution& sol) {
    std::vector<cplx> w(sol.constants.size());
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = sol.constants[j] / sol.lambda_hat;
    return {EpochKind::PreArrival, sol.roots, std::move(w)};
}

EpochDist ct_arbitrary_dist(const CtSolution& sol) {
    return {EpochKind::Arbitrary, sol.roots, sol.coeffs_K, sol.head};
}

std::pair<EpochDist, EpochDist> ct_distributions(const CtModel& model) {
    const CtSolution sol = solve_ct(model);
    return {ct_pre_arrival_dist(sol), ct_arbitrary_dist(sol)};
}

}  // namespace batchq
