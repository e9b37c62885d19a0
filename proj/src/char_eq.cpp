#include "batchq/char_eq.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "batchq/error.hpp"

namespace batchq {

namespace {

Poly reversed_batch(const FinitePmf& batch) {
    const int b = batch.max_support();
    Poly s(static_cast<std::size_t>(b), 0.0);
    for (const auto& pt : batch.points()) s[static_cast<std::size_t>(b - pt.point)] = pt.mass;
    return s;
}

void require_analytic_mu(double mu) {
    if (!(mu > 0.0 && mu < 1.0)) {
        std::ostringstream os;
        os << "analytic solution needs 0 < mu < 1, got mu = " << mu;
        throw Error(ErrorCode::InvalidModel, os.str());
    }
}

}  // namespace

CharFunction::CharFunction(const QueueModel& model)
    : arrival_(model.arrival().pgf()),
      capacity_(model.capacity().pgf()),
      mu_(model.mu()),
      b_(model.b()),
      batch_rev_(reversed_batch(model.batch())) {}

ValueAndSlope CharFunction::eval_d(cplx s) const {
    const auto y = capacity_.eval_d(s);
    const cplx w = 1.0 - mu_ + mu_ * y.value;
    const auto a = arrival_.eval_d(w);
    const auto g = poly_eval_d(batch_rev_, s);
    const cplx sb1 = ipow(s, b_ - 1);
    const cplx value = a.value * g.value - sb1 * s;
    const cplx slope = a.slope * mu_ * y.slope * g.value + a.value * g.slope -
                       static_cast<double>(b_) * sb1;
    return {value, slope};
}

cplx char_fn(const QueueModel& model, cplx s) { return CharFunction(model)(s); }

Poly build_cleared_poly(const RationalPgf& arrival, const FinitePmf& batch, double mu,
                        const RationalPgf& capacity) {
    const Poly& na = arrival.numerator();
    const Poly& da = arrival.denominator();
    const Poly& ny = capacity.numerator();
    const Poly& dy = capacity.denominator();
    const int b = batch.max_support();

    // w(s) = W(s) / DY(s)
    const Poly w = poly_add(poly_scale(dy, 1.0 - mu), poly_scale(ny, mu));
    const int m = std::max(poly_degree(na), poly_degree(da));
    const int piece = std::max(poly_degree(w), poly_degree(dy));
    const long predicted = static_cast<long>(m) * piece + b;
    if (predicted > kMaxClearedDegree) {
        std::ostringstream os;
        os << "cleared characteristic polynomial would have degree " << predicted << " > "
           << kMaxClearedDegree;
        throw Error(ErrorCode::DegreeOverflow, os.str());
    }

    // Homogeneous Horner: P(s) = sum_k c_k W^k DY^(m-k) for c = NA and c = DA.
    const bool unit_dy = poly_degree(dy) == 0 && dy[0] == 1.0;
    auto coeff = [](const Poly& p, int k) { return k < static_cast<int>(p.size()) ? p[k] : 0.0; };
    Poly pn{coeff(na, m)};
    Poly pd{coeff(da, m)};
    Poly dy_pow{1.0};
    for (int k = m - 1; k >= 0; --k) {
        pn = poly_mul(pn, w);
        pd = poly_mul(pd, w);
        if (!unit_dy) dy_pow = poly_mul(dy_pow, dy);
        const double cn = coeff(na, k);
        const double cd = coeff(da, k);
        if (cn != 0.0) pn = poly_add(pn, poly_scale(dy_pow, cn));
        if (cd != 0.0) pd = poly_add(pd, poly_scale(dy_pow, cd));
    }

    const Poly s_rev = reversed_batch(batch);
    Poly shifted(static_cast<std::size_t>(b), 0.0);
    shifted.insert(shifted.end(), pd.begin(), pd.end());
    return poly_trim(poly_sub(poly_mul(pn, s_rev), shifted));
}

namespace {

// Geometric capacity Y(s) = p s / (1 - q s). With u = s / (1 - q s) the
// service argument 1 - mu + mu Y = 1 - mu + mu p u is linear in u, so no
// (1 - q s)^m factor has to be expanded (its binomial coefficients cancel
// badly once m reaches a few dozen). Roots map back by s = u / (1 + q u).
std::vector<cplx> geometric_capacity_roots(const RationalPgf& arrival, const FinitePmf& batch,
                                           double mu, double p) {
    const double q = 1.0 - p;
    const int b = batch.max_support();
    const Poly lin{1.0 - mu, mu * p};
    auto compose = [&lin](const Poly& c) {
        Poly out{c.back()};
        for (int k = static_cast<int>(c.size()) - 2; k >= 0; --k)
            out = poly_add(poly_mul(out, lin), Poly{c[static_cast<std::size_t>(k)]});
        return out;
    };
    const int m = std::max(poly_degree(arrival.numerator()), poly_degree(arrival.denominator()));
    if (static_cast<long>(m) + b > kMaxClearedDegree) {
        std::ostringstream os;
        os << "cleared characteristic polynomial would have degree " << m + b << " > "
           << kMaxClearedDegree;
        throw Error(ErrorCode::DegreeOverflow, os.str());
    }
    const Poly pn = compose(arrival.numerator());
    const Poly pd = compose(arrival.denominator());

    // T(u) = sum_i g_i u^(b-i) (1 + q u)^i
    Poly t{0.0};
    for (const auto& pt : batch.points()) {
        Poly term(static_cast<std::size_t>(b - pt.point), 0.0);
        term.push_back(pt.mass);
        for (int i = 0; i < pt.point; ++i) term = poly_mul(term, Poly{1.0, q});
        t = poly_add(t, term);
    }
    Poly shifted(static_cast<std::size_t>(b), 0.0);
    shifted.insert(shifted.end(), pd.begin(), pd.end());
    const Poly cleared = poly_trim(poly_sub(poly_mul(pn, t), shifted));

    std::vector<cplx> roots;
    for (const cplx& u : polynomial_roots(cleared)) {
        const cplx s = u / (1.0 + q * u);
        if (std::isfinite(s.real()) && std::isfinite(s.imag())) roots.push_back(s);
    }
    return roots;
}

}  // namespace

std::vector<cplx> characteristic_candidates(const RationalPgf& arrival, const FinitePmf& batch,
                                            double mu, const CapacityDist& capacity) {
    if (const auto* g = std::get_if<Geometric>(&capacity.law()))
        return geometric_capacity_roots(arrival, batch, mu, g->p);
    return polynomial_roots(build_cleared_poly(arrival, batch, mu, capacity.pgf()));
}

Poly build_cleared_poly(const QueueModel& model) {
    return build_cleared_poly(model.arrival().pgf(), model.batch(), model.mu(),
                              model.capacity().pgf());
}

Poly service_factor_poly(const QueueModel& model) {
    const auto& y = model.capacity().pgf();
    return poly_trim(poly_add(poly_scale(y.denominator(), 1.0 - model.mu()),
                              poly_scale(y.numerator(), model.mu())));
}

void sort_roots(std::vector<cplx>& roots) {
    std::sort(roots.begin(), roots.end(), [](const cplx& x, const cplx& y) {
        const double ax = std::abs(x);
        const double ay = std::abs(y);
        if (ax != ay) return ax > ay;
        if (x.real() != y.real()) return x.real() > y.real();
        return x.imag() > y.imag();
    });
}

cplx newton_polish(const AnalyticFunction& f, cplx start, int max_iterations, double tolerance) {
    cplx z = start;
    for (int it = 0; it < max_iterations; ++it) {
        ValueAndSlope fd;
        try {
            fd = f(z);
        } catch (const Error&) {
            return z;
        }
        if (fd.value == 0.0) return z;
        const cplx step = fd.value / fd.slope;
        if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return z;
        z -= step;
        if (std::abs(step) < tolerance) break;
    }
    return z;
}

std::vector<cplx> select_interior_roots(std::span<const cplx> candidates, int b,
                                        const AnalyticFunction& f, const RootSelection& opts) {
    std::vector<cplx> inside;
    for (const cplx& c : candidates) {
        if (!(std::abs(c) < opts.candidate_radius)) continue;
        cplx z = newton_polish(f, c, opts.newton_iterations, opts.newton_tolerance);
        if (!std::isfinite(std::abs(z)) || std::abs(z - c) > opts.max_polish_move) z = c;
        if (std::abs(z) < 1.0 - opts.interior_margin) inside.push_back(z);
    }

    auto moduli = [&] {
        std::vector<cplx> all(candidates.begin(), candidates.end());
        sort_roots(all);
        std::ostringstream os;
        os.precision(10);
        os << "root moduli:";
        for (const cplx& r : all) os << ' ' << std::abs(r);
        return os.str();
    };

    if (static_cast<int>(inside.size()) != b) {
        std::ostringstream os;
        os << "found " << inside.size() << " roots inside the unit circle, expected b = " << b
           << "; " << moduli();
        throw Error(ErrorCode::RootCountMismatch, os.str());
    }

    // conjugate symmetry
    constexpr double kRealCut = 1e-9;
    constexpr double kPairCut = 1e-7;
    std::vector<bool> used(inside.size(), false);
    for (std::size_t i = 0; i < inside.size(); ++i) {
        if (used[i]) continue;
        if (std::abs(inside[i].imag()) <= kRealCut) {
            inside[i] = {inside[i].real(), 0.0};
            used[i] = true;
            continue;
        }
        std::size_t best = inside.size();
        double best_d = kPairCut;
        for (std::size_t j = 0; j < inside.size(); ++j) {
            if (j == i || used[j]) continue;
            const double d = std::abs(inside[j] - std::conj(inside[i]));
            if (d <= best_d) {
                best_d = d;
                best = j;
            }
        }
        if (best == inside.size()) {
            std::ostringstream os;
            os.precision(12);
            os << "interior root " << inside[i] << " has no conjugate partner; " << moduli();
            throw Error(ErrorCode::RootCountMismatch, os.str());
        }
        const cplx avg = 0.5 * (inside[i] + std::conj(inside[best]));
        inside[i] = avg;
        inside[best] = std::conj(avg);
        used[i] = used[best] = true;
    }

    sort_roots(inside);
    for (std::size_t i = 0; i < inside.size(); ++i) {
        for (std::size_t j = i + 1; j < inside.size(); ++j) {
            if (std::abs(inside[i] - inside[j]) < 1e-6) {
                std::ostringstream os;
                os.precision(12);
                os << "interior roots " << inside[i] << " and " << inside[j]
                   << " coincide within 1e-6";
                throw Error(ErrorCode::RepeatedRoot, os.str());
            }
        }
    }
    for (const cplx& r : inside) {
        const double res = std::abs(f(r).value);
        if (!(res < 1e-9)) {
            std::ostringstream os;
            os.precision(12);
            os << "root " << r << " leaves residual " << res << " after polishing";
            throw Error(ErrorCode::RootCountMismatch, os.str());
        }
    }
    return inside;
}

CharSystem find_interior_roots(const QueueModel& model) {
    require_analytic_mu(model.mu());
    CharSystem cs;
    cs.cleared_poly = build_cleared_poly(model);
    cs.all_roots = characteristic_candidates(model.arrival().pgf(), model.batch(), model.mu(),
                                             model.capacity());
    const CharFunction fn(model);
    cs.interior_roots = select_interior_roots(
        cs.all_roots, model.b(), [&fn](cplx s) { return fn.eval_d(s); });
    return cs;
}

}  // namespace batchq
