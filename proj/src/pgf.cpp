#include "batchq/pgf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "batchq/error.hpp"

namespace batchq {

FinitePmf::FinitePmf(std::vector<PmfPoint> points) {
    std::sort(points.begin(), points.end(),
              [](const PmfPoint& a, const PmfPoint& b) { return a.point < b.point; });
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& pt = points[i];
        if (!std::isfinite(pt.mass) || pt.mass < 0.0) {
            std::ostringstream os;
            os << "mass at " << pt.point << " is " << pt.mass << ", must be non-negative";
            throw Error(ErrorCode::InvalidPmf, os.str());
        }
        if (i > 0 && points[i - 1].point == pt.point)
            throw Error(ErrorCode::InvalidPmf,
                        "support point " + std::to_string(pt.point) + " listed twice");
        if (pt.mass == 0.0) continue;
        if (pt.point < 1)
            throw Error(ErrorCode::InvalidPmf,
                        "support point " + std::to_string(pt.point) + " must be >= 1");
        total += pt.mass;
        points_.push_back(pt);
    }
    if (points_.empty()) throw Error(ErrorCode::InvalidPmf, "pmf has no positive mass");
    if (std::abs(total - 1.0) > kSumTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "masses sum to " << total << ", expected 1";
        throw Error(ErrorCode::InvalidPmf, os.str());
    }
}

FinitePmf FinitePmf::point(int k) { return FinitePmf({{k, 1.0}}); }

double FinitePmf::mean() const noexcept {
    double m = 0.0;
    for (const auto& pt : points_) m += pt.point * pt.mass;
    return m;
}

double FinitePmf::mass_at(int k) const noexcept {
    auto it = std::lower_bound(points_.begin(), points_.end(), k,
                               [](const PmfPoint& p, int v) { return p.point < v; });
    return (it != points_.end() && it->point == k) ? it->mass : 0.0;
}

Poly FinitePmf::coefficients() const {
    Poly c(static_cast<std::size_t>(max_support()) + 1, 0.0);
    for (const auto& pt : points_) c[static_cast<std::size_t>(pt.point)] = pt.mass;
    return c;
}

RationalPgf::RationalPgf(Poly numerator, Poly denominator)
    : num_(poly_trim(numerator)), den_(poly_trim(denominator)) {
    if (den_.empty()) throw Error(ErrorCode::InvalidPmf, "pgf denominator is zero");
    // N(1) = D(1), judged against the coefficient sizes: for a geometric law
    // D(1) = 1 - (1 - p) carries an absolute rounding error of order eps.
    double size = 0.0;
    for (const Poly* c : {&num_, &den_}) {
        double s = 0.0;
        for (double v : *c) s += std::abs(v);
        size = std::max(size, s);
    }
    const double n1 = poly_eval(num_, 1.0);
    const double d1 = poly_eval(den_, 1.0);
    if (!(std::abs(n1 - d1) <= 1e-12 * size)) {
        std::ostringstream os;
        os.precision(17);
        os << "pgf value at 1 is " << n1 / d1;
        throw Error(ErrorCode::InvalidPmf, os.str());
    }
    if (poly_degree(den_) >= 1) {
        for (const cplx& r : polynomial_roots(den_)) {
            if (std::abs(r) <= 1.0 + 1e-12)
                throw Error(ErrorCode::InvalidPmf, "pgf denominator vanishes in the closed unit disk");
        }
    }
}

RationalPgf RationalPgf::from(const FinitePmf& pmf) { return {pmf.coefficients(), {1.0}}; }

RationalPgf RationalPgf::from(const Geometric& g) { return {{0.0, g.p}, {1.0, -(1.0 - g.p)}}; }

cplx RationalPgf::operator()(cplx z) const {
    const cplx d = poly_eval(den_, z);
    if (std::abs(d) < 1e-14) throw Error(ErrorCode::PoleAtArgument, "pgf pole at argument");
    return poly_eval(num_, z) / d;
}

ValueAndSlope RationalPgf::eval_d(cplx z) const {
    const auto n = poly_eval_d(num_, z);
    const auto d = poly_eval_d(den_, z);
    if (std::abs(d.value) < 1e-14) throw Error(ErrorCode::PoleAtArgument, "pgf pole at argument");
    return {n.value / d.value, (n.slope * d.value - n.value * d.slope) / (d.value * d.value)};
}

double RationalPgf::mean() const {
    const double n1 = poly_eval(num_, 1.0);
    const double d1 = poly_eval(den_, 1.0);
    const double dn1 = poly_eval(poly_derivative(num_), 1.0);
    const double dd1 = poly_eval(poly_derivative(den_), 1.0);
    return (dn1 * d1 - n1 * dd1) / (d1 * d1);
}

cplx pgf_eval(const RationalPgf& f, cplx z) { return f(z); }
double pgf_mean(const RationalPgf& f) { return f.mean(); }

namespace {

void check_geometric(const Geometric& g, const char* what) {
    if (!(g.p > 0.0 && g.p <= 1.0)) {
        std::ostringstream os;
        os << what << " geometric parameter " << g.p << " must lie in (0, 1]";
        throw Error(ErrorCode::InvalidPmf, os.str());
    }
}

const Geometric& checked(const Geometric& g, const char* what) {
    check_geometric(g, what);
    return g;
}

}  // namespace

CapacityDist::CapacityDist(FinitePmf pmf)
    : law_(pmf), pgf_(RationalPgf::from(pmf)), mean_(pmf.mean()) {}

CapacityDist::CapacityDist(Geometric geo)
    : law_(geo), pgf_(RationalPgf::from(checked(geo, "capacity"))), mean_(1.0 / geo.p) {}

bool CapacityDist::is_unit() const noexcept {
    if (const auto* f = std::get_if<FinitePmf>(&law_)) return f->max_support() == 1;
    return std::get<Geometric>(law_).p == 1.0;
}

InterArrivalDist::InterArrivalDist(FinitePmf pmf)
    : law_(pmf), pgf_(RationalPgf::from(pmf)), mean_(pmf.mean()) {}

InterArrivalDist::InterArrivalDist(Geometric geo)
    : law_(geo), pgf_(RationalPgf::from(checked(geo, "inter-arrival"))), mean_(1.0 / geo.p) {}

}  // namespace batchq
