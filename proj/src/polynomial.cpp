#include "batchq/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace batchq {

cplx ipow(cplx z, int k) {
    if (k < 0) return 1.0 / ipow(z, -k);
    cplx acc{1.0, 0.0};
    while (k > 0) {
        if (k & 1) acc *= z;
        z *= z;
        k >>= 1;
    }
    return acc;
}

cplx poly_eval(std::span<const double> p, cplx z) {
    cplx acc{0.0, 0.0};
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * z + *it;
    return acc;
}

double poly_eval(std::span<const double> p, double x) {
    double acc = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
    return acc;
}

ValueAndSlope poly_eval_d(std::span<const double> p, cplx z) {
    cplx v{0.0, 0.0};
    cplx d{0.0, 0.0};
    for (auto it = p.rbegin(); it != p.rend(); ++it) {
        d = d * z + v;
        v = v * z + *it;
    }
    return {v, d};
}

Poly poly_add(std::span<const double> a, std::span<const double> b) {
    Poly out(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}

Poly poly_sub(std::span<const double> a, std::span<const double> b) {
    Poly out(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[i] -= b[i];
    return out;
}

Poly poly_mul(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) return {};
    Poly out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

Poly poly_scale(std::span<const double> a, double k) {
    Poly out(a.begin(), a.end());
    for (double& c : out) c *= k;
    return out;
}

Poly poly_derivative(std::span<const double> p) {
    if (p.size() <= 1) return {0.0};
    Poly out(p.size() - 1);
    for (std::size_t i = 1; i < p.size(); ++i) out[i - 1] = p[i] * static_cast<double>(i);
    return out;
}

int poly_degree(std::span<const double> p) {
    for (int i = static_cast<int>(p.size()) - 1; i >= 0; --i)
        if (p[i] != 0.0) return i;
    return -1;
}

Poly poly_trim(std::span<const double> p, double rel_tol) {
    double big = 0.0;
    for (double c : p) big = std::max(big, std::abs(c));
    const double cut = rel_tol * big;
    std::size_t n = p.size();
    while (n > 0 && (p[n - 1] == 0.0 || std::abs(p[n - 1]) < cut)) --n;
    return Poly(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(n));
}

namespace {

// Initial approximations from the Newton polygon: one circle per edge of the
// upper convex hull of (k, log|a_k|), radius given by the edge slope.
std::vector<cplx> hull_start(std::span<const double> a) {
    const int n = static_cast<int>(a.size()) - 1;
    std::vector<int> hull;
    const double tiny = std::numeric_limits<double>::lowest();
    auto lg = [&](int k) { return a[k] == 0.0 ? tiny : std::log(std::abs(a[k])); };
    for (int k = 0; k <= n; ++k) {
        if (a[k] == 0.0) continue;
        while (hull.size() >= 2) {
            const int i = hull[hull.size() - 2];
            const int j = hull.back();
            // drop j if it lies on or below the segment i-k
            const double cross = (lg(j) - lg(i)) * (k - i) - (lg(k) - lg(i)) * (j - i);
            if (cross <= 0.0) hull.pop_back();
            else break;
        }
        hull.push_back(k);
    }

    std::vector<cplx> z;
    z.reserve(static_cast<std::size_t>(n));
    const double sigma = 0.7;
    for (std::size_t e = 0; e + 1 < hull.size(); ++e) {
        const int i = hull[e];
        const int j = hull[e + 1];
        const int m = j - i;
        const double u = std::exp((lg(i) - lg(j)) / m);
        for (int t = 0; t < m; ++t) {
            const double ang = 2.0 * std::numbers::pi * t / m +
                               2.0 * std::numbers::pi * static_cast<double>(i) / n + sigma;
            z.push_back(std::polar(u, ang));
        }
    }
    return z;
}

struct Step {
    cplx ratio;  // p / p'
    bool converged;
};

Step newton_ratio(std::span<const double> a, std::span<const double> abs_a, cplx z) {
    const double eps = std::numeric_limits<double>::epsilon();
    const int n = static_cast<int>(a.size()) - 1;
    if (std::abs(z) <= 1.0) {
        cplx v{0.0}, d{0.0};
        double bound = 0.0;
        const double az = std::abs(z);
        for (int k = n; k >= 0; --k) {
            d = d * z + v;
            v = v * z + a[k];
            bound = bound * az + abs_a[k];
        }
        return {v / d, std::abs(v) <= 4.0 * eps * bound};
    }
    // evaluate the reversed polynomial at w = 1/z
    const cplx w = 1.0 / z;
    const double aw = std::abs(w);
    cplx q{0.0}, dq{0.0};
    double bound = 0.0;
    for (int k = 0; k <= n; ++k) {
        dq = dq * w + q;
        q = q * w + a[k];
        bound = bound * aw + abs_a[k];
    }
    const cplx ratio = z * q / (static_cast<double>(n) * q - w * dq);
    return {ratio, std::abs(q) <= 4.0 * eps * bound};
}

}  // namespace

std::vector<cplx> polynomial_roots(std::span<const double> p, const AberthOptions& opts) {
    Poly a = poly_trim(p);
    std::vector<cplx> roots;
    std::size_t zeros = 0;
    while (zeros < a.size() && a[zeros] == 0.0) ++zeros;
    roots.assign(zeros, cplx{0.0, 0.0});
    a.erase(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(zeros));
    const int n = static_cast<int>(a.size()) - 1;
    if (n <= 0) return roots;
    if (n == 1) {
        roots.emplace_back(-a[0] / a[1], 0.0);
        return roots;
    }

    double big = 0.0;
    for (double c : a) big = std::max(big, std::abs(c));
    for (double& c : a) c /= big;
    std::vector<double> abs_a(a.size());
    std::transform(a.begin(), a.end(), abs_a.begin(), [](double c) { return std::abs(c); });

    std::vector<cplx> z = hull_start(a);
    std::vector<bool> done(z.size(), false);
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        bool moved = false;
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (done[i]) continue;
            const Step s = newton_ratio(a, abs_a, z[i]);
            if (s.converged) {
                done[i] = true;
                continue;
            }
            cplx repulse{0.0};
            for (std::size_t j = 0; j < z.size(); ++j)
                if (j != i) repulse += 1.0 / (z[i] - z[j]);
            const cplx corr = s.ratio / (1.0 - s.ratio * repulse);
            z[i] -= corr;
            if (std::abs(corr) <= std::numeric_limits<double>::epsilon() * std::abs(z[i]))
                done[i] = true;
            moved = true;
        }
        if (!moved) break;
    }
    roots.insert(roots.end(), z.begin(), z.end());
    return roots;
}

}  // namespace batchq
