#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "batchq/error.hpp"
#include "batchq/steady_state.hpp"
#include "markov_chain.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"

using namespace batchq;

namespace {

struct Solved {
    SteadySolution sol;
    EpochDist pre;
    EpochDist arb;
};

Solved solve(const QueueModel& m) {
    SteadySolution s = solve_steady_state(m);
    EpochDist pre = pre_arrival_dist(s);
    EpochDist arb = arbitrary_dist(s);
    return {std::move(s), std::move(pre), std::move(arb)};
}

oracle::Dense dense_of(const std::variant<FinitePmf, Geometric>& law, int top) {
    if (const auto* f = std::get_if<FinitePmf>(&law)) {
        oracle::Dense d(static_cast<std::size_t>(f->max_support()) + 1, 0.0);
        for (const auto& pt : f->points()) d[static_cast<std::size_t>(pt.point)] = pt.mass;
        return d;
    }
    // mass beyond the cut is below 1e-18 and is lumped into the last cell
    const double p = std::get<Geometric>(law).p;
    const int cut = p < 1.0 ? static_cast<int>(std::ceil(std::log(1e-18) / std::log1p(-p))) : 1;
    return oracle::geometric_dense(p, std::min(top, std::max(1, cut)));
}

oracle::ChainDist chain_of(const QueueModel& m, int q_max) {
    const auto& a = m.arrival().law();
    const double geo_p = m.arrival().is_geometric() ? std::get<Geometric>(a).p : 0.0;
    return oracle::markov_stationary(geo_p > 0 ? oracle::Dense{} : dense_of(a, 0), geo_p,
                                     dense_of(m.batch(), 0), m.mu(), dense_of(m.capacity().law(), q_max),
                                     q_max);
}

void check_rows(const Solved& s, const scenario::Rows& rows, bool arbitrary_too) {
    for (int n = 0; n <= 8; ++n) {
        CAPTURE(n);
        CHECK(std::abs(s.pre(n) - rows[n][0]) < 1e-6);
        if (arbitrary_too) CHECK(std::abs(s.arb(n) - rows[n][1]) < 1e-6);
        CHECK(std::abs(s.pre(n + 1) / s.pre(n) - rows[n][2]) < 1e-6);
    }
}

}  // namespace

TEST_CASE("three-root example: constants, probabilities and means") {
    const Solved s = solve(scenario::small_example());
    REQUIRE(s.sol.constants.size() == 3);
    CHECK(std::abs(s.sol.constants[0] - 0.061593) < 1e-6);
    CHECK(std::abs(s.sol.constants[1].real() - 0.027481) < 1e-6);
    CHECK(std::abs(s.sol.constants[1].imag() + 0.000834) < 1e-6);
    CHECK(s.sol.constants[2] == std::conj(s.sol.constants[1]));

    const double want[] = {0.582779, 0.137643, 0.101641, 0.076705};
    for (int n = 0; n < 4; ++n) {
        CHECK(std::abs(s.pre(n) - want[n]) < 1e-6);
        CHECK(std::abs(s.arb(n) - want[n]) < 1e-6);
    }
    CHECK(std::abs(mean_queue_length(s.arb) - 1.133649) < 1e-5);
    CHECK(std::abs(mean_queue_length(s.pre) - 1.133649) < 1e-5);
    for (double r : s.sol.residuals) CHECK(r < 1e-9);
    for (double r : boundary_residuals(s.sol)) CHECK(r < 1e-9);
}

TEST_CASE("boundary rows hold for the computed constants") {
    for (const QueueModel& m : {scenario::small_example(), scenario::det10(), scenario::mixed(),
                                scenario::geo_heavy(), scenario::det5_geocap()}) {
        const SteadySolution s = solve_steady_state(m);
        cplx acc{0.0};
        for (std::size_t j = 0; j < s.roots.size(); ++j) acc += s.constants[j] / (1.0 - s.roots[j]);
        CHECK(std::abs(acc - m.lambda()) < 1e-9);
        for (int k = 1; k < m.b(); ++k) {
            CAPTURE(k);
            cplx row{0.0};
            double scale = 0.0;
            for (std::size_t j = 0; j < s.roots.size(); ++j) {
                const cplx t = s.constants[j] * ipow(s.roots[j], -k);
                row += t;
                scale += std::abs(t);
            }
            CHECK(std::abs(row) / scale < 1e-14);
            // rounding of c_j alone puts the absolute floor near scale * 1e-16
            if (scale < 1e6) CHECK(std::abs(row) < 1e-9);
        }
    }
}

TEST_CASE("single-root case: c_1 = lambda (1 - r_1)") {
    const QueueModel m = build_model(FinitePmf({{2, 0.5}, {5, 0.5}}), FinitePmf({{1, 1.0}}), 0.6,
                                     FinitePmf({{1, 0.5}, {2, 0.5}}));
    const SteadySolution s = solve_steady_state(m);
    REQUIRE(s.roots.size() == 1);
    CHECK(std::abs(s.constants[0] - m.lambda() * (1.0 - s.roots[0])) < 1e-14);
}

TEST_CASE("reference rows") {
    check_rows(solve(scenario::det10()), scenario::kDet10Rows, true);
    check_rows(solve(scenario::geo_heavy()), scenario::kGeoHeavyRows, true);
    check_rows(solve(scenario::det5_geocap()), scenario::kDet5GeocapRows, true);
    // the arbitrary-epoch column of this scenario is checked against the chain below
    check_rows(solve(scenario::mixed()), scenario::kMixedRows, false);
}

TEST_CASE("point values") {
    const Solved d10 = solve(scenario::det10());
    CHECK(std::abs(d10.pre(0) - 0.578601) < 1e-6);
    CHECK(std::abs(d10.arb(0) - 0.313415) < 1e-6);
    CHECK(std::floor(mean_queue_length(d10.arb) * 100) / 100 == doctest::Approx(3.73));
    const Solved d5 = solve(scenario::det5_geocap());
    CHECK(std::abs(d5.pre(1) - 0.069991) < 1e-6);
    CHECK(std::abs(d5.arb(0) - 0.48) < 1e-9);
    const Solved gh = solve(scenario::geo_heavy());
    CHECK(std::floor(mean_queue_length(gh.arb) * 100) / 100 == doctest::Approx(9.63));
    CHECK(std::floor(mean_queue_length(gh.pre) * 100) / 100 == doctest::Approx(9.63));
}

TEST_CASE("distributions agree with the slot Markov chain") {
    const std::pair<QueueModel, int> cases[] = {
        {scenario::small_example(), 150}, {scenario::det10(), 200},   {scenario::mixed(), 200},
        {scenario::geo_heavy(), 600},     {scenario::det5_geocap(), 200},
    };
    for (const auto& [m, q_max] : cases) {
        const Solved s = solve(m);
        const oracle::ChainDist c = chain_of(m, q_max);
        double worst = 0.0;
        for (int n = 0; n <= 120; ++n) {
            worst = std::max(worst, std::abs(s.pre(n) - c.pre_arrival[static_cast<std::size_t>(n)]));
            worst = std::max(worst, std::abs(s.arb(n) - c.arbitrary[static_cast<std::size_t>(n)]));
        }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("means match truncated sums") {
    for (const QueueModel& m : {scenario::small_example(), scenario::det10(), scenario::mixed(),
                                scenario::geo_heavy(), scenario::det5_geocap()}) {
        const Solved s = solve(m);
        for (const EpochDist* d : {&s.pre, &s.arb}) {
            double direct = 0.0;
            for (int n = 1; n <= 500; ++n) direct += n * (*d)(n);
            CHECK(std::abs(mean_queue_length(*d) - direct) < 1e-9);
        }
    }
}

TEST_CASE("tail decay") {
    const TailInfo ex = tail_decay_rate(solve_steady_state(scenario::small_example()));
    CHECK(std::abs(ex.rate - 0.603819) < 1e-6);
    CHECK(ex.dominant_real);
    CHECK(ex.dominant_unique);
    CHECK(std::abs(tail_decay_rate(solve_steady_state(scenario::mixed())).rate - 0.589450) < 1e-6);
    CHECK(std::abs(tail_decay_rate(solve_steady_state(scenario::det10())).rate - 0.600774) < 1e-6);
    CHECK(std::abs(tail_decay_rate(solve_steady_state(scenario::det5_geocap())).rate - 0.620481) < 1e-6);

    // The ratio column of the slow-tail scenario wobbles around 0.9265, but the
    // dominant root itself is real; the wobble is the negative second root.
    const TailInfo gh = tail_decay_rate(solve_steady_state(scenario::geo_heavy()));
    CHECK(std::abs(gh.rate - 0.926567) < 1e-6);
    CHECK(gh.dominant_real);
    CHECK(gh.dominant_unique);
    CHECK(std::abs(gh.second_modulus - 0.848464) < 1e-6);
    const EpochDist pre = pre_arrival_dist(solve_steady_state(scenario::geo_heavy()));
    const double r124 = pre(125) / pre(124);
    const double r125 = pre(126) / pre(125);
    CHECK((r124 - gh.rate) * (r125 - gh.rate) < 0.0);
}

TEST_CASE("p_0 from the closed form, not from the n >= 1 expression at n = 0") {
    for (const QueueModel& m : {scenario::det10(), scenario::det5_geocap(), scenario::mixed()}) {
        const SteadySolution s = solve_steady_state(m);
        cplx at_zero{0.0};
        for (const cplx& k : s.coeffs_K) at_zero += k;
        CHECK(std::abs(at_zero.real() - s.p0) > 1e-3);
        double rest = 0.0;
        const EpochDist arb = arbitrary_dist(s);
        for (int n = 1; n <= arb.cutoff(1e-16); ++n) rest += arb(n);
        CHECK(std::abs(s.p0 - (1.0 - rest)) < 1e-8);
    }
    // geometric arrivals: the two coincide
    const SteadySolution g = solve_steady_state(scenario::small_example());
    cplx at_zero{0.0};
    for (const cplx& k : g.coeffs_K) at_zero += k;
    CHECK(std::abs(at_zero.real() - g.p0) < 1e-12);
}

TEST_CASE("special cases") {
    SUBCASE("single-customer geometric queue") {
        const QueueModel m = build_model(Geometric{0.2}, FinitePmf({{1, 1.0}}), 0.5, FinitePmf({{1, 1.0}}));
        CHECK(classify(m) == SpecialCase::UnitBoth);
        const double r = oracle::bisect(
            [](double s) {
                const double w = 0.5 + 0.5 * s;
                return 0.2 * w / (1.0 - 0.8 * w) - s;
            },
            0.0, 0.999);
        const SteadySolution sp = solve_special(m);
        const EpochDist pre = pre_arrival_dist(sp);
        const EpochDist arb = arbitrary_dist(sp);
        for (int n = 0; n < 50; ++n) CHECK(std::abs(pre(n) - (1 - r) * std::pow(r, n)) < 1e-12);
        CHECK(std::abs(arb(0) - (1.0 - (0.2 / 0.5) * (1 - 0.5 + 0.5 * r))) < 1e-12);
        for (int n = 1; n < 50; ++n)
            CHECK(std::abs(arb(n) - (0.2 / 0.5) * (1 - r) * (1 - 0.5 + 0.5 * r) * std::pow(r, n - 1)) < 1e-12);
    }
    SUBCASE("unit batches with random capacity") {
        const QueueModel m = build_model(Geometric{0.2}, FinitePmf({{1, 1.0}}), 0.5,
                                         FinitePmf({{1, 0.4}, {2, 0.6}}));
        CHECK(classify(m) == SpecialCase::UnitArrivalBatchService);
        const Solved g = solve(m);
        const SteadySolution sp = solve_special(m);
        const EpochDist pre = pre_arrival_dist(sp);
        const EpochDist arb = arbitrary_dist(sp);
        for (int n = 0; n < 200; ++n) {
            CHECK(std::abs(pre(n) - g.pre(n)) < 1e-10);
            CHECK(std::abs(arb(n) - g.arb(n)) < 1e-10);
        }
    }
    SUBCASE("batches with unit capacity") {
        const QueueModel m = scenario::det10();
        CHECK(classify(m) == SpecialCase::BatchArrivalUnitService);
        const Solved g = solve(m);
        const SteadySolution sp = solve_special(m);
        const EpochDist pre = pre_arrival_dist(sp);
        const EpochDist arb = arbitrary_dist(sp);
        for (int n = 0; n < 200; ++n) {
            CHECK(std::abs(pre(n) - g.pre(n)) < 1e-10);
            CHECK(std::abs(arb(n) - g.arb(n)) < 1e-10);
        }
    }
    SUBCASE("general model is not special") {
        CHECK(classify(scenario::small_example()) == SpecialCase::None);
        try {
            solve_special(scenario::small_example());
            FAIL("expected NotSpecialCase");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NotSpecialCase);
        }
    }
}

TEST_CASE("boundary system failures") {
    const std::vector<cplx> repeated{0.5, 0.5, 0.2};
    try {
        solve_boundary_system(repeated, 0.1);
        FAIL("expected SingularSystem");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularSystem);
    }
    const std::vector<cplx> close{0.5, 0.5003, 0.5006, 0.5009, 0.5012};
    CHECK(solve_boundary_system(close, 0.1).condition_estimate > 1e12);
}

TEST_CASE("randomized invariants") {
    std::mt19937_64 rng(2024);
    int dominant_checks = 0;
    for (int trial = 0; trial < 200; ++trial) {
        CAPTURE(trial);
        const QueueModel m = scenario::random_model(rng);
        const Solved s = solve(m);
        for (int k = 1; k < m.b(); ++k) {
            CAPTURE(k);
            cplx row{0.0};
            double scale = 0.0;
            for (std::size_t j = 0; j < s.sol.roots.size(); ++j) {
                const cplx t = s.sol.constants[j] * ipow(s.sol.roots[j], -k);
                row += t;
                scale += std::abs(t);
            }
            CHECK(std::abs(row) / scale < 1e-14);
            if (scale < 1e6) CHECK(s.sol.residuals[static_cast<std::size_t>(m.b() - 1 - k)] < 1e-9);
        }
        CHECK(s.sol.residuals.back() < 1e-9);

        const int n_cut = std::max(s.pre.cutoff(), s.arb.cutoff());
        const double pre_sum = s.pre.truncate(n_cut).captured;
        const double arb_sum = s.arb.truncate(n_cut).captured;
        CHECK(pre_sum >= 1.0 - 1e-8);
        CHECK(pre_sum <= 1.0 + 1e-8);
        CHECK(arb_sum >= 1.0 - 1e-8);
        CHECK(arb_sum <= 1.0 + 1e-8);

        double worst_imag = 0.0;
        double worst_neg = 0.0;
        for (int n = 0; n <= 500; ++n) {
            worst_imag = std::max({worst_imag, s.pre.imag_residue(n), s.arb.imag_residue(n)});
            worst_neg = std::min({worst_neg, s.pre(n), s.arb(n)});
        }
        CHECK(worst_imag < 1e-9);
        CHECK(worst_neg >= -1e-10);

        for (std::size_t j = 0; j < s.sol.roots.size(); ++j) {
            if (s.sol.roots[j].imag() == 0.0) {
                CHECK(s.sol.constants[j].imag() == 0.0);
                continue;
            }
            bool paired = false;
            for (std::size_t k = 0; k < s.sol.roots.size(); ++k)
                if (std::abs(s.sol.roots[k] - std::conj(s.sol.roots[j])) < 1e-9)
                    paired = paired || std::abs(s.sol.constants[k] - std::conj(s.sol.constants[j])) < 1e-9;
            CHECK(paired);
        }

        if (m.arrival().is_geometric())
            for (int n = 0; n <= 200; ++n) CHECK(std::abs(s.pre(n) - s.arb(n)) < 1e-9);

        const TailInfo t = tail_decay_rate(s.sol);
        if (t.dominant_real && t.dominant_unique && t.dominant_simple &&
            std::pow(t.second_modulus / t.rate, 200) < 1e-7 && s.pre(200) > 1e-280) {
            ++dominant_checks;
            CHECK(std::abs(s.pre(201) / s.pre(200) - t.rate) < 1e-6);
        }

        double rest = 0.0;
        for (int n = 1; n <= s.arb.cutoff(1e-16); ++n) rest += s.arb(n);
        CHECK(std::abs(s.sol.p0 - (1.0 - rest)) < 1e-8);

        if (classify(m) != SpecialCase::None) {
            const SteadySolution sp = solve_special(m);
            const EpochDist pre = pre_arrival_dist(sp);
            const EpochDist arb = arbitrary_dist(sp);
            for (int n = 0; n <= 200; ++n) {
                CHECK(std::abs(pre(n) - s.pre(n)) < 1e-10);
                CHECK(std::abs(arb(n) - s.arb(n)) < 1e-10);
            }
        }
    }
    CHECK(dominant_checks > 20);
}

TEST_CASE("random models against the slot Markov chain") {
    std::mt19937_64 rng(77);
    int done = 0;
    while (done < 40) {
        const QueueModel m = scenario::random_model(rng);
        const Solved s = solve(m);
        if (s.sol.tail_rate > 0.9) continue;
        const int q_max = std::min(1000, s.arb.cutoff(1e-16) + 60);
        ++done;
        const oracle::ChainDist c = chain_of(m, q_max);
        double worst = 0.0;
        for (int n = 0; n <= std::min(q_max - 60, 200); ++n) {
            worst = std::max(worst, std::abs(s.pre(n) - c.pre_arrival[static_cast<std::size_t>(n)]));
            worst = std::max(worst, std::abs(s.arb(n) - c.arbitrary[static_cast<std::size_t>(n)]));
        }
        CAPTURE(done);
        CHECK(worst < 1e-12);
    }
}
