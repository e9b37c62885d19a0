#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "batchq/error.hpp"
#include "batchq/model.hpp"
#include "batchq/pgf.hpp"
#include "scenarios.hpp"

using namespace batchq;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an exception");
    return ErrorCode::Parse;
}

cplx direct_sum(const FinitePmf& f, cplx z) {
    cplx acc{0.0};
    for (const auto& pt : f.points()) acc += pt.mass * std::pow(z, pt.point);
    return acc;
}

}  // namespace

TEST_CASE("finite pmf validation") {
    CHECK(code_of([] { FinitePmf({{1, 0.5}, {2, 0.4}}); }) == ErrorCode::InvalidPmf);
    CHECK(code_of([] { FinitePmf({{1, 1.2}, {2, -0.2}}); }) == ErrorCode::InvalidPmf);
    CHECK(code_of([] { FinitePmf({{1, 0.5}, {1, 0.5}}); }) == ErrorCode::InvalidPmf);
    CHECK(code_of([] { FinitePmf({{0, 0.5}, {1, 0.5}}); }) == ErrorCode::InvalidPmf);
    CHECK(code_of([] { FinitePmf({}); }) == ErrorCode::InvalidPmf);

    // off by 1e-13 is accepted, 1e-11 is not
    CHECK_NOTHROW(FinitePmf({{1, 0.5}, {2, 0.5 + 1e-13}}));
    CHECK(code_of([] { FinitePmf({{1, 0.5}, {2, 0.5 + 1e-11}}); }) == ErrorCode::InvalidPmf);

    const FinitePmf trimmed({{3, 0.0}, {1, 0.25}, {2, 0.75}, {9, 0.0}});
    CHECK(trimmed.max_support() == 2);
    CHECK(trimmed.min_support() == 1);
    CHECK(trimmed.points().size() == 2);
    CHECK(trimmed.mass_at(2) == 0.75);
    CHECK(trimmed.mass_at(5) == 0.0);
}

TEST_CASE("pgf values and means") {
    const FinitePmf g({{1, 0.4}, {2, 0.3}, {3, 0.3}});
    const RationalPgf gp = RationalPgf::from(g);
    CHECK(std::abs(pgf_eval(gp, 1.0) - 1.0) < 1e-15);
    CHECK(std::abs(pgf_eval(gp, 0.5) - 0.3125) < 1e-15);
    CHECK(pgf_mean(gp) == doctest::Approx(1.9).epsilon(1e-14));

    const RationalPgf y = RationalPgf::from(FinitePmf({{1, 0.4}, {2, 0.6}}));
    CHECK(pgf_mean(y) == doctest::Approx(1.6).epsilon(1e-14));

    const RationalPgf geo = RationalPgf::from(Geometric{0.4});
    CHECK(std::abs(pgf_eval(geo, 1.0) - 1.0) < 1e-15);
    CHECK(pgf_mean(geo) == doctest::Approx(2.5).epsilon(1e-14));
    // 0.4 z / (1 - 0.6 z) at z = 0.5
    CHECK(std::abs(pgf_eval(geo, 0.5) - 0.2 / 0.7) < 1e-15);
}

TEST_CASE("pole at argument") {
    const RationalPgf geo = RationalPgf::from(Geometric{0.5});
    CHECK(code_of([&] { pgf_eval(geo, 2.0); }) == ErrorCode::PoleAtArgument);
}

TEST_CASE("rational pgf rejects poles in the closed disk and bad normalization") {
    // 0.4 z / (1 - 0.5 z) is 0.8 at z = 1
    CHECK(code_of([] { RationalPgf({0.0, 0.4}, {1.0, -0.5}); }) == ErrorCode::InvalidPmf);
    // 3 z / (1 + 2 z) is normalized but has a pole at -1/2
    CHECK(code_of([] { RationalPgf({0.0, 3.0}, {1.0, 2.0}); }) == ErrorCode::InvalidPmf);
    const RationalPgf ok({0.0, 0.5}, {1.0, -0.5});
    CHECK(std::abs(ok(0.5) - 0.25 / 0.75) < 1e-15);
}

TEST_CASE("pgf properties over random laws") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const FinitePmf f = scenario::random_pmf(rng, 1, 1 + trial % 20, 1 + trial % 5);
        const RationalPgf pf = RationalPgf::from(f);
        CHECK(std::abs(pgf_eval(pf, 1.0) - 1.0) < 1e-12);
        for (int k = 0; k < 100; ++k) {
            const cplx z = std::polar(std::sqrt(u(rng)), 2.0 * M_PI * u(rng));
            CHECK(std::abs(pgf_eval(pf, z) - direct_sum(f, z)) < 1e-12);
        }
        const double h = 1e-7;
        const double fd = (1.0 - pgf_eval(pf, 1.0 - h).real()) / h;
        CHECK(std::abs(pgf_mean(pf) - fd) < 1e-5 * std::max(1.0, fd));

        const Geometric g{0.05 + 0.95 * u(rng)};
        const RationalPgf pg = RationalPgf::from(g);
        CHECK(std::abs(pgf_eval(pg, 1.0) - 1.0) < 1e-12);
        const double fdg = (1.0 - pgf_eval(pg, 1.0 - h).real()) / h;
        CHECK(std::abs(pgf_mean(pg) - fdg) < 1e-5 * std::max(1.0, fdg));
    }
}

TEST_CASE("eval_d slope matches a central difference") {
    const RationalPgf geo = RationalPgf::from(Geometric{0.3});
    const cplx z{0.3, 0.4};
    const double h = 1e-6;
    const cplx fd = (geo(z + h) - geo(z - h)) / (2.0 * h);
    CHECK(std::abs(geo.eval_d(z).slope - fd) < 1e-8);
}

TEST_CASE("ipow") {
    CHECK(ipow(cplx{0.0}, 0) == cplx{1.0});
    CHECK(ipow(cplx{0.0}, 5) == cplx{0.0});
    CHECK(std::abs(ipow(cplx{0.0, 2.0}, -2) - cplx{-0.25}) < 1e-16);
    CHECK(std::abs(ipow(cplx{0.9, 0.1}, 37) - std::pow(cplx{0.9, 0.1}, 37)) < 1e-13);
}

TEST_CASE("queue model") {
    const QueueModel m = scenario::small_example();
    CHECK(m.b() == 3);
    CHECK(m.g_bar() == doctest::Approx(1.9).epsilon(1e-14));
    CHECK(m.y_bar() == doctest::Approx(1.6).epsilon(1e-14));
    CHECK(m.rho() == doctest::Approx(0.475).epsilon(1e-14));

    const QueueModel d = scenario::det10();
    CHECK(d.b() == 10);
    CHECK(d.g_bar() == doctest::Approx(6.7).epsilon(1e-14));
    CHECK(std::abs(d.rho() - 0.7444) < 5e-5);

    const QueueModel u = build_model(InterArrivalDist::deterministic(5), FinitePmf({{1, 1.0}}), 0.5,
                                     FinitePmf({{1, 1.0}}));
    CHECK(u.rho() == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(u.g_bar() == 1.0);
    CHECK(u.y_bar() == 1.0);

    CHECK(code_of([] {
              build_model(Geometric{0.5}, FinitePmf({{2, 1.0}}), 0.5, FinitePmf({{1, 1.0}}));
          }) == ErrorCode::Unstable);
    CHECK(code_of([] {
              build_model(Geometric{0.5}, FinitePmf({{1, 1.0}}), 1.5, FinitePmf({{1, 1.0}}));
          }) == ErrorCode::InvalidModel);
    try {
        build_model(Geometric{0.5}, FinitePmf({{2, 1.0}}), 0.5, FinitePmf({{1, 1.0}}));
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("rho = 2") != std::string::npos);
    }
}

TEST_CASE("rho is recomputed exactly from the raw pmfs") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const QueueModel m = scenario::random_model(rng);
        double a_mean = 0.0;
        if (const auto* f = std::get_if<FinitePmf>(&m.arrival().law()))
            for (const auto& pt : f->points()) a_mean += pt.point * pt.mass;
        else
            a_mean = 1.0 / std::get<Geometric>(m.arrival().law()).p;
        double g_mean = 0.0;
        for (const auto& pt : m.batch().points()) g_mean += pt.point * pt.mass;
        double y_mean = 0.0;
        if (const auto* f = std::get_if<FinitePmf>(&m.capacity().law()))
            for (const auto& pt : f->points()) y_mean += pt.point * pt.mass;
        else
            y_mean = 1.0 / std::get<Geometric>(m.capacity().law()).p;
        CHECK(m.rho() == (1.0 / a_mean) * g_mean / (m.mu() * y_mean));
    }
}
