#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "batchq/char_eq.hpp"
#include "companion.hpp"
#include "scenarios.hpp"

using namespace batchq;

// Claimed property: for randomized stable models (mu uniform in (0.05, 0.95)),
// 1 - mu + mu Y(s) = 0 has no solution with |s| < 1. It does not hold once
// mu > 1/2; see the counterexample test in test_char_eq.
TEST_CASE("service factor has no interior root over the random model suite") {
    std::mt19937_64 rng(2024);
    int violations = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const QueueModel m = scenario::random_model(rng);
        for (const cplx& z : oracle::companion_roots(service_factor_poly(m)))
            if (std::abs(z) < 1.0) ++violations;
    }
    CHECK(violations == 0);
}
