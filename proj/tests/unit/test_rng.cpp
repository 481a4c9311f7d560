#include <doctest.h>

#include <cmath>
#include <vector>

#include "tpad/rng.hpp"

using namespace tpad;

TEST_CASE("rng: identical seed gives identical sequences") {
    Rng a(7), b(7);
    for (int i = 0; i < 1000; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    Rng c(7), d(7);
    for (int i = 0; i < 100; ++i) {
        CHECK(c.gaussian(0.0, 1.0) == d.gaussian(0.0, 1.0));
    }
}

TEST_CASE("rng: different seeds diverge") {
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 100; ++i) {
        if (a.next_u64() == b.next_u64()) ++same;
    }
    CHECK(same == 0);
}

TEST_CASE("rng: uniform stays in [0, 1)") {
    Rng rng(3);
    for (int i = 0; i < 10000; ++i) {
        double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("gaussian: zero std degenerates to the mean") {
    Rng rng(11);
    Vector draws = gaussian(rng, 3, 5.0, 0.0);
    CHECK(draws[0] == 5.0);
    CHECK(draws[1] == 5.0);
    CHECK(draws[2] == 5.0);
}

TEST_CASE("gaussian: negative std rejected") {
    Rng rng(1);
    CHECK_THROWS_AS(gaussian(rng, 3, 0.0, -1.0), ParamError);
    CHECK_THROWS_AS(rng.gaussian(0.0, -0.5), ParamError);
}

TEST_CASE("gaussian: sample moments match at n=1e5") {
    // law-of-large-numbers check; tolerances +-0.02
    Rng rng(42);
    const int n = 100000;
    Vector draws = gaussian(rng, n, 0.0, 1.0);
    double mean = draws.mean();
    double var = (draws.array() - mean).square().sum() / n;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(std::sqrt(var) - 1.0) < 0.02);
}

TEST_CASE("rng: child streams are deterministic and independent per index") {
    Rng base(9);
    Rng c0 = base.child(0);
    Rng c0_again = Rng(9).child(0);
    Rng c1 = base.child(1);
    CHECK(c0.next_u64() == c0_again.next_u64());
    CHECK(Rng(9).child(0).next_u64() != c1.next_u64());
}

TEST_CASE("rng: permutation is a permutation") {
    Rng rng(5);
    auto perm = rng.permutation(100);
    std::vector<bool> seen(100, false);
    for (Index i : perm) {
        REQUIRE(i >= 0);
        REQUIRE(i < 100);
        CHECK(!seen[static_cast<size_t>(i)]);
        seen[static_cast<size_t>(i)] = true;
    }
}
