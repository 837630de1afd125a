#include "doctest.h"

#include <cmath>
#include <numbers>

#include "fermigas/errors.hpp"
#include "fermigas/potential.hpp"

using namespace fermigas;

TEST_CASE("coulomb values") {
    const auto v = coulomb(1.0);
    CHECK(v({1, 0, 0}) == 1.0);
    CHECK(v({1, 1, 1}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(coulomb(2.0)({0, 2, 0}) == 0.5);
    CHECK_THROWS_AS(v({0, 0, 0}), InvalidArgument);
    CHECK(v.decay_class() == DecayClass::coulomb_like);
}

TEST_CASE("yukawa-like values and convergent partial sums") {
    const auto v = yukawa_like(1.0, 2.0);
    CHECK(v({1, 0, 0}) == 1.0);
    CHECK(v({2, 0, 0}) == 1.0 / 16.0);
    CHECK_THROWS_AS(yukawa_like(1.0, 1.5), InvalidArgument);

    // Partial sums over |l| ≤ R; increments must fall below the tail bound 4π/R.
    auto partial = [&](int r) {
        double s = 0.0;
        for (const auto& l : shifts_up_to(std::int64_t{r} * r)) s += v(l);
        return s;
    };
    double prev = partial(4);
    for (int r : {8, 16, 32}) {
        const double cur = partial(r);
        CHECK(cur - prev > 0.0);
        CHECK(cur - prev <= 4.0 * std::numbers::pi / (r / 2.0));
        prev = cur;
    }
}

TEST_CASE("descriptor parsing") {
    CHECK(parse_potential("coulomb:g=1")({1, 0, 0}) == 1.0);
    CHECK(parse_potential("yukawa:g=1,p=2")({2, 0, 0}) == 1.0 / 16.0);
    CHECK(parse_potential("zero")({3, 1, 0}) == 0.0);
    CHECK(parse_potential("coulomb:g=0")({1, 0, 0}) == 0.0);
    CHECK_THROWS(parse_potential("gauss:g=1"));
    CHECK_THROWS(parse_potential("coulomb:g=-1"));
    CHECK_THROWS(parse_potential("coulomb:h=1"));
}

TEST_CASE("hypothesis report for coulomb") {
    const auto rep = verify_hypotheses(coulomb(1.0), 10);
    CHECK(rep.nonnegative);
    CHECK(rep.even);
    CHECK(rep.radial_decreasing);
    CHECK(rep.coulomb_like);
    CHECK_FALSE(rep.summable);
    CHECK(rep.violations.empty());
    CHECK(rep.max_v_times_norm2 == doctest::Approx(1.0));
}

TEST_CASE("hypothesis report for yukawa-like") {
    const auto rep = verify_hypotheses(yukawa_like(1.0, 2.0), 10);
    CHECK(rep.coulomb_like);
    CHECK(rep.summable);
    CHECK(rep.alpha_square_summable);
    CHECK(rep.alpha_sup == doctest::Approx(2.0));
}

TEST_CASE("odd potential is caught at (1,0,0)") {
    const auto rep = verify_hypotheses(skewed_coulomb(1.0, 0.1), 3);
    CHECK_FALSE(rep.even);
    CHECK_FALSE(rep.alpha_square_summable);
    REQUIRE_FALSE(rep.violations.empty());
    bool found = false;
    for (const auto& v : rep.violations)
        if (v.kind == "odd" && v.at == Momentum{1, 0, 0}) found = true;
    CHECK(found);
}

TEST_CASE("built-in families are even and nonnegative") {
    for (const auto& spec : {coulomb(1.0), yukawa_like(0.5, 1.8), zero_potential()})
        for (const auto& l : shifts_up_to(30)) {
            CHECK(spec(l) >= 0.0);
            CHECK(spec(l) == spec(-l));
        }
}

TEST_CASE("coupling scale is exactly linear") {
    const auto base = coulomb(1.0);
    for (double s : {1e-3, 0.25, 3.0}) {
        const auto scaled = base.with_scale(s);
        CHECK(scaled.coupling_scale() == s);
        for (const auto& l : shifts_up_to(9)) CHECK(scaled(l) == s * base(l));
    }
    CHECK(base.fingerprint() != base.with_scale(2.0).fingerprint());
}
