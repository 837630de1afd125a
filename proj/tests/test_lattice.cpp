#include "doctest.h"

#include <algorithm>
#include <set>

#include "fermigas/errors.hpp"
#include "fermigas/lattice.hpp"
#include "oracles.hpp"

using namespace fermigas;

namespace {

std::vector<Momentum> sorted(std::vector<Momentum> v) {
    std::sort(v.begin(), v.end(), CanonicalLess{});
    return v;
}

}  // namespace

TEST_CASE("ball sizes for small shells") {
    const FermiBall b0(0);
    CHECK(b0.n_particles() == 1);
    CHECK(b0.points().front() == Momentum{0, 0, 0});
    CHECK(b0.min_outside_norm2() == 1);

    const FermiBall b1(1);
    CHECK(b1.n_particles() == 7);
    CHECK(b1.min_outside_norm2() == 2);
    CHECK(b1.kf() == doctest::Approx(1.0));

    CHECK(FermiBall(3).n_particles() == 27);
}

TEST_CASE("ball matches a cube scan for shell caps 1..25") {
    for (std::int64_t cap = 1; cap <= 25; ++cap) {
        const FermiBall ball(cap);
        const auto scan = sorted(oracle::cube_scan(cap));
        CHECK(ball.points() == scan);
        CHECK(ball.min_outside_norm2() == oracle::min_outside(cap));
        for (const auto& k : ball.points()) CHECK(ball.contains(-k));
    }
    // 7 is not a sum of three squares
    CHECK(FermiBall(6).min_outside_norm2() == 8);
}

TEST_CASE("negative shell cap is rejected") {
    CHECK_THROWS_AS(FermiBall(-1), InvalidArgument);
}

TEST_CASE("unit-shift lens on the smallest nontrivial ball") {
    const FermiBall ball(1);
    const LensData lens = build_lens(ball, {1, 0, 0});
    const std::vector<Momentum> expected =
        sorted({{2, 0, 0}, {1, 1, 0}, {1, -1, 0}, {1, 0, 1}, {1, 0, -1}});
    CHECK(lens.points() == expected);
    for (std::size_t i = 0; i < lens.size(); ++i) {
        const double want = lens.points()[i] == Momentum{2, 0, 0} ? 1.5 : 0.5;
        CHECK(lens.lambdas()[i].value() == want);
    }
    CHECK(lens.index_of({2, 0, 0}).has_value());
    CHECK_FALSE(lens.index_of({0, 0, 0}).has_value());
}

TEST_CASE("lens under the cubic rotation x -> z") {
    const FermiBall ball(1);
    const LensData a = build_lens(ball, {1, 0, 0});
    const LensData b = build_lens(ball, {0, 0, 1});
    std::vector<Momentum> rotated;
    for (const auto& p : a.points()) rotated.push_back({p.z, p.y, p.x});
    CHECK(b.points() == sorted(rotated));
}

TEST_CASE("zero shift is rejected, empty synthetic lens is valid") {
    const FermiBall ball(1);
    CHECK_THROWS_AS(build_lens(ball, {0, 0, 0}), InvalidArgument);
    const LensData empty({1, 0, 0}, {}, {});
    CHECK(empty.empty());
    CHECK_FALSE(build_lens(ball, {-1, 0, 0}).empty());
}

TEST_CASE("lenses match a box scan, reflect, and have λ at least one half") {
    for (std::int64_t cap : {1, 2, 3, 5}) {
        const FermiBall ball(cap);
        for (const auto& l : shifts_up_to(4 * cap + 4)) {
            const LensData lens = build_lens(ball, l);
            CHECK(lens.points() == oracle::lens_scan(cap, l));
            const LensData mirror = build_lens(ball, -l);
            std::vector<Momentum> neg;
            for (const auto& p : lens.points()) neg.push_back(-p);
            CHECK(mirror.points() == sorted(neg));
            for (std::size_t i = 0; i < lens.size(); ++i) {
                CHECK(lens.lambdas()[i].value() == doctest::Approx(static_cast<double>(oracle::lambda(l, lens.points()[i]))));
                CHECK(lens.lambdas()[i].twice >= 1);
            }
        }
    }
}

TEST_CASE("excitation gap examples") {
    const FermiBall ball(1);
    CHECK(excitation_gap(ball, {1, 1, 0}).value() == 0.5);
    CHECK(excitation_gap(ball, {0, 0, 0}).value() == 1.5);
    CHECK(excitation_gap(ball, {3, 0, 0}).value() == 7.5);
    CHECK(excitation_gap(ball, {9, 9, 9}).value() == 241.5);
}

TEST_CASE("λ is at least half the gap for every lens containing q") {
    for (std::int64_t cap : {1, 2, 3, 4}) {
        const FermiBall ball(cap);
        const int r = static_cast<int>(std::sqrt(4.0 * cap)) + 1;
        for (int x = -r; x <= r; ++x)
            for (int y = -r; y <= r; ++y)
                for (int z = -r; z <= r; ++z) {
                    const Momentum q{x, y, z};
                    if (ball.contains(q)) continue;
                    const double e = excitation_gap(ball, q).value();
                    CHECK(e >= 0.5);
                    for (const auto& l : relevant_shifts(ball, q)) CHECK(pair_energy(l, q).value() >= 0.5 * e);
                }
    }
}

TEST_CASE("relevant shifts outside and inside the ball") {
    const FermiBall ball(1);
    const Momentum q{1, 1, 0};
    auto shifts = relevant_shifts(ball, q);
    std::vector<Momentum> expected;
    for (const auto& k : ball.points()) expected.push_back(q - k);
    CHECK(sorted(shifts) == sorted(expected));

    // q = 0 inside: q + l ∈ L_l  <=>  l ∉ B_F
    const auto inside = relevant_shifts(ball, {0, 0, 0}, 12);
    std::vector<Momentum> want;
    for (const auto& l : shifts_up_to(12))
        if (!ball.contains(l)) want.push_back(l);
    CHECK(sorted(inside) == sorted(want));

    // B_F = {0}: every l ≠ 0 qualifies
    const FermiBall origin(0);
    CHECK(relevant_shifts(origin, {0, 0, 0}, 3).size() == shifts_up_to(3).size());
}

TEST_CASE("energy sum over a lens stays bounded in k_F") {
    auto worst = [](std::int64_t cap) {
        const FermiBall ball(cap);
        double best = 0.0;
        for (const auto& l : shifts_up_to(4 * cap)) {
            const LensData lens = build_lens(ball, l);
            double sum = 0.0;
            for (const auto& lam : lens.lambdas()) sum += 1.0 / lam.value();
            best = std::max(best, sum / ball.kf());
        }
        return best;
    };
    const double base = worst(4);
    double top = base;
    for (std::int64_t cap = 5; cap <= 25; ++cap) top = std::max(top, worst(cap));
    MESSAGE("energy-sum max over 4..25 = " << top << ", at 4 = " << base);
    CHECK(top <= 2.0 * base);
}

TEST_CASE("cubic representatives") {
    const Momentum p{-1, 3, -2};
    const Momentum rep = cubic_representative(p);
    CHECK(rep == Momentum{3, 2, 1});
    std::set<Momentum, CanonicalLess> orbit;
    for (int g = 0; g < 48; ++g) orbit.insert(apply_cubic(g, p));
    CHECK(orbit.size() == 48);
    for (const auto& o : orbit) CHECK(cubic_representative(o) == rep);
}
