#include "doctest.h"

#include <bit>
#include <cmath>
#include <map>
#include <set>

#include "fermigas/errors.hpp"
#include "fermigas/fock_oracle.hpp"
#include "oracles.hpp"

using namespace fermigas;

namespace {

const std::vector<double> kGrid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};

std::uint64_t mask_of(const std::vector<int>& occ) {
    std::uint64_t m = 0;
    for (int i : occ) m |= std::uint64_t{1} << i;
    return m;
}

// c = CΩ with C = ½ Σ_l Σ_{r,s} K(l)_{r,s} a*_{−s} a*_{−s+l} a*_r a*_{r−l}, built on sorted occupation lists.
std::map<std::uint64_t, long double> creation_on_vacuum(const ModeSet& modes, const KernelFamily& fam) {
    std::map<std::uint64_t, long double> c;
    for (const auto& l : shifts_up_to(modes.shift_cutoff)) {
        const auto k = fam.get(l);
        const auto& pts = k->lens.points();
        for (std::size_t a = 0; a < pts.size(); ++a)
            for (std::size_t b = 0; b < pts.size(); ++b) {
                const Momentum& r = pts[a];
                const Momentum& s = pts[b];
                oracle::Config conf;
                bool ok = true;
                for (const Momentum& m : {r - l, r, -s + l, -s}) ok = ok && oracle::create(conf, *modes.index_of(m));
                if (!ok) continue;
                c[mask_of(conf.occupied)] += 0.5L * conf.sign * static_cast<long double>(k->K(a, b));
            }
    }
    return c;
}

double amplitude(const FockStateVector& st, std::uint64_t mask) {
    for (std::size_t i = 0; i < st.basis.size(); ++i)
        if (st.basis[i] == mask) return st.amplitudes[static_cast<Eigen::Index>(i)];
    return 0.0;
}

double slope(double x0, double y0, double x1, double y1) { return std::log(y1 / y0) / std::log(x1 / x0); }

}  // namespace

TEST_CASE("mode sets") {
    const auto m1 = build_mode_set(FermiBall(1), 1);
    CHECK(m1.n_particle_modes == 18);
    CHECK(m1.n_hole_modes == 6);
    CHECK(m1.size() == 24);
    int norm2 = 0, norm4 = 0;
    for (const auto& p : m1.modes) {
        norm2 += p.norm2() == 2;
        norm4 += p.norm2() == 4;
    }
    CHECK(norm2 == 12);
    CHECK(norm4 == 6);
    // independent union of the six unit-shift lenses and their partners
    std::set<Momentum, CanonicalLess> want;
    for (const Momentum l : {Momentum{1, 0, 0}, Momentum{-1, 0, 0}, Momentum{0, 1, 0}, Momentum{0, -1, 0},
                             Momentum{0, 0, 1}, Momentum{0, 0, -1}})
        for (const auto& p : oracle::lens_scan(1, l)) {
            want.insert(p);
            want.insert(p - l);
        }
    CHECK(m1.modes == std::vector<Momentum>(want.begin(), want.end()));
    CHECK_FALSE(m1.index_of({0, 0, 0}).has_value());

    const auto m0 = build_mode_set(FermiBall(0), 1);
    CHECK(m0.size() == 7);
    CHECK(m0.n_hole_modes == 1);
    CHECK(m0.modes.front() == Momentum{0, 0, 0});

    CHECK_THROWS_AS(build_mode_set(FermiBall(1), 0), InvalidArgument);
}

TEST_CASE("zero potential: empty generator and the vacuum stays put") {
    const FermiBall ball(1);
    const auto modes = build_mode_set(ball, 1);
    const KernelFamily fam(ball, zero_potential(), 1);
    const auto S = build_generator(modes, fam, 4);
    CHECK(S.nonzeros == 0);
    CHECK(S.basis.size() == 1);
    const auto st = apply_exp_generator(S, 0.7, 1e-20);
    CHECK(st.amplitudes.size() == 1);
    CHECK(st.amplitudes[0] == 1.0);
    for (int m = 1; m <= 5; ++m) CHECK(number_moment(st, m) == 1.0);
    CHECK(bootstrap_sup({st}, modes) == 0.0);
    for (const auto& q : modes.modes) CHECK(occupation_expectation(st, modes, ball, q).value == (ball.contains(q) ? 1.0 : 0.0));
}

TEST_CASE("generator is exactly antisymmetric and creates four particles from the vacuum") {
    const FermiBall ball(1);
    const auto modes = build_mode_set(ball, 1);
    const KernelFamily fam(ball, coulomb(1.0), 1);
    for (int cap : {4, 6}) {
        const auto S = build_generator(modes, fam, cap);
        const Eigen::SparseMatrix<double, Eigen::RowMajor> sym = S.S + Eigen::SparseMatrix<double, Eigen::RowMajor>(S.S.transpose());
        double worst = 0.0;
        for (Eigen::Index r = 0; r < sym.outerSize(); ++r)
            for (decltype(sym)::InnerIterator it(sym, r); it; ++it) worst = std::max(worst, std::abs(it.value()));
        CHECK(worst == 0.0);
        CHECK(S.basis.front() == 0);
        for (auto b : S.basis) CHECK(std::popcount(b) % 4 == 0);

        Eigen::VectorXd omega = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(S.basis.size()));
        omega[0] = 1.0;
        const Eigen::VectorXd so = S.S * omega;
        CHECK(so[0] == 0.0);
        for (std::size_t i = 1; i < S.basis.size(); ++i)
            if (so[static_cast<Eigen::Index>(i)] != 0.0) CHECK(std::popcount(S.basis[i]) == 4);
    }
}

TEST_CASE("exponential action equals the closed-form rotation of the vacuum") {
    // On popcount ≤ 6 the flow stays in span{Ω, ĉ}: e^{−λS}Ω = cos(λθ)Ω + sin(λθ)ĉ, θ = ‖CΩ‖.
    const FermiBall ball(1);
    const auto modes = build_mode_set(ball, 1);
    for (double g : {0.01, 1.0, 40.0}) {
        const KernelFamily fam(ball, coulomb(g), 1);
        const auto c = creation_on_vacuum(modes, fam);
        long double theta2 = 0.0L;
        for (const auto& [m, v] : c) theta2 += v * v;
        const long double theta = std::sqrt(theta2);
        for (int cap : {4, 6}) {
            const auto S = build_generator(modes, fam, cap);
            CHECK(S.basis.size() == c.size() + 1);
            for (double lam : {0.3, 1.0}) {
                const auto st = apply_exp_generator(S, lam, 1e-20);
                double worst = std::abs(st.amplitudes[0] - static_cast<double>(std::cos(lam * theta)));
                for (const auto& [m, v] : c)
                    worst = std::max(worst, std::abs(amplitude(st, m) - static_cast<double>(std::sin(lam * theta) * v / theta)));
                CHECK(worst <= 1e-12);
                CHECK(st.norm_deviation <= 1e-12);
                CHECK(st.truncation_error <= 1e-20);
            }
        }
    }
}

TEST_CASE("λ = 0 returns the vacuum exactly; bad arguments are refused") {
    const FermiBall ball(1);
    const auto modes = build_mode_set(ball, 1);
    const KernelFamily fam(ball, coulomb(1.0), 1);
    const auto S = build_generator(modes, fam, 4);
    const auto st = apply_exp_generator(S, 0.0, 1e-20);
    CHECK(st.amplitudes[0] == 1.0);
    CHECK(st.amplitudes.tail(st.amplitudes.size() - 1).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(apply_exp_generator(S, 0.5, 0.0), InvalidArgument);
    CHECK_THROWS_AS(apply_exp_generator(S, 1.5, 1e-12), InvalidArgument);
    CHECK_THROWS_AS(build_generator(modes, fam, 5), InvalidArgument);
    CHECK_THROWS_AS(number_moment(st, 0), InvalidArgument);
    CHECK_THROWS_AS(number_moment(st, 6), InvalidArgument);
    CHECK_THROWS_AS(bootstrap_sup({}, modes), InvalidArgument);
}

TEST_CASE("flow invariants on the default desk configuration") {
    const FermiBall ball(1);
    const auto modes = build_mode_set(ball, 1);
    const KernelFamily fam(ball, coulomb(1.0), 1);
    const auto S4 = build_generator(modes, fam, 4);
    const auto S6 = build_generator(modes, fam, 6);
    double max4 = 0.0, max6 = 0.0;
    std::vector<FockStateVector> states;
    for (double lam : kGrid) {
        const auto a = apply_exp_generator(S4, lam, 1e-20);
        const auto b = apply_exp_generator(S6, lam, 1e-20);
        CHECK(a.norm_deviation <= 1e-12);
        max4 = std::max(max4, number_moment(a, 2));
        max6 = std::max(max6, number_moment(b, 2));
        const auto [particles, holes] = particle_hole_totals(b, modes, ball);
        CHECK(std::abs(particles - holes) <= 1e-10);
        for (const auto& q : modes.modes) {
            const double v = occupation_expectation(b, modes, ball, q).value;
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            const double w = occupation_expectation(a, modes, ball, q).value;
            CHECK(std::abs(v - w) <= 0.01 * std::max(std::abs(v), 1e-300));
            if (modes.index_of(-q)) CHECK(std::abs(v - occupation_expectation(b, modes, ball, -q).value) <= 1e-12);
        }
        states.push_back(b);
    }
    CHECK(max6 <= 20.0);
    CHECK(std::abs(max6 - max4) <= 0.01 * max4);

    // bootstrap sup grows with the grid
    const double coarse = bootstrap_sup({states[0], states[5], states[10]}, modes);
    const double fine = bootstrap_sup(states, modes);
    CHECK(fine >= coarse);

    // first derivative at λ = 0 vanishes
    const double h = 1e-4;
    const auto eps = apply_exp_generator(S6, h, 1e-20);
    const auto zero = apply_exp_generator(S6, 0.0, 1e-20);
    for (int m = 0; m < static_cast<int>(modes.size()); ++m)
        CHECK(std::abs(raw_occupation(eps, m) - raw_occupation(zero, m)) / h <= 1e-6);
}

TEST_CASE("bootstrap quantity is second order in the coupling") {
    const FermiBall ball(1);
    const auto modes = build_mode_set(ball, 1);
    auto xi = [&](double s) {
        const KernelFamily fam(ball, coulomb(s), 1);
        const auto S = build_generator(modes, fam, 6);
        std::vector<FockStateVector> states;
        for (double lam : kGrid) states.push_back(apply_exp_generator(S, lam, 1e-20));
        return bootstrap_sup(states, modes);
    };
    const double sl = slope(1e-3, xi(1e-3), 1e-2, xi(1e-2));
    CHECK(std::abs(sl - 2.0) <= 0.1);
}

TEST_CASE("resource guards and missing modes") {
    const FermiBall ball(1);
    const auto modes = build_mode_set(ball, 1);
    const KernelFamily fam(ball, coulomb(1.0), 1);
    CHECK_THROWS_AS(build_generator(modes, fam, 6, 10), ResourceLimitError);

    const auto wide = build_mode_set(FermiBall(2), 4);
    REQUIRE(wide.size() > 64);
    CHECK_THROWS_AS(build_generator(wide, KernelFamily(FermiBall(2), coulomb(1.0), 4), 4), ResourceLimitError);

    ModeSet cut = modes;
    const Momentum dropped = cut.modes.back();
    cut.modes.pop_back();
    cut.index.erase(dropped);
    try {
        build_generator(cut, fam, 4);
        FAIL("expected InvalidArgument");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find(dropped.str()) != std::string::npos);
    }
}

TEST_CASE("oracle run: zero potential has zero residuals, weak coupling has small ones") {
    const FermiBall ball(1);
    const auto zero = run_oracle(ball, zero_potential(), 1, 4, 1e-20, kGrid, 100000);
    for (const auto& row : zero.rows) {
        CHECK(row.residual == 0.0);
        CHECK(row.residual_minus == 0.0);
    }
    CHECK(zero.xi == 0.0);

    const auto run = run_oracle(ball, coulomb(1e-2), 1, 4, 1e-20, kGrid, 100000, {{1, 1, 0}, {2, 0, 0}, {0, 0, 1}});
    REQUIRE(run.rows.size() == 3);
    for (const auto& row : run.rows) {
        CHECK(std::abs(row.residual) < row.n_rpa_trunc);
        if (row.n_ex_trunc > 0.0) CHECK(std::abs(row.residual_minus) < std::abs(row.residual));
    }
    CHECK(run.moments.size() == kGrid.size());
    CHECK(run.moments.front().moment[0] == 1.0);
}
