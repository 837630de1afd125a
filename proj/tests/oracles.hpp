#pragma once

// Reference computations used only by the tests. Each one takes a different road from the
// library: brute-force scans, long-double iterations, power series, literal double sums.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <vector>

#include "fermigas/lattice.hpp"

namespace oracle {

using fermigas::Momentum;
using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

inline std::vector<Momentum> cube_scan(std::int64_t shell_cap) {
    std::vector<Momentum> out;
    const int r = static_cast<int>(std::sqrt(static_cast<double>(shell_cap))) + 1;
    for (int x = -r; x <= r; ++x)
        for (int y = -r; y <= r; ++y)
            for (int z = -r; z <= r; ++z)
                if (std::int64_t{x} * x + std::int64_t{y} * y + std::int64_t{z} * z <= shell_cap) out.push_back({x, y, z});
    return out;
}

inline std::int64_t min_outside(std::int64_t shell_cap) {
    for (std::int64_t n = shell_cap + 1;; ++n) {
        const int r = static_cast<int>(std::sqrt(static_cast<double>(n))) + 1;
        for (int x = 0; x <= r; ++x)
            for (int y = 0; y <= r; ++y)
                for (int z = 0; z <= r; ++z)
                    if (std::int64_t{x} * x + std::int64_t{y} * y + std::int64_t{z} * z == n) return n;
    }
}

inline bool in_ball(std::int64_t shell_cap, const Momentum& p) { return p.norm2() <= shell_cap; }

// L_l = {p : |p|² > cap, |p − l|² ≤ cap}, found by scanning a box around l.
inline std::vector<Momentum> lens_scan(std::int64_t shell_cap, const Momentum& l) {
    std::vector<Momentum> out;
    const int r = static_cast<int>(std::sqrt(static_cast<double>(shell_cap))) + 1;
    for (int x = l.x - r; x <= l.x + r; ++x)
        for (int y = l.y - r; y <= l.y + r; ++y)
            for (int z = l.z - r; z <= l.z + r; ++z) {
                const Momentum p{x, y, z};
                if (!in_ball(shell_cap, p) && in_ball(shell_cap, p - l)) out.push_back(p);
            }
    std::sort(out.begin(), out.end(), fermigas::CanonicalLess{});
    return out;
}

inline long double lambda(const Momentum& l, const Momentum& p) {
    return 0.5L * static_cast<long double>(p.norm2() - (p - l).norm2());
}

// Denman–Beavers iteration for the principal square root of an SPD matrix.
inline MatL sqrt_db(const MatL& a) {
    const auto n = a.rows();
    MatL y = a;
    MatL z = MatL::Identity(n, n);
    for (int it = 0; it < 100; ++it) {
        const MatL yi = y.inverse();
        const MatL zi = z.inverse();
        const MatL y_next = 0.5L * (y + zi);
        z = 0.5L * (z + yi);
        const long double change = (y_next - y).cwiseAbs().maxCoeff();
        y = y_next;
        if (change <= 1e-19L * y.cwiseAbs().maxCoeff()) break;
    }
    return 0.5L * (y + y.transpose());
}

// log A for SPD A near the identity: inverse scaling and squaring, then the Mercator series.
inline MatL log_spd(MatL a) {
    const auto n = a.rows();
    int k = 0;
    while ((a - MatL::Identity(n, n)).cwiseAbs().rowwise().sum().maxCoeff() > 0.1L) {
        a = sqrt_db(a);
        ++k;
    }
    const MatL x = a - MatL::Identity(n, n);
    MatL term = x;
    MatL sum = x;
    for (int j = 2; j < 80; ++j) {
        term = term * x;
        sum += ((j % 2 == 0) ? -1.0L : 1.0L) / j * term;
        if (term.cwiseAbs().maxCoeff() < 1e-22L) break;
    }
    return std::ldexp(1.0L, k) * sum;
}

// K = −½ log(h^{-1/2} (h^{1/2}(h + 2g 11ᵀ)h^{1/2})^{1/2} h^{-1/2}).
inline MatL kernel(const std::vector<long double>& lam, long double g) {
    const auto n = static_cast<Eigen::Index>(lam.size());
    MatL h = MatL::Zero(n, n), hs = MatL::Zero(n, n), his = MatL::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        h(i, i) = lam[i];
        hs(i, i) = std::sqrt(lam[i]);
        his(i, i) = 1.0L / std::sqrt(lam[i]);
    }
    const MatL p = MatL::Constant(n, n, g);
    const MatL inner = hs * (h + 2.0L * p) * hs;
    const MatL e = his * sqrt_db(0.5L * (inner + inner.transpose())) * his;
    return -0.5L * log_spd(0.5L * (e + e.transpose()));
}

// (cosh 2K − 1) by its power series.
inline MatL cosh_minus_one(const MatL& k) {
    const auto n = k.rows();
    const MatL two_k2 = 4.0L * k * k;
    MatL term = MatL::Identity(n, n);
    MatL sum = MatL::Zero(n, n);
    for (int m = 1; m < 60; ++m) {
        term = term * two_k2 / ((2.0L * m - 1) * (2.0L * m));
        sum += term;
        if (term.cwiseAbs().maxCoeff() < 1e-30L) break;
    }
    return sum;
}

// Literal transcription of the exchange double sum: scan l, l1 in a box and test the four indicators.
// With leading = true the kernel factors are g/(λ+λ); otherwise the supplied kernels are used.
template <class KernelLookup>
long double exchange_scan(std::int64_t shell_cap, const Momentum& q, int box, long double kf,
                          long double (*vhat)(const Momentum&), KernelLookup&& kernel_entry, bool leading) {
    const long double pref = 1.0L / (2.0L * std::pow(2.0L * std::numbers::pi_v<long double>, 3));
    auto in_lens = [&](const Momentum& l, const Momentum& p) { return !in_ball(shell_cap, p) && in_ball(shell_cap, p - l); };
    long double acc = 0.0L;
    for (int a = -box; a <= box; ++a)
        for (int b = -box; b <= box; ++b)
            for (int c = -box; c <= box; ++c) {
                const Momentum l{a, b, c};
                if (l.is_zero() || !in_lens(l, q)) continue;
                for (int d = -box; d <= box; ++d)
                    for (int e = -box; e <= box; ++e)
                        for (int f = -box; f <= box; ++f) {
                            const Momentum l1{d, e, f};
                            if (l1.is_zero() || !in_lens(l1, q)) continue;
                            const Momentum t = -q + l + l1;
                            if (!in_lens(l, t) || !in_lens(l1, t)) continue;
                            if (leading) {
                                const long double g = vhat(l) * pref / kf;
                                const long double g1 = vhat(l1) * pref / kf;
                                acc += g / (lambda(l, q) + lambda(l, t)) * g1 / (lambda(l1, q) + lambda(l1, t));
                            } else {
                                acc += kernel_entry(l, q, t) * kernel_entry(l1, q, t);
                            }
                        }
            }
    return acc;
}

// Random SPD matrix with eigenvalues in [lo, hi].
inline Eigen::MatrixXd random_spd(int n, std::mt19937_64& rng, double lo = 0.5, double hi = 3.0) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uni(lo, hi);
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    const Eigen::MatrixXd q = qr.householderQ();
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d[i] = uni(rng);
    return q * d.asDiagonal() * q.transpose();
}

// Fermion state as a sorted list of occupied modes; a*_m inserts m and picks up (−1)^{#modes before m}.
struct Config {
    std::vector<int> occupied;
    long double sign = 1.0L;
};

inline bool create(Config& c, int m) {
    auto it = std::lower_bound(c.occupied.begin(), c.occupied.end(), m);
    if (it != c.occupied.end() && *it == m) return false;
    if ((it - c.occupied.begin()) % 2) c.sign = -c.sign;
    c.occupied.insert(it, m);
    return true;
}

// Continuum formula by a fixed composite Simpson rule on (ρ, cos θ, φ) with μ = tan φ.
inline double continuum_simpson(double (*vhat_radial)(double), double kf, double q_radius, int n) {
    constexpr double pi = std::numbers::pi;
    auto screening = [](double v, double mu) {
        const double bracket = mu > 50.0 ? 1.0 / (3 * mu * mu) - 1.0 / (5 * std::pow(mu, 4)) : 1.0 - mu * std::atan(1.0 / mu);
        return v / (4 * pi * pi) * bracket;
    };
    auto simpson = [n](auto&& f, double a, double b) {
        const int m = 2 * n;
        const double h = (b - a) / m;
        double s = f(a) + f(b);
        for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
        return s * h / 3.0;
    };
    const double Q = q_radius;
    auto rho_f = [&](double rho) {
        if (rho <= 0) return 0.0;
        const double c0 = std::clamp((Q * Q + rho * rho - kf * kf) / (2 * Q * rho), -1.0, 1.0);
        if (c0 >= 1.0) return 0.0;
        const double v = vhat_radial(rho);
        auto c_f = [&](double c) {
            auto phi_f = [&](double phi) {
                if (phi >= pi / 2) return 0.0;
                const double mu = std::tan(phi);
                const double jac = 1.0 / (std::cos(phi) * std::cos(phi));
                const double s = screening(v, mu);
                return (mu * mu - c * c) / std::pow(mu * mu + c * c, 2) * (1.0 / (1.0 + s) - 1.0) * jac;
            };
            return simpson(phi_f, 0.0, pi / 2);
        };
        return rho * v * simpson(c_f, c0, 1.0);
    };
    const double pref = 2 * pi / (kf * kf * std::pow(2 * pi, 4));
    return pref * simpson(rho_f, Q - kf, Q + kf);
}

}  // namespace oracle
