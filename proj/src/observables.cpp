#include "fermigas/observables.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <unordered_map>

#include "fermigas/errors.hpp"
#include "fermigas/parallel.hpp"

namespace fermigas {

namespace {

Momentum lens_point(bool inside, const Momentum& q, const Momentum& shift) { return inside ? q + shift : q; }

double sum_breakdown(const std::vector<std::pair<Momentum, double>>& parts) {
    double acc = 0.0;
    for (const auto& [l, v] : parts) acc += v;
    return acc;
}

}  // namespace

RpaResult n_rpa_matrix(const KernelFamily& kernels, const Momentum& q) {
    const auto& ball = kernels.ball();
    RpaResult res;
    res.q = q;
    res.inside_ball = ball.contains(q);
    res.route = RpaRoute::matrix;
    const auto shifts = relevant_shifts(ball, q, kernels.window());
    kernels.prebuild(shifts);
    for (const auto& l : shifts) {
        const auto k = kernels.get(l);
        const Momentum p = lens_point(res.inside_ball, q, l);
        if (k->empty() || !k->lens.contains(p)) continue;
        res.per_shift_breakdown.emplace_back(l, 0.5 * cosh_diag_minus_one(*k, p));
    }
    res.n_rpa = sum_breakdown(res.per_shift_breakdown);
    return res;
}

double rpa_integral_term(const LensData& lens, double g, const Momentum& p, const QuadratureConfig& cfg) {
    const auto idx = lens.index_of(p);
    if (!idx) throw InvalidArgument("momentum " + p.str() + " is not in the lens of shift " + lens.shift().str());
    if (g == 0.0) return 0.0;
    const double lq = lens.lambdas()[*idx].value();
    const double lq2 = lq * lq;

    // λ takes few distinct half-integer values; weight them by multiplicity.
    std::map<std::int64_t, int> histogram;
    for (const auto& lam : lens.lambdas()) ++histogram[lam.twice];
    std::vector<std::pair<double, double>> levels;
    levels.reserve(histogram.size());
    for (const auto& [twice, count] : histogram) levels.emplace_back(0.5 * static_cast<double>(twice), count);

    // g (t²−λ_q²)(t²+λ_q²)^{-2} [1/(1+2gΣ) − 1] = −2g² (t²−λ_q²)(t²+λ_q²)^{-2} Σ/(1+2gΣ); the dropped
    // term g (t²−λ_q²)(t²+λ_q²)^{-2} = g d/dt[−t/(t²+λ_q²)] integrates to zero on [0, ∞).
    auto integrand = [&](double t) {
        const double t2 = t * t;
        double sigma = 0.0;
        for (const auto& [lam, mult] : levels) sigma += mult * lam / (t2 + lam * lam);
        const double den = t2 + lq2;
        return -2.0 * g * g * (t2 - lq2) / (den * den) * sigma / (1.0 + 2.0 * g * sigma);
    };
    const auto r = integrate_half_line(integrand, cfg);
    if (!r.converged)
        throw ConvergenceError("t-integral did not converge for shift " + lens.shift().str() + " (error " +
                                   std::to_string(r.error) + ")",
                               r.error, lens.shift());
    return r.value / std::numbers::pi;
}

RpaResult n_rpa_integral(const FermiBall& ball, const PotentialSpec& spec, const Momentum& q,
                         const QuadratureConfig& cfg, std::optional<std::int64_t> max_shift_norm2) {
    cfg.validate();
    RpaResult res;
    res.q = q;
    res.inside_ball = ball.contains(q);
    res.route = RpaRoute::integral;
    const auto shifts = relevant_shifts(ball, q, max_shift_norm2);
    std::vector<double> parts(shifts.size(), 0.0);
    std::vector<char> present(shifts.size(), 0);
    parallel_for(shifts.size(), [&](std::size_t i) {
        const auto& l = shifts[i];
        const Momentum p = lens_point(res.inside_ball, q, l);
        const LensData lens = build_lens(ball, l);
        if (!lens.contains(p)) return;
        present[i] = 1;
        parts[i] = rpa_integral_term(lens, coupling_g(ball, spec, l), p, cfg);
    });
    for (std::size_t i = 0; i < shifts.size(); ++i)
        if (present[i]) res.per_shift_breakdown.emplace_back(shifts[i], parts[i]);
    res.n_rpa = sum_breakdown(res.per_shift_breakdown);
    return res;
}

RpaResult n_rpa_series(const KernelFamily& kernels, const Momentum& q, int order) {
    if (order < 2 || order % 2 != 0) throw InvalidArgument("series order must be an even integer ≥ 2");
    const auto& ball = kernels.ball();
    RpaResult res;
    res.q = q;
    res.inside_ball = ball.contains(q);
    res.route = RpaRoute::series;
    res.series_order = order;
    const auto shifts = relevant_shifts(ball, q, kernels.window());
    kernels.prebuild(shifts);
    for (const auto& l : shifts) {
        const auto k = kernels.get(l);
        const Momentum p = lens_point(res.inside_ball, q, l);
        if (k->empty() || !k->lens.contains(p)) continue;
        const auto i = static_cast<Eigen::Index>(k->index(p));
        Eigen::VectorXd x = Eigen::VectorXd::Zero(k->K.rows());
        x[i] = 1.0;
        double factorial = 1.0;
        double acc = 0.0;
        for (int m = 1; m <= order; ++m) {
            x = 2.0 * (k->K * x);
            factorial *= m;
            if (m % 2 == 0) acc += x[i] / factorial;
        }
        res.per_shift_breakdown.emplace_back(l, 0.5 * acc);
    }
    res.n_rpa = sum_breakdown(res.per_shift_breakdown);
    return res;
}

ExchangeResult n_exchange(const KernelFamily& kernels, const Momentum& q) {
    const auto& ball = kernels.ball();
    const auto& spec = kernels.potential();
    const bool inside = ball.contains(q);
    ExchangeResult res;
    res.q = q;

    // Pairs (l, s) with p, s ∈ L_l and l1 = p + s − l; then p, s ∈ L_{l1} hold automatically.
    // For q outside, p = q and the l run over q − B_F; for q inside, p = q + l.
    const auto shifts = relevant_shifts(ball, q, kernels.window());
    std::unordered_map<Momentum, std::shared_ptr<const KernelData>, MomentumHash> local;
    auto kernel = [&](const Momentum& l) -> const KernelData& {
        auto it = local.find(l);
        if (it == local.end()) it = local.emplace(l, kernels.get(l)).first;
        return *it->second;
    };

    std::vector<Momentum> partners;
    for (const auto& l : shifts) {
        const Momentum p = lens_point(inside, q, l);
        for (const auto& k1 : ball.points()) {
            const Momentum s = l - k1;
            if (ball.contains(s)) continue;
            const Momentum l1 = p + s - l;
            if (kernels.admits(l1)) partners.push_back(l1);
        }
    }
    std::vector<Momentum> needed = shifts;
    needed.insert(needed.end(), partners.begin(), partners.end());
    kernels.prebuild(needed);

    for (const auto& l : shifts) {
        const Momentum p = lens_point(inside, q, l);
        const KernelData& kl = kernel(l);
        if (kl.empty() || !kl.lens.contains(p)) continue;
        const double g = coupling_g(ball, spec, l);
        const auto ip = static_cast<Eigen::Index>(kl.index(p));
        const double lam_p = pair_energy(l, p).value();
        for (const auto& k1 : ball.points()) {
            const Momentum s = l - k1;
            if (ball.contains(s)) continue;
            const Momentum l1 = p + s - l;
            if (!kernels.admits(l1)) continue;
            const KernelData& kl1 = kernel(l1);
            const double g1 = coupling_g(ball, spec, l1);
            const double lead = g / (lam_p + pair_energy(l, s).value()) * g1 /
                                (pair_energy(l1, p).value() + pair_energy(l1, s).value());
            const auto is = static_cast<Eigen::Index>(kl.index(s));
            const double full = kl.K(ip, is) * kl1.K(static_cast<Eigen::Index>(kl1.index(p)),
                                                     static_cast<Eigen::Index>(kl1.index(s)));
            res.n_ex += lead;
            res.n_ex_m1 += full;
        }
    }
    res.difference = res.n_ex - res.n_ex_m1;
    return res;
}

MomentumDistribution momentum_distribution(const KernelFamily& kernels, const Momentum& q, bool include_exchange,
                                           ExchangeSign sign) {
    MomentumDistribution out;
    out.inside_ball = kernels.ball().contains(q);
    out.n_rpa = n_rpa_matrix(kernels, q).n_rpa;
    if (include_exchange) out.n_ex = n_exchange(kernels, q).n_ex;
    const double ex = sign == ExchangeSign::plus ? out.n_ex : -out.n_ex;
    out.n = out.inside_ball ? 1.0 - out.n_rpa - ex : out.n_rpa + ex;
    constexpr double eps = 1e-9;
    if (!(out.n >= -eps && out.n <= 1.0 + eps))
        throw InvariantViolation("momentum distribution at " + q.str() + " left [0, 1]: " + std::to_string(out.n));
    return out;
}

double continuum_screening(double v_hat, double mu) {
    constexpr double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
    double bracket = 0.0;
    if (mu > 4.0) {
        // 1 − μ arctan(1/μ) = Σ_{k≥1} (−1)^{k+1} / ((2k+1) μ^{2k})
        const double x = 1.0 / (mu * mu);
        double term = x;
        for (int k = 1; k < 40; ++k) {
            bracket += (k % 2 == 1 ? 1.0 : -1.0) * term / (2.0 * k + 1.0);
            term *= x;
        }
    } else {
        bracket = 1.0 - mu * std::atan(1.0 / mu);
    }
    return v_hat / four_pi2 * bracket;
}

double n_rpa_continuum(const PotentialSpec& spec, double kf, const std::array<double, 3>& q_direction,
                       double q_radius, const QuadratureConfig& cfg) {
    cfg.validate();
    const double dnorm = std::sqrt(q_direction[0] * q_direction[0] + q_direction[1] * q_direction[1] +
                                   q_direction[2] * q_direction[2]);
    if (!(dnorm > 0.0)) throw InvalidArgument("continuum direction must be nonzero");
    if (!(kf > 0.0)) throw InvalidArgument("continuum k_F must be positive");
    if (!(q_radius > kf)) throw InvalidArgument("continuum formula needs |q| > k_F");
    if (!spec.is_radial()) throw InvalidArgument("continuum formula needs a radial potential");

    const double two_pi = 2.0 * std::numbers::pi;
    const double prefactor = 2.0 * std::numbers::pi / (kf * kf * std::pow(two_pi, 4));
    QuadratureConfig inner{cfg.abs_tol * 1e-3, cfg.rel_tol * 1e-2, cfg.max_subdivisions};
    QuadratureConfig middle{cfg.abs_tol * 1e-2, cfg.rel_tol * 1e-1, cfg.max_subdivisions};

    auto check = [](const QuadratureResult& r, const char* what) {
        if (!r.converged)
            throw ConvergenceError(std::string("continuum quadrature did not converge (") + what + ")", r.error);
        return r.value;
    };

    auto mu_integral = [&](double c, double v) {
        if (v == 0.0) return 0.0;
        const double c2 = c * c;
        auto f = [&](double mu) {
            const double m2 = mu * mu;
            const double qv = continuum_screening(v, mu);
            const double den = m2 + c2;
            return -(m2 - c2) / (den * den) * qv / (1.0 + qv);
        };
        return check(integrate_half_line(f, inner), "mu");
    };

    const double Q = q_radius;
    auto rho_integrand = [&](double rho) {
        const double c0 = std::clamp((Q * Q + rho * rho - kf * kf) / (2.0 * Q * rho), -1.0, 1.0);
        if (c0 >= 1.0) return 0.0;
        const double v = spec.evaluate_radial(rho);
        auto cos_integrand = [&](double c) { return mu_integral(std::abs(c), v); };
        const double angular = check(integrate(cos_integrand, c0, 1.0, middle), "cos");
        return rho * v * angular;  // ρ² · V̂/ρ
    };
    const double outer = check(integrate(rho_integrand, Q - kf, Q + kf, cfg), "rho");
    return prefactor * outer;
}

}  // namespace fermigas
