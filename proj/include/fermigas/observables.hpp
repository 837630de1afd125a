#pragma once

// Momentum-distribution observables of the bosonized trial state:
//   n^RPA(q) by three routes (cosh of the kernel, the scalar t-integral, the truncated cosh series),
//   the exchange term n^ex(q) with its kernel counterpart ¼ n^{ex,1}(q),
//   the combined n(q), and the formal continuum-limit integral.

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "fermigas/kernel.hpp"
#include "fermigas/lattice.hpp"
#include "fermigas/potential.hpp"
#include "fermigas/quadrature.hpp"

namespace fermigas {

enum class RpaRoute { matrix, integral, series };

struct RpaResult {
    Momentum q{};
    bool inside_ball = false;
    double n_rpa = 0.0;
    RpaRoute route = RpaRoute::matrix;
    int series_order = 0;  // only for RpaRoute::series
    std::vector<std::pair<Momentum, double>> per_shift_breakdown;
};

struct ExchangeResult {
    Momentum q{};
    double n_ex = 0.0;     // leading-kernel double sum
    double n_ex_m1 = 0.0;  // ¼ n^{ex,1}(q), same double sum with the assembled kernels
    double difference = 0.0;
};

// ½ Σ_l 1_{L_l}(q) (cosh 2K(l) − 1)_{q,q}; for q ∈ B_F the lens point is q + l.
// Shifts come from relevant_shifts restricted to the family window.
RpaResult n_rpa_matrix(const KernelFamily& kernels, const Momentum& q);

// (1/π) ∫_0^∞ g (t² − λ_q²)(t² + λ_q²)^{-2} / (1 + 2g Σ_p λ_p (t² + λ_p²)^{-1}) dt per shift.
// The O(g) part of the integrand integrates to zero and is removed algebraically before quadrature.
RpaResult n_rpa_integral(const FermiBall& ball, const PotentialSpec& spec, const Momentum& q,
                         const QuadratureConfig& cfg = {},
                         std::optional<std::int64_t> max_shift_norm2 = std::nullopt);

// One shift of the integral route, for a lens point p with energy λ_p and coupling g.
double rpa_integral_term(const LensData& lens, double g, const Momentum& p, const QuadratureConfig& cfg);

// ½ Σ_l Σ_{m even, 2 ≤ m ≤ order} ((2K)^m)_{q,q} / m!.
RpaResult n_rpa_series(const KernelFamily& kernels, const Momentum& q, int order);

ExchangeResult n_exchange(const KernelFamily& kernels, const Momentum& q);

// Sign with which n^ex enters n(q): plus gives n^RPA + n^ex outside the ball (1 − n^RPA − n^ex inside),
// minus gives n^RPA − n^ex (1 − n^RPA + n^ex). The exact Fock-space state follows minus; see README.
enum class ExchangeSign { plus, minus };

struct MomentumDistribution {
    double n = 0.0;
    double n_rpa = 0.0;
    double n_ex = 0.0;
    bool inside_ball = false;
};

// n(q) = n^RPA ± n^ex outside the ball, 1 − n^RPA ∓ n^ex inside. Throws InvariantViolation when the
// result leaves [−1e-9, 1 + 1e-9].
MomentumDistribution momentum_distribution(const KernelFamily& kernels, const Momentum& q, bool include_exchange,
                                           ExchangeSign sign = ExchangeSign::plus);

// Q_l(μ) = V̂(l)(2π)^{-2}(1 − μ arctan(1/μ)).
double continuum_screening(double v_hat, double mu);

// k_F^{-2}(2π)^{-4} ∫ d³l 1[|q−l| ≤ k_F] V̂(l)/|l| ∫_0^∞ dμ (μ² − c²)(μ² + c²)^{-2} / (1 + Q_l(μ)),
// c = |l̂·q̂|, reduced to (|l|, cos θ, μ) by axial symmetry about q̂.
double n_rpa_continuum(const PotentialSpec& spec, double kf, const std::array<double, 3>& q_direction,
                       double q_radius, const QuadratureConfig& cfg = {1e-13, 1e-8, 4000});

}  // namespace fermigas
