#pragma once

// Exact reference on a truncated fermionic Fock space. Modes are the particle momenta of all
// lenses with |l|² ≤ cutoff together with their hole partners; configurations are bitmasks over
// the mode list, and fermionic signs come from the parity of occupied modes below the acted index.
//
// S = ½ Σ_l Σ_{r,s} K(l)_{r,s} (b_r(l) b_{−s}(−l) − b*_{−s}(−l) b*_r(l)),  b*_p(l) = a*_p a*_{p−l}.

#include <Eigen/SparseCore>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "fermigas/kernel.hpp"
#include "fermigas/lattice.hpp"
#include "fermigas/observables.hpp"

namespace fermigas {

inline constexpr std::size_t kMaxModes = 64;

struct ModeSet {
    std::vector<Momentum> modes;  // canonical order
    std::unordered_map<Momentum, int, MomentumHash> index;
    std::int64_t shift_cutoff = 0;
    std::size_t n_particle_modes = 0;
    std::size_t n_hole_modes = 0;

    std::size_t size() const noexcept { return modes.size(); }
    std::optional<int> index_of(const Momentum& p) const;
};

// Throws InvalidArgument for cutoff < 1.
ModeSet build_mode_set(const FermiBall& ball, std::int64_t shift_cutoff);

struct GeneratorMatrix {
    std::vector<std::uint64_t> basis;             // configurations; basis[0] is the vacuum
    Eigen::SparseMatrix<double, Eigen::RowMajor> S;  // antisymmetric
    std::size_t nonzeros = 0;
    std::size_t lens_terms = 0;  // nonzero K(l)_{r,s} entries used
    int particle_cap = 0;
    double norm_bound = 0.0;  // max absolute row sum, bounds ‖S‖₂
};

// Basis = closure of the vacuum under the creation and annihilation terms of S within popcount ≤ cap.
// Throws InvalidArgument for odd or negative cap or a lens point missing from the modes,
// ResourceLimitError when the mode count exceeds 64 or the basis exceeds max_basis.
GeneratorMatrix build_generator(const ModeSet& modes, const KernelFamily& kernels, int particle_cap,
                                std::size_t max_basis = 2'000'000);

struct FockStateVector {
    std::vector<std::uint64_t> basis;
    Eigen::VectorXd amplitudes;
    int particle_cap = 0;
    double truncation_error = 0.0;  // a-posteriori bound on the 2-norm error of the exponential action
    double norm_deviation = 0.0;    // | ‖ξ‖ − 1 |
};

FockStateVector vacuum_state(const GeneratorMatrix& S);

// e^{−λS}Ω by a Taylor series in substeps with ‖λS/steps‖ ≤ 1; the remainder of each
// step is bounded geometrically. Throws ConvergenceError if the bound stays above tol.
FockStateVector apply_exp_generator(const GeneratorMatrix& S, double lambda, double tol);

struct Occupation {
    double value = 0.0;
    bool in_modes = false;  // false: q untouched by the truncated S, free value returned
};

// n(q) in the particle–hole picture: ⟨a*_q a_q⟩ outside the ball, 1 − ⟨a*_q a_q⟩ inside.
Occupation occupation_expectation(const FockStateVector& state, const ModeSet& modes, const FermiBall& ball,
                                  const Momentum& q);

// Raw ⟨a*_m a_m⟩ for mode index m.
double raw_occupation(const FockStateVector& state, int mode);

// ⟨(N + 1)^m⟩, m ∈ {1, …, 5}.
double number_moment(const FockStateVector& state, int m);

// max over states and modes of the raw occupation.
double bootstrap_sup(const std::vector<FockStateVector>& states, const ModeSet& modes);

// Σ over particle modes and Σ over hole modes of the raw occupations.
std::pair<double, double> particle_hole_totals(const FockStateVector& state, const ModeSet& modes,
                                               const FermiBall& ball);

// Exact oracle against the analytic terms recomputed on the same truncated family (|l|² ≤ cutoff).
struct OracleRow {
    Momentum q{};
    bool inside_ball = false;
    double n_exact = 0.0;
    double n_rpa_trunc = 0.0;
    double n_ex_trunc = 0.0;     // ¼ n^{ex,1} with the truncated kernels
    double residual = 0.0;       // n_exact − (n_rpa + n_ex) outside, n_exact − (1 − n_rpa − n_ex) inside
    double residual_minus = 0.0; // same with the opposite exchange sign
};

struct OracleMoments {
    double lambda = 0.0;
    double moment[5] = {};  // ⟨(N+1)^m⟩, m = 1..5
    double norm_deviation = 0.0;
    double particle_hole_gap = 0.0;
};

struct OracleRun {
    ModeSet modes;
    std::size_t dim = 0;
    std::size_t nnz = 0;
    int cap = 0;
    double tol = 0.0;
    std::vector<OracleRow> rows;
    std::vector<OracleMoments> moments;  // one per λ-grid point
    double xi = 0.0;
    double max_truncation_error = 0.0;
};

// qs empty: every mode of the truncated mode set.
OracleRun run_oracle(const FermiBall& ball, const PotentialSpec& spec, std::int64_t cutoff, int cap, double tol,
                     const std::vector<double>& lambda_grid, std::size_t max_basis,
                     const std::vector<Momentum>& qs = {});

}  // namespace fermigas
