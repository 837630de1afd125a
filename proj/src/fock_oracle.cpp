#include "fermigas/fock_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <string>

#include "fermigas/errors.hpp"

namespace fermigas {

std::optional<int> ModeSet::index_of(const Momentum& p) const {
    const auto it = index.find(p);
    if (it == index.end()) return std::nullopt;
    return it->second;
}

ModeSet build_mode_set(const FermiBall& ball, std::int64_t shift_cutoff) {
    if (shift_cutoff < 1) throw InvalidArgument("shift_cutoff must be at least 1");
    std::set<Momentum, CanonicalLess> particles;
    std::set<Momentum, CanonicalLess> holes;
    for (const auto& l : shifts_up_to(shift_cutoff)) {
        const LensData lens = build_lens(ball, l);
        for (const auto& p : lens.points()) {
            particles.insert(p);
            holes.insert(p - l);
        }
    }
    ModeSet out;
    out.shift_cutoff = shift_cutoff;
    out.n_particle_modes = particles.size();
    out.n_hole_modes = holes.size();
    std::set<Momentum, CanonicalLess> all = particles;
    all.insert(holes.begin(), holes.end());
    out.modes.assign(all.begin(), all.end());
    for (std::size_t i = 0; i < out.modes.size(); ++i) out.index.emplace(out.modes[i], static_cast<int>(i));
    return out;
}

namespace {

struct Term {
    double coeff;
    int m[4];  // applied in this order: a*_{m[0]} first
    std::uint64_t mask;
};

// Applies a*_m0 ... a*_m3 (m0 first). Returns false when a mode is already occupied.
bool create(std::uint64_t& state, const Term& t, double& sign) {
    if (state & t.mask) return false;
    double s = 1.0;
    for (int m : t.m) {
        const std::uint64_t below = (std::uint64_t{1} << m) - 1;
        if (std::popcount(state & below) % 2) s = -s;
        state |= std::uint64_t{1} << m;
    }
    sign = s;
    return true;
}

}  // namespace

GeneratorMatrix build_generator(const ModeSet& modes, const KernelFamily& kernels, int particle_cap,
                                std::size_t max_basis) {
    if (particle_cap < 0 || particle_cap % 2 != 0)
        throw InvalidArgument("particle_cap must be a nonnegative even integer");
    if (modes.size() > kMaxModes)
        throw ResourceLimitError("mode set has " + std::to_string(modes.size()) + " modes, the bitmask limit is 64");

    auto mode = [&](const Momentum& p) {
        const auto i = modes.index_of(p);
        if (!i) throw InvalidArgument("lens point " + p.str() + " is missing from the mode set");
        return *i;
    };

    // Creation part C = ½ Σ K(l)_{r,s} a*_{−s} a*_{−s+l} a*_r a*_{r−l}; S = Cᵀ − C.
    std::vector<Term> terms;
    GeneratorMatrix out;
    out.particle_cap = particle_cap;
    const auto shifts = shifts_up_to(modes.shift_cutoff);
    kernels.prebuild(shifts);
    for (const auto& l : shifts) {
        const auto k = kernels.get(l);
        const auto& pts = k->lens.points();
        for (std::size_t a = 0; a < pts.size(); ++a) {
            for (std::size_t b = 0; b < pts.size(); ++b) {
                const double kv = k->K(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
                const Momentum& r = pts[a];
                const Momentum& s = pts[b];
                Term t{0.5 * kv, {mode(r - l), mode(r), mode(-s + l), mode(-s)}, 0};
                if (kv == 0.0) continue;
                ++out.lens_terms;
                for (int m : t.m) t.mask |= std::uint64_t{1} << m;
                if (std::popcount(t.mask) != 4) continue;  // a repeated mode annihilates the term
                terms.push_back(t);
            }
        }
    }

    std::unordered_map<std::uint64_t, int> where;
    std::vector<std::uint64_t>& basis = out.basis;
    basis.push_back(0);
    where.emplace(0, 0);
    std::vector<Eigen::Triplet<double>> creation;
    auto discover = [&](std::uint64_t st) {
        auto [it, fresh] = where.emplace(st, static_cast<int>(basis.size()));
        if (fresh) {
            if (basis.size() >= max_basis)
                throw ResourceLimitError("oracle basis exceeds " + std::to_string(max_basis) + " states");
            basis.push_back(st);
        }
        return it->second;
    };
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const std::uint64_t st = basis[i];
        const int pc = std::popcount(st);
        for (const auto& t : terms) {
            if (pc + 4 <= particle_cap) {
                std::uint64_t next = st;
                double sign = 1.0;
                if (create(next, t, sign)) {
                    const int j = discover(next);
                    creation.emplace_back(j, static_cast<int>(i), sign * t.coeff);
                }
            }
            if ((st & t.mask) == t.mask) discover(st & ~t.mask);
        }
    }

    const auto n = static_cast<Eigen::Index>(basis.size());
    Eigen::SparseMatrix<double, Eigen::RowMajor> c(n, n);
    c.setFromTriplets(creation.begin(), creation.end());
    Eigen::SparseMatrix<double, Eigen::RowMajor> ct = c.transpose();
    out.S = ct - c;
    out.S.prune(0.0);
    out.nonzeros = static_cast<std::size_t>(out.S.nonZeros());
    for (Eigen::Index r = 0; r < n; ++r) {
        double row = 0.0;
        for (decltype(out.S)::InnerIterator it(out.S, r); it; ++it) row += std::abs(it.value());
        out.norm_bound = std::max(out.norm_bound, row);
    }
    return out;
}

FockStateVector vacuum_state(const GeneratorMatrix& S) {
    FockStateVector v;
    v.basis = S.basis;
    v.amplitudes = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(S.basis.size()));
    v.amplitudes[0] = 1.0;
    v.particle_cap = S.particle_cap;
    return v;
}

FockStateVector apply_exp_generator(const GeneratorMatrix& S, double lambda, double tol) {
    if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("lambda must lie in [0, 1]");
    FockStateVector out = vacuum_state(S);
    const double a = lambda * S.norm_bound;
    if (a == 0.0) return out;

    const int steps = std::max(1, static_cast<int>(std::ceil(a)));
    const double h = lambda / steps;
    const double ah = a / steps;  // ≤ 1
    const double step_tol = tol / steps;
    double total_bound = 0.0;
    Eigen::VectorXd x = out.amplitudes;
    for (int st = 0; st < steps; ++st) {
        Eigen::VectorXd term = x;
        Eigen::VectorXd sum = x;
        double bound = 0.0;
        bool done = false;
        for (int k = 1; k <= 200; ++k) {
            term = (-h / k) * (S.S * term);
            sum += term;
            // ‖tail after k‖ ≤ ‖term_k‖ Σ_j r^j with r = ah/(k+1)
            const double r = ah / (k + 1);
            bound = term.norm() * r / (1.0 - r);
            if (bound <= step_tol * 1e-3 || term.norm() == 0.0) {
                done = true;
                break;
            }
        }
        if (!done)
            throw ConvergenceError("Taylor series for e^{-λS} did not converge", bound);
        total_bound += bound;
        x = std::move(sum);
    }
    if (total_bound > tol) throw ConvergenceError("exponential action above tolerance", total_bound);
    out.amplitudes = std::move(x);
    out.truncation_error = total_bound;
    out.norm_deviation = std::abs(out.amplitudes.norm() - 1.0);
    return out;
}

double raw_occupation(const FockStateVector& state, int mode) {
    const std::uint64_t bit = std::uint64_t{1} << mode;
    double acc = 0.0;
    for (std::size_t i = 0; i < state.basis.size(); ++i) {
        if (state.basis[i] & bit) {
            const double a = state.amplitudes[static_cast<Eigen::Index>(i)];
            acc += a * a;
        }
    }
    return acc;
}

Occupation occupation_expectation(const FockStateVector& state, const ModeSet& modes, const FermiBall& ball,
                                  const Momentum& q) {
    const bool inside = ball.contains(q);
    const auto m = modes.index_of(q);
    if (!m) return {inside ? 1.0 : 0.0, false};
    const double raw = raw_occupation(state, *m);
    return {inside ? 1.0 - raw : raw, true};
}

double number_moment(const FockStateVector& state, int m) {
    if (m < 1 || m > 5) throw InvalidArgument("moment order must be in 1..5");
    double acc = 0.0;
    for (std::size_t i = 0; i < state.basis.size(); ++i) {
        const double a = state.amplitudes[static_cast<Eigen::Index>(i)];
        acc += a * a * std::pow(std::popcount(state.basis[i]) + 1.0, m);
    }
    return acc;
}

double bootstrap_sup(const std::vector<FockStateVector>& states, const ModeSet& modes) {
    if (states.empty()) throw InvalidArgument("bootstrap_sup needs at least one state");
    double best = 0.0;
    for (const auto& st : states)
        for (std::size_t m = 0; m < modes.size(); ++m) best = std::max(best, raw_occupation(st, static_cast<int>(m)));
    return best;
}

std::pair<double, double> particle_hole_totals(const FockStateVector& state, const ModeSet& modes,
                                               const FermiBall& ball) {
    double particles = 0.0;
    double holes = 0.0;
    for (std::size_t m = 0; m < modes.size(); ++m) {
        const double occ = raw_occupation(state, static_cast<int>(m));
        (ball.contains(modes.modes[m]) ? holes : particles) += occ;
    }
    return {particles, holes};
}

OracleRun run_oracle(const FermiBall& ball, const PotentialSpec& spec, std::int64_t cutoff, int cap, double tol,
                     const std::vector<double>& lambda_grid, std::size_t max_basis, const std::vector<Momentum>& qs) {
    if (lambda_grid.empty()) throw InvalidArgument("lambda grid must not be empty");
    OracleRun run;
    run.modes = build_mode_set(ball, cutoff);
    run.cap = cap;
    run.tol = tol;
    KernelFamily family(ball, spec, cutoff);
    const GeneratorMatrix S = build_generator(run.modes, family, cap, max_basis);
    run.dim = S.basis.size();
    run.nnz = S.nonzeros;

    std::vector<FockStateVector> states;
    for (double lam : lambda_grid) {
        states.push_back(apply_exp_generator(S, lam, tol));
        const auto& st = states.back();
        OracleMoments m;
        m.lambda = lam;
        for (int k = 1; k <= 5; ++k) m.moment[k - 1] = number_moment(st, k);
        m.norm_deviation = st.norm_deviation;
        const auto [particles, holes] = particle_hole_totals(st, run.modes, ball);
        m.particle_hole_gap = std::abs(particles - holes);
        run.moments.push_back(m);
        run.max_truncation_error = std::max(run.max_truncation_error, st.truncation_error);
    }
    run.xi = bootstrap_sup(states, run.modes);

    const FockStateVector xi = apply_exp_generator(S, 1.0, tol);
    run.max_truncation_error = std::max(run.max_truncation_error, xi.truncation_error);
    const std::vector<Momentum>& targets = qs.empty() ? run.modes.modes : qs;
    for (const auto& q : targets) {
        OracleRow row;
        row.q = q;
        row.inside_ball = ball.contains(q);
        row.n_exact = occupation_expectation(xi, run.modes, ball, q).value;
        row.n_rpa_trunc = n_rpa_matrix(family, q).n_rpa;
        row.n_ex_trunc = n_exchange(family, q).n_ex_m1;
        if (row.inside_ball) {
            row.residual = row.n_exact - (1.0 - row.n_rpa_trunc - row.n_ex_trunc);
            row.residual_minus = row.n_exact - (1.0 - row.n_rpa_trunc + row.n_ex_trunc);
        } else {
            row.residual = row.n_exact - (row.n_rpa_trunc + row.n_ex_trunc);
            row.residual_minus = row.n_exact - (row.n_rpa_trunc - row.n_ex_trunc);
        }
        run.rows.push_back(row);
    }
    return run;
}

}  // namespace fermigas
