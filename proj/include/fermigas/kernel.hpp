#pragma once

// Per-shift Bogoliubov kernels K(l) built from h(l) = diag(λ_{l,p}) and the rank-one
// P(l) = |v⟩⟨v| with v_p = sqrt(g_l), g_l = V̂(l) / (k_F · 2 (2π)³):
//
//   K = −½ log( h^{-1/2} ( h^{1/2} (h + 2P) h^{1/2} )^{1/2} h^{-1/2} ).
//
// The kernel keeps the eigendecomposition of K, so cosh, powers and exponentials of K
// all come from one factorization.

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fermigas/lattice.hpp"
#include "fermigas/potential.hpp"

namespace fermigas {

// 1 / (2 (2π)³), the prefactor of g_l.
inline constexpr double kCouplingPrefactor = 1.0 / (2.0 * 248.05021344239853);

double coupling_g(const FermiBall& ball, const PotentialSpec& spec, const Momentum& shift);

struct KernelData {
    Momentum shift{};
    LensData lens;
    double g = 0.0;
    Eigen::VectorXd v;       // constant entries sqrt(g)
    Eigen::VectorXd h_diag;  // λ_{l,p}
    Eigen::MatrixXd K;       // symmetric, indexed like lens.points()
    Eigen::VectorXd kappa;   // eigenvalues of K
    Eigen::MatrixXd modes;   // orthonormal eigenvectors of K (columns)
    // Eigenvalues of D = e^{-2K} − 1, kept so that small spectra stay accurate.
    Eigen::VectorXd d;

    std::size_t size() const noexcept { return lens.size(); }
    bool empty() const noexcept { return lens.empty(); }
    std::size_t index(const Momentum& p) const;  // InvalidArgument when p ∉ lens
};

// First-order kernel g / (λ_r + λ_s).
struct LeadingKernel {
    Momentum shift{};
    LensData lens;
    double g = 0.0;
    Eigen::MatrixXd entries;
};

KernelData assemble_kernel(const LensData& lens, double g);
KernelData assemble_kernel(const FermiBall& ball, const LensData& lens, const PotentialSpec& spec);

LeadingKernel leading_kernel(const LensData& lens, double g);
LeadingKernel leading_kernel(const FermiBall& ball, const LensData& lens, const PotentialSpec& spec);

enum class PowerMethod { eigen, multiply };

// ((2K)^m)_{q,q}.
double matrix_power_diag(const KernelData& k, int m, const Momentum& q, PowerMethod method = PowerMethod::eigen);

// (cosh 2K − 1)_{q,q} from the spectrum of K, evaluated as 2 sinh²(κ) per eigenvalue.
double cosh_diag_minus_one(const KernelData& k, const Momentum& q);

// Reconstructions from the stored spectrum.
Eigen::MatrixXd kernel_function(const KernelData& k, double (*f)(double));
Eigen::MatrixXd exp_minus_two_k(const KernelData& k);

// Lazily assembled kernels for one ball and potential, optionally restricted to |l|² ≤ window.
// Safe to query from several threads.
class KernelFamily {
public:
    KernelFamily(FermiBall ball, PotentialSpec spec, std::optional<std::int64_t> max_shift_norm2 = std::nullopt);

    const FermiBall& ball() const noexcept { return ball_; }
    const PotentialSpec& potential() const noexcept { return spec_; }
    const std::optional<std::int64_t>& window() const noexcept { return window_; }
    bool admits(const Momentum& shift) const noexcept {
        return !shift.is_zero() && (!window_ || shift.norm2() <= *window_);
    }

    std::shared_ptr<const KernelData> get(const Momentum& shift) const;
    // Assembles every missing kernel, in parallel.
    void prebuild(const std::vector<Momentum>& shifts) const;
    std::size_t cached() const;

private:
    FermiBall ball_;
    PotentialSpec spec_;
    std::optional<std::int64_t> window_;
    mutable std::mutex mutex_;
    mutable std::map<Momentum, std::shared_ptr<const KernelData>, CanonicalLess> cache_;
};

// Binary kernel cache: versioned header (magic, version, shell_cap, shift, fingerprint) + row-major K.
inline constexpr std::uint32_t kKernelCacheVersion = 1;
void write_kernel_cache(std::ostream& os, const KernelData& k, std::int64_t shell_cap, const std::string& fingerprint);
// Returns nullopt if the header does not match (shell_cap, shift, fingerprint) or the version differs.
std::optional<Eigen::MatrixXd> read_kernel_cache(std::istream& is, std::int64_t shell_cap, const Momentum& shift,
                                                 const std::string& fingerprint);

}  // namespace fermigas
