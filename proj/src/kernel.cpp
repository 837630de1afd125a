#include "fermigas/kernel.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "fermigas/errors.hpp"
#include "fermigas/parallel.hpp"

namespace fermigas {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void symmetrize(MatrixXd& m) {
    MatrixXd t = m.transpose();
    m = 0.5 * (m + t);
}

VectorXd lambda_vector(const LensData& lens) {
    VectorXd lam(static_cast<Eigen::Index>(lens.size()));
    for (std::size_t i = 0; i < lens.size(); ++i) lam[static_cast<Eigen::Index>(i)] = lens.lambdas()[i].value();
    return lam;
}

// X = (h² + 2 w wᵀ)^{1/2} − h for diagonal h > 0. The spectral guess is polished by Newton steps on
// (h + X)² = h² + 2wwᵀ written without the h² term, so X keeps relative accuracy when g is small.
MatrixXd sqrt_update(const VectorXd& lam, const VectorXd& w) {
    const auto n = lam.size();
    const MatrixXd rank_one = 2.0 * w * w.transpose();
    MatrixXd a = rank_one;
    a.diagonal() += lam.cwiseProduct(lam);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig_a(a);
    if (eig_a.info() != Eigen::Success) throw NumericDomainError("eigendecomposition of h^{1/2}(h+2P)h^{1/2} failed");
    const VectorXd alpha = eig_a.eigenvalues();
    if (!(alpha.minCoeff() > 0.0)) throw NumericDomainError("h^{1/2}(h+2P)h^{1/2} is not positive definite");
    MatrixXd x = eig_a.eigenvectors() * alpha.cwiseSqrt().asDiagonal() * eig_a.eigenvectors().transpose();
    x.diagonal() -= lam;
    symmetrize(x);

    for (int it = 0; it < 8; ++it) {
        MatrixXd residual = rank_one - lam.asDiagonal() * x - x * lam.asDiagonal() - x * x;
        symmetrize(residual);
        MatrixXd y = x;
        y.diagonal() += lam;
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig_y(y);
        const VectorXd sigma = eig_y.eigenvalues();
        const MatrixXd& v = eig_y.eigenvectors();
        MatrixXd r = v.transpose() * residual * v;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) r(i, j) /= sigma[i] + sigma[j];
        MatrixXd delta = v * r * v.transpose();
        symmetrize(delta);
        x += delta;
        const double scale = x.cwiseAbs().maxCoeff();
        if (delta.cwiseAbs().maxCoeff() <= 1e-15 * scale || scale == 0.0) break;
    }
    return x;
}

}  // namespace

double coupling_g(const FermiBall& ball, const PotentialSpec& spec, const Momentum& shift) {
    if (ball.kf() <= 0.0) throw InvalidArgument("k_F must be positive (shell_cap ≥ 1) to form g_l");
    const double v = spec.evaluate(shift);
    if (!std::isfinite(v)) throw NumericDomainError("V̂" + shift.str() + " is not finite");
    return v * kCouplingPrefactor / ball.kf();
}

std::size_t KernelData::index(const Momentum& p) const {
    auto idx = lens.index_of(p);
    if (!idx) throw InvalidArgument("momentum " + p.str() + " is not in the lens of shift " + shift.str());
    return *idx;
}

KernelData assemble_kernel(const LensData& lens, double g) {
    if (!std::isfinite(g) || g < 0.0) throw NumericDomainError("coupling g must be finite and nonnegative");
    KernelData k;
    k.shift = lens.shift();
    k.lens = lens;
    k.g = g;
    const auto n = static_cast<Eigen::Index>(lens.size());
    k.h_diag = lambda_vector(lens);
    k.v = VectorXd::Constant(n, std::sqrt(g));
    if (n == 0) return k;
    if (!(k.h_diag.minCoeff() > 0.0)) throw NumericDomainError("lens energies must be positive");

    if (g == 0.0) {
        k.K = MatrixXd::Zero(n, n);
        k.kappa = VectorXd::Zero(n);
        k.d = VectorXd::Zero(n);
        k.modes = MatrixXd::Identity(n, n);
        return k;
    }

    const VectorXd w = (k.h_diag * g).cwiseSqrt();  // h^{1/2} v
    const MatrixXd x = sqrt_update(k.h_diag, w);
    const VectorXd inv_sqrt = k.h_diag.cwiseSqrt().cwiseInverse();
    MatrixXd dmat = inv_sqrt.asDiagonal() * x * inv_sqrt.asDiagonal();  // e^{-2K} − 1
    symmetrize(dmat);

    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(dmat);
    if (eig.info() != Eigen::Success) throw NumericDomainError("eigendecomposition of e^{-2K} − 1 failed");
    k.d = eig.eigenvalues();
    if (!(k.d.minCoeff() > -1.0)) throw NumericDomainError("e^{-2K} is not positive definite");
    k.modes = eig.eigenvectors();
    k.kappa = k.d.unaryExpr([](double t) { return -0.5 * std::log1p(t); });
    k.K = k.modes * k.kappa.asDiagonal() * k.modes.transpose();
    symmetrize(k.K);
    return k;
}

KernelData assemble_kernel(const FermiBall& ball, const LensData& lens, const PotentialSpec& spec) {
    if (lens.empty()) {
        KernelData k;
        k.shift = lens.shift();
        k.lens = lens;
        return k;
    }
    return assemble_kernel(lens, coupling_g(ball, spec, lens.shift()));
}

LeadingKernel leading_kernel(const LensData& lens, double g) {
    if (!std::isfinite(g) || g < 0.0) throw NumericDomainError("coupling g must be finite and nonnegative");
    LeadingKernel out;
    out.shift = lens.shift();
    out.lens = lens;
    out.g = g;
    const auto n = static_cast<Eigen::Index>(lens.size());
    out.entries.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index s = 0; s < n; ++s)
            out.entries(r, s) = g / (lens.lambdas()[r].value() + lens.lambdas()[s].value());
    return out;
}

LeadingKernel leading_kernel(const FermiBall& ball, const LensData& lens, const PotentialSpec& spec) {
    if (lens.empty()) return leading_kernel(lens, 0.0);
    return leading_kernel(lens, coupling_g(ball, spec, lens.shift()));
}

double matrix_power_diag(const KernelData& k, int m, const Momentum& q, PowerMethod method) {
    if (m < 0) throw InvalidArgument("matrix power must be nonnegative");
    const auto i = static_cast<Eigen::Index>(k.index(q));
    if (m == 0) return 1.0;
    if (method == PowerMethod::eigen) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < k.kappa.size(); ++j) {
            const double u = k.modes(i, j);
            acc += u * u * std::pow(2.0 * k.kappa[j], m);
        }
        return acc;
    }
    VectorXd x = VectorXd::Zero(k.K.rows());
    x[i] = 1.0;
    for (int p = 0; p < m; ++p) x = 2.0 * (k.K * x);
    return x[i];
}

double cosh_diag_minus_one(const KernelData& k, const Momentum& q) {
    const auto i = static_cast<Eigen::Index>(k.index(q));
    double acc = 0.0;
    for (Eigen::Index j = 0; j < k.kappa.size(); ++j) {
        const double u = k.modes(i, j);
        const double sh = std::sinh(k.kappa[j]);
        acc += u * u * 2.0 * sh * sh;
    }
    return acc;
}

Eigen::MatrixXd kernel_function(const KernelData& k, double (*f)(double)) {
    if (k.empty()) return {};
    MatrixXd out = k.modes * k.kappa.unaryExpr(f).asDiagonal() * k.modes.transpose();
    symmetrize(out);
    return out;
}

Eigen::MatrixXd exp_minus_two_k(const KernelData& k) {
    if (k.empty()) return {};
    MatrixXd out = k.modes * k.d.asDiagonal() * k.modes.transpose();
    symmetrize(out);
    out.diagonal().array() += 1.0;
    return out;
}

KernelFamily::KernelFamily(FermiBall ball, PotentialSpec spec, std::optional<std::int64_t> max_shift_norm2)
    : ball_(std::move(ball)), spec_(std::move(spec)), window_(max_shift_norm2) {
    if (window_ && *window_ < 1) throw InvalidArgument("shift window must admit at least |l|² = 1");
}

std::shared_ptr<const KernelData> KernelFamily::get(const Momentum& shift) const {
    if (!admits(shift)) throw InvalidArgument("shift " + shift.str() + " is outside the kernel family window");
    {
        std::lock_guard lock(mutex_);
        auto it = cache_.find(shift);
        if (it != cache_.end()) return it->second;
    }
    auto built = std::make_shared<const KernelData>(assemble_kernel(ball_, build_lens(ball_, shift), spec_));
    std::lock_guard lock(mutex_);
    auto [it, inserted] = cache_.try_emplace(shift, std::move(built));
    return it->second;
}

void KernelFamily::prebuild(const std::vector<Momentum>& shifts) const {
    std::vector<Momentum> missing;
    {
        std::lock_guard lock(mutex_);
        for (const auto& l : shifts)
            if (admits(l) && !cache_.count(l)) missing.push_back(l);
    }
    parallel_for(missing.size(), [&](std::size_t i) { get(missing[i]); });
}

std::size_t KernelFamily::cached() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
}

namespace {

constexpr char kMagic[4] = {'F', 'G', 'K', 'C'};

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
bool get_pod(std::istream& is, T& v) {
    return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

}  // namespace

void write_kernel_cache(std::ostream& os, const KernelData& k, std::int64_t shell_cap, const std::string& fingerprint) {
    os.write(kMagic, 4);
    put(os, kKernelCacheVersion);
    put(os, shell_cap);
    put(os, std::int32_t{k.shift.x});
    put(os, std::int32_t{k.shift.y});
    put(os, std::int32_t{k.shift.z});
    put(os, static_cast<std::uint32_t>(fingerprint.size()));
    os.write(fingerprint.data(), static_cast<std::streamsize>(fingerprint.size()));
    const auto n = static_cast<std::uint64_t>(k.size());
    put(os, n);
    for (std::uint64_t r = 0; r < n; ++r)
        for (std::uint64_t c = 0; c < n; ++c) put(os, k.K(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
}

std::optional<Eigen::MatrixXd> read_kernel_cache(std::istream& is, std::int64_t shell_cap, const Momentum& shift,
                                                 const std::string& fingerprint) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) return std::nullopt;
    std::uint32_t version = 0;
    std::int64_t cap = 0;
    std::int32_t sx = 0, sy = 0, sz = 0;
    std::uint32_t fp_len = 0;
    if (!get_pod(is, version) || version != kKernelCacheVersion) return std::nullopt;
    if (!get_pod(is, cap) || !get_pod(is, sx) || !get_pod(is, sy) || !get_pod(is, sz) || !get_pod(is, fp_len))
        return std::nullopt;
    std::string fp(fp_len, '\0');
    if (!is.read(fp.data(), fp_len)) return std::nullopt;
    if (cap != shell_cap || !(Momentum{sx, sy, sz} == shift) || fp != fingerprint) return std::nullopt;
    std::uint64_t n = 0;
    if (!get_pod(is, n)) return std::nullopt;
    MatrixXd k(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::uint64_t r = 0; r < n; ++r)
        for (std::uint64_t c = 0; c < n; ++c)
            if (!get_pod(is, k(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)))) return std::nullopt;
    return k;
}

}  // namespace fermigas
