#pragma once

// Integer-lattice geometry on Z^3: the Fermi ball, lenses L_l = B_F^c ∩ (B_F + l),
// pair excitation energies and the gap e(q). Everything here is exact integer arithmetic.

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fermigas {

struct Momentum {
    int x = 0;
    int y = 0;
    int z = 0;

    constexpr std::int64_t norm2() const noexcept {
        return std::int64_t{x} * x + std::int64_t{y} * y + std::int64_t{z} * z;
    }
    constexpr bool is_zero() const noexcept { return x == 0 && y == 0 && z == 0; }

    constexpr Momentum operator-() const noexcept { return {-x, -y, -z}; }
    constexpr Momentum operator+(const Momentum& o) const noexcept { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Momentum operator-(const Momentum& o) const noexcept { return {x - o.x, y - o.y, z - o.z}; }
    constexpr bool operator==(const Momentum&) const noexcept = default;

    std::string str() const;
};

std::ostream& operator<<(std::ostream& os, const Momentum& p);

// Canonical order: norm², then lexicographic (x, y, z). Used for every point list.
struct CanonicalLess {
    constexpr bool operator()(const Momentum& a, const Momentum& b) const noexcept {
        const auto na = a.norm2();
        const auto nb = b.norm2();
        if (na != nb) return na < nb;
        if (a.x != b.x) return a.x < b.x;
        if (a.y != b.y) return a.y < b.y;
        return a.z < b.z;
    }
};

struct MomentumHash {
    std::size_t operator()(const Momentum& p) const noexcept {
        std::uint64_t h = static_cast<std::uint32_t>(p.x);
        h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint32_t>(p.y);
        h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint32_t>(p.z);
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

// Exact half-integer n/2. Pair energies and gaps live on this grid.
struct HalfInteger {
    std::int64_t twice = 0;

    constexpr double value() const noexcept { return static_cast<double>(twice) / 2.0; }
    constexpr auto operator<=>(const HalfInteger&) const noexcept = default;
};

class FermiBall {
public:
    explicit FermiBall(std::int64_t shell_cap);

    std::int64_t shell_cap() const noexcept { return shell_cap_; }
    double kf() const noexcept { return kf_; }
    std::size_t n_particles() const noexcept { return points_.size(); }
    std::int64_t min_outside_norm2() const noexcept { return min_outside_norm2_; }
    const std::vector<Momentum>& points() const noexcept { return points_; }

    bool contains(const Momentum& p) const noexcept { return p.norm2() <= shell_cap_; }

private:
    std::int64_t shell_cap_;
    double kf_;
    std::int64_t min_outside_norm2_;
    std::vector<Momentum> points_;
};

FermiBall build_fermi_ball(std::int64_t shell_cap);

class LensData {
public:
    LensData() = default;

    // Assembles a lens from explicit data; points are re-sorted canonically with their energies.
    // Used by build_lens and for synthetic lenses in tests.
    LensData(Momentum shift, std::vector<Momentum> points, std::vector<HalfInteger> lambdas);

    const Momentum& shift() const noexcept { return shift_; }
    const std::vector<Momentum>& points() const noexcept { return points_; }
    const std::vector<HalfInteger>& lambdas() const noexcept { return lambdas_; }
    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }

    std::optional<std::size_t> index_of(const Momentum& p) const;
    bool contains(const Momentum& p) const { return index_of(p).has_value(); }

private:
    Momentum shift_{};
    std::vector<Momentum> points_;
    std::vector<HalfInteger> lambdas_;
};

// λ_{l,p} = (|p|² − |p − l|²)/2, exact.
constexpr HalfInteger pair_energy(const Momentum& shift, const Momentum& p) noexcept {
    return HalfInteger{p.norm2() - (p - shift).norm2()};
}

LensData build_lens(const FermiBall& ball, const Momentum& shift);

// e(q) = | |q|² − inf_{p∈B_F^c}|p|² + 1/2 |.
HalfInteger excitation_gap(const FermiBall& ball, const Momentum& q);

// Shifts l ≠ 0 whose lens contains q (q outside the ball) or q + l (q inside the ball).
// The inside set is infinite, so it is cut at |l|² ≤ max_shift_norm2 (default_inside_shift_cap
// when unset). For q outside, the cap, when given, filters the finite set q − B_F.
std::vector<Momentum> relevant_shifts(const FermiBall& ball, const Momentum& q,
                                      std::optional<std::int64_t> max_shift_norm2 = std::nullopt);

std::int64_t default_inside_shift_cap(const FermiBall& ball);

// All l ≠ 0 with |l|² ≤ max_norm2, canonical order.
std::vector<Momentum> shifts_up_to(std::int64_t max_norm2);

// The 48 signed permutations of the axes, applied to a momentum.
Momentum apply_cubic(int element, const Momentum& p) noexcept;
// Representative of the cubic orbit of p: |x| ≥ |y| ≥ |z| ≥ 0.
Momentum cubic_representative(const Momentum& p) noexcept;

}  // namespace fermigas

template <>
struct std::hash<fermigas::Momentum> : fermigas::MomentumHash {};
