#include "fermigas/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fermigas/errors.hpp"

namespace fermigas {

std::string Momentum::str() const {
    std::ostringstream os;
    os << *this;
    return os.str();
}

std::ostream& operator<<(std::ostream& os, const Momentum& p) {
    return os << '(' << p.x << ',' << p.y << ',' << p.z << ')';
}

namespace {

int isqrt_floor(std::int64_t n) {
    auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return static_cast<int>(r);
}

bool is_sum_of_three_squares(std::int64_t s) {
    const int r = isqrt_floor(s);
    for (int a = 0; a <= r; ++a) {
        const std::int64_t ra = s - std::int64_t{a} * a;
        for (int b = 0; b <= a && std::int64_t{b} * b <= ra; ++b) {
            const std::int64_t rb = ra - std::int64_t{b} * b;
            const int c = isqrt_floor(rb);
            if (std::int64_t{c} * c == rb && c <= b) return true;
        }
    }
    return false;
}

std::vector<Momentum> lattice_ball(std::int64_t max_norm2) {
    std::vector<Momentum> pts;
    const int r = isqrt_floor(max_norm2);
    for (int x = -r; x <= r; ++x) {
        for (int y = -r; y <= r; ++y) {
            const std::int64_t rxy = std::int64_t{x} * x + std::int64_t{y} * y;
            if (rxy > max_norm2) continue;
            const int zr = isqrt_floor(max_norm2 - rxy);
            for (int z = -zr; z <= zr; ++z) pts.push_back({x, y, z});
        }
    }
    std::sort(pts.begin(), pts.end(), CanonicalLess{});
    return pts;
}

}  // namespace

FermiBall::FermiBall(std::int64_t shell_cap) : shell_cap_(shell_cap) {
    if (shell_cap < 0) throw InvalidArgument("shell_cap must be nonnegative, got " + std::to_string(shell_cap));
    kf_ = std::sqrt(static_cast<double>(shell_cap));
    points_ = lattice_ball(shell_cap);
    std::int64_t s = shell_cap + 1;
    while (!is_sum_of_three_squares(s)) ++s;
    min_outside_norm2_ = s;
}

FermiBall build_fermi_ball(std::int64_t shell_cap) { return FermiBall(shell_cap); }

LensData::LensData(Momentum shift, std::vector<Momentum> points, std::vector<HalfInteger> lambdas)
    : shift_(shift) {
    if (points.size() != lambdas.size()) throw InvalidArgument("lens points and energies differ in length");
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return CanonicalLess{}(points[a], points[b]); });
    points_.reserve(points.size());
    lambdas_.reserve(points.size());
    for (auto i : order) {
        points_.push_back(points[i]);
        lambdas_.push_back(lambdas[i]);
    }
    if (std::adjacent_find(points_.begin(), points_.end()) != points_.end())
        throw InvalidArgument("lens points must be distinct");
}

std::optional<std::size_t> LensData::index_of(const Momentum& p) const {
    auto it = std::lower_bound(points_.begin(), points_.end(), p, CanonicalLess{});
    if (it == points_.end() || !(*it == p)) return std::nullopt;
    return static_cast<std::size_t>(it - points_.begin());
}

LensData build_lens(const FermiBall& ball, const Momentum& shift) {
    if (shift.is_zero()) throw InvalidArgument("lens shift must be nonzero");
    std::vector<Momentum> pts;
    std::vector<HalfInteger> lams;
    for (const auto& k : ball.points()) {
        const Momentum p = k + shift;
        if (ball.contains(p)) continue;
        pts.push_back(p);
        lams.push_back(pair_energy(shift, p));
    }
    return LensData(shift, std::move(pts), std::move(lams));
}

HalfInteger excitation_gap(const FermiBall& ball, const Momentum& q) {
    const std::int64_t t = 2 * q.norm2() - 2 * ball.min_outside_norm2() + 1;
    return HalfInteger{t < 0 ? -t : t};
}

std::int64_t default_inside_shift_cap(const FermiBall& ball) {
    const double r = 2.0 * ball.kf() + 2.0;
    return static_cast<std::int64_t>(std::ceil(r * r));
}

std::vector<Momentum> shifts_up_to(std::int64_t max_norm2) {
    if (max_norm2 < 1) return {};
    auto pts = lattice_ball(max_norm2);
    pts.erase(pts.begin());  // origin sorts first
    return pts;
}

std::vector<Momentum> relevant_shifts(const FermiBall& ball, const Momentum& q,
                                      std::optional<std::int64_t> max_shift_norm2) {
    std::vector<Momentum> out;
    if (!ball.contains(q)) {
        for (const auto& k : ball.points()) {
            const Momentum l = q - k;
            if (max_shift_norm2 && l.norm2() > *max_shift_norm2) continue;
            out.push_back(l);
        }
        std::sort(out.begin(), out.end(), CanonicalLess{});
        return out;
    }
    const auto cap = max_shift_norm2.value_or(default_inside_shift_cap(ball));
    for (const auto& l : shifts_up_to(cap)) {
        if (!ball.contains(q + l)) out.push_back(l);
    }
    return out;
}

Momentum apply_cubic(int element, const Momentum& p) noexcept {
    static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    const int c[3] = {p.x, p.y, p.z};
    const auto& perm = perms[(element / 8) % 6];
    const int signs = element % 8;
    int r[3];
    for (int i = 0; i < 3; ++i) r[i] = ((signs >> i) & 1) ? -c[perm[i]] : c[perm[i]];
    return {r[0], r[1], r[2]};
}

Momentum cubic_representative(const Momentum& p) noexcept {
    int c[3] = {std::abs(p.x), std::abs(p.y), std::abs(p.z)};
    std::sort(c, c + 3, std::greater<>{});
    return {c[0], c[1], c[2]};
}

}  // namespace fermigas
