#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fermigas/lattice.hpp"

namespace fermigas {

enum class DecayClass { coulomb_like, summable, alpha_square_summable };

std::string to_string(DecayClass c);

// Fourier coefficients V̂(l) on Z^3 \ {0}, with a declared power-law tail V̂ ~ |l|^{-tail_exponent}
// standing in for what a finite scan cannot see.
class PotentialSpec {
public:
    using Evaluator = std::function<double(const Momentum&)>;
    using RadialProfile = std::function<double(double)>;

    PotentialSpec(std::string name, Evaluator evaluate, DecayClass decay_class, double tail_exponent,
                  RadialProfile radial = {}, double coupling_scale = 1.0);

    // V̂(l) times the coupling scale. Throws InvalidArgument at l = 0.
    double evaluate(const Momentum& l) const;
    double operator()(const Momentum& l) const { return evaluate(l); }

    // Continuum profile V̂(|l|) for radial families; throws InvalidArgument otherwise.
    double evaluate_radial(double r) const;
    bool is_radial() const noexcept { return static_cast<bool>(radial_); }

    DecayClass decay_class() const noexcept { return decay_class_; }
    double tail_exponent() const noexcept { return tail_exponent_; }
    double coupling_scale() const noexcept { return coupling_scale_; }
    const std::string& name() const noexcept { return name_; }

    // Stable text identifying the family, its parameters and the scale (17 significant digits).
    std::string fingerprint() const;

    PotentialSpec with_scale(double s) const;

private:
    std::string name_;
    Evaluator evaluate_;
    DecayClass decay_class_;
    double tail_exponent_;
    RadialProfile radial_;
    double coupling_scale_;
};

// V̂(l) = g / |l|².
PotentialSpec coulomb(double g);
// V̂(l) = g |l|^{-2 p}, p > 3/2.
PotentialSpec yukawa_like(double g, double decay_power);
// V̂ ≡ 0.
PotentialSpec zero_potential();
// Coulomb with an odd perturbation g/|l|² (1 + eps·sign(l_x)); breaks V̂(l) = V̂(−l). Fault injection.
PotentialSpec skewed_coulomb(double g, double eps);

// "coulomb:g=1", "yukawa:g=1,p=2", "zero", "skewed:g=1,eps=0.1".
PotentialSpec parse_potential(const std::string& descriptor);

struct HypothesisViolation {
    std::string kind;  // "negative", "odd", "not_radial", "increasing"
    Momentum at;
};

struct HypothesisReport {
    std::int64_t range_cap = 0;
    // Finite scan over |l| ≤ range_cap.
    bool nonnegative = true;
    bool even = true;
    bool radial_decreasing = true;
    double max_v_times_norm2 = 0.0;  // sup |l|² V̂(l) on the scan
    // Declared tail.
    double tail_exponent = 0.0;
    // Verdicts: scan ∧ declared tail.
    bool coulomb_like = false;           // V̂ ≥ 0 radial decreasing, V̂ ≤ C|l|^{-2}
    bool summable = false;               // V̂ ≥ 0, Σ V̂ < ∞
    bool alpha_square_summable = false;  // V̂ even ≥ 0, Σ V̂² |l|^α < ∞ for some α > 0
    double alpha_sup = 0.0;              // supremum of admissible α, clipped to the (0, 2) range used by the bounds
    std::vector<HypothesisViolation> violations;
};

HypothesisReport verify_hypotheses(const PotentialSpec& spec, std::int64_t range_cap);

}  // namespace fermigas
