#include "fermigas/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <map>
#include <sstream>
#include <utility>

#include "fermigas/errors.hpp"

namespace fermigas {

std::string to_string(DecayClass c) {
    switch (c) {
        case DecayClass::coulomb_like: return "coulomb_like";
        case DecayClass::summable: return "summable";
        case DecayClass::alpha_square_summable: return "alpha_square_summable";
    }
    return "unknown";
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

PotentialSpec::PotentialSpec(std::string name, Evaluator evaluate, DecayClass decay_class, double tail_exponent,
                             RadialProfile radial, double coupling_scale)
    : name_(std::move(name)),
      evaluate_(std::move(evaluate)),
      decay_class_(decay_class),
      tail_exponent_(tail_exponent),
      radial_(std::move(radial)),
      coupling_scale_(coupling_scale) {
    if (!(coupling_scale >= 0.0) || !std::isfinite(coupling_scale))
        throw InvalidArgument("coupling_scale must be finite and nonnegative");
}

double PotentialSpec::evaluate(const Momentum& l) const {
    if (l.is_zero()) throw InvalidArgument("V̂ is not evaluated at l = 0");
    return coupling_scale_ * evaluate_(l);
}

double PotentialSpec::evaluate_radial(double r) const {
    if (!radial_) throw InvalidArgument("potential '" + name_ + "' has no radial profile");
    if (!(r > 0.0)) throw InvalidArgument("radial profile is evaluated at r > 0 only");
    return coupling_scale_ * radial_(r);
}

std::string PotentialSpec::fingerprint() const { return name_ + ";scale=" + fmt17(coupling_scale_); }

PotentialSpec PotentialSpec::with_scale(double s) const {
    PotentialSpec out = *this;
    if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidArgument("coupling_scale must be finite and nonnegative");
    out.coupling_scale_ = s;
    return out;
}

PotentialSpec coulomb(double g) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw InvalidArgument("coulomb: g must be finite and nonnegative");
    return PotentialSpec(
        "coulomb:g=" + fmt17(g), [g](const Momentum& l) { return g / static_cast<double>(l.norm2()); },
        DecayClass::coulomb_like, 2.0, [g](double r) { return g / (r * r); });
}

PotentialSpec yukawa_like(double g, double decay_power) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw InvalidArgument("yukawa: g must be finite and nonnegative");
    if (!(decay_power > 1.5)) throw InvalidArgument("yukawa: decay power p must exceed 3/2");
    return PotentialSpec(
        "yukawa:g=" + fmt17(g) + ",p=" + fmt17(decay_power),
        [g, decay_power](const Momentum& l) {
            return g * std::pow(static_cast<double>(l.norm2()), -decay_power);
        },
        DecayClass::summable, 2.0 * decay_power,
        [g, decay_power](double r) { return g * std::pow(r, -2.0 * decay_power); });
}

PotentialSpec zero_potential() {
    return PotentialSpec(
        "zero", [](const Momentum&) { return 0.0; }, DecayClass::summable,
        std::numeric_limits<double>::infinity(), [](double) { return 0.0; });
}

PotentialSpec skewed_coulomb(double g, double eps) {
    return PotentialSpec(
        "skewed:g=" + fmt17(g) + ",eps=" + fmt17(eps),
        [g, eps](const Momentum& l) {
            const double sgn = l.x > 0 ? 1.0 : (l.x < 0 ? -1.0 : 0.0);
            return g / static_cast<double>(l.norm2()) * (1.0 + eps * sgn);
        },
        DecayClass::coulomb_like, 2.0);
}

PotentialSpec parse_potential(const std::string& descriptor) {
    const auto colon = descriptor.find(':');
    const std::string family = descriptor.substr(0, colon);
    std::map<std::string, double> params;
    if (colon != std::string::npos) {
        std::stringstream ss(descriptor.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw InvalidArgument("potential parameter '" + item + "' lacks '='");
            const std::string key = item.substr(0, eq);
            const std::string val = item.substr(eq + 1);
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(val, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != val.size() || val.empty())
                throw InvalidArgument("potential parameter '" + key + "' is not a number: '" + val + "'");
            params[key] = v;
        }
    }
    auto take = [&](const std::string& key, double fallback) {
        auto it = params.find(key);
        if (it == params.end()) return fallback;
        double v = it->second;
        params.erase(it);
        return v;
    };
    PotentialSpec out = [&]() {
        if (family == "coulomb") return coulomb(take("g", 1.0));
        if (family == "yukawa") {
            const double g = take("g", 1.0);
            return yukawa_like(g, take("p", 2.0));
        }
        if (family == "zero") return zero_potential();
        if (family == "skewed") {
            const double g = take("g", 1.0);
            return skewed_coulomb(g, take("eps", 0.1));
        }
        throw InvalidArgument("unknown potential family '" + family + "'");
    }();
    if (!params.empty())
        throw InvalidArgument("unknown parameter '" + params.begin()->first + "' for potential '" + family + "'");
    return out;
}

HypothesisReport verify_hypotheses(const PotentialSpec& spec, std::int64_t range_cap) {
    if (range_cap < 1) throw InvalidArgument("range_cap must be at least 1");
    HypothesisReport rep;
    rep.range_cap = range_cap;
    rep.tail_exponent = spec.tail_exponent();

    // value per norm² for the radial check
    std::map<std::int64_t, std::pair<double, Momentum>> shell_value;
    for (const auto& l : shifts_up_to(range_cap * range_cap)) {
        const double v = spec.evaluate(l);
        if (!(v >= 0.0)) {
            rep.nonnegative = false;
            rep.violations.push_back({"negative", l});
        }
        const double vm = spec.evaluate(-l);
        // report each odd pair once, at its canonically larger member
        if (v != vm && CanonicalLess{}(-l, l)) {
            rep.even = false;
            rep.violations.push_back({"odd", l});
        }
        rep.max_v_times_norm2 = std::max(rep.max_v_times_norm2, v * static_cast<double>(l.norm2()));
        auto [it, inserted] = shell_value.try_emplace(l.norm2(), v, l);
        if (!inserted && it->second.first != v) {
            if (rep.radial_decreasing) rep.violations.push_back({"not_radial", l});
            rep.radial_decreasing = false;
        }
    }
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& [n2, entry] : shell_value) {
        if (entry.first > prev) {
            rep.radial_decreasing = false;
            rep.violations.push_back({"increasing", entry.second});
        }
        prev = entry.first;
    }

    const double t = spec.tail_exponent();
    const bool scan_finite = std::isfinite(rep.max_v_times_norm2);
    rep.coulomb_like = rep.nonnegative && rep.radial_decreasing && scan_finite && t >= 2.0;
    rep.summable = rep.nonnegative && t > 3.0;
    // Σ V̂² |l|^α converges in 3D iff 2t − α > 3.
    rep.alpha_sup = std::min(2.0 * t - 3.0, 2.0);
    rep.alpha_square_summable = rep.nonnegative && rep.even && rep.alpha_sup > 0.0;
    if (rep.alpha_sup < 0.0) rep.alpha_sup = 0.0;
    return rep;
}

}  // namespace fermigas
