#pragma once

// Globally adaptive Gauss–Kronrod (7/15) quadrature, plus the half-line map t = u/(1−u).

#include <functional>

namespace fermigas {

struct QuadratureConfig {
    double abs_tol = 1e-12;
    double rel_tol = 1e-9;
    int max_subdivisions = 2000;

    void validate() const;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int subdivisions = 0;
    bool converged = false;
};

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b, const QuadratureConfig& cfg);

// ∫_0^∞ f(t) dt via u ∈ [0, 1), t = u/(1−u), dt = du/(1−u)².
QuadratureResult integrate_half_line(const std::function<double(double)>& f, const QuadratureConfig& cfg);

}  // namespace fermigas
