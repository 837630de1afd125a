#include "fermigas/quadrature.hpp"

#include <cmath>
#include <queue>
#include <vector>

#include "fermigas/errors.hpp"

namespace fermigas {

void QuadratureConfig::validate() const {
    if (!(abs_tol > 0.0)) throw InvalidArgument("quadrature abs_tol must be positive");
    if (!(rel_tol > 0.0)) throw InvalidArgument("quadrature rel_tol must be positive");
    if (max_subdivisions < 1) throw InvalidArgument("quadrature max_subdivisions must be at least 1");
}

namespace {

// Kronrod abscissae, Kronrod weights, Gauss weights (for the odd-indexed nodes).
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double s = f(c - dx) + f(c + dx);
        kronrod += kWgk[j] * s;
        if (j % 2 == 1) gauss += kWg[j / 2] * s;
    }
    return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b, const QuadratureConfig& cfg) {
    cfg.validate();
    std::priority_queue<Panel> panels;
    Panel first = gk15(f, a, b);
    double total = first.value;
    double err = first.error;
    panels.push(first);
    int subdivisions = 0;
    auto done = [&] { return err <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total)); };
    while (!done() && subdivisions < cfg.max_subdivisions) {
        Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {  // interval exhausted at machine resolution
            panels.push(worst);
            break;
        }
        Panel left = gk15(f, worst.a, mid);
        Panel right = gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
        ++subdivisions;
    }
    // recompute sums to shed accumulated cancellation in the running totals
    double value = 0.0;
    double error = 0.0;
    while (!panels.empty()) {
        value += panels.top().value;
        error += panels.top().error;
        panels.pop();
    }
    const bool ok = error <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(value));
    return {value, error, subdivisions, ok};
}

QuadratureResult integrate_half_line(const std::function<double(double)>& f, const QuadratureConfig& cfg) {
    auto mapped = [&f](double u) {
        const double om = 1.0 - u;
        const double t = u / om;
        return f(t) / (om * om);
    };
    return integrate(mapped, 0.0, 1.0, cfg);
}

}  // namespace fermigas
