#include "fermigas/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <variant>

#include "CLI11.hpp"
#include "fermigas/config.hpp"
#include "fermigas/errors.hpp"
#include "fermigas/fock_oracle.hpp"
#include "fermigas/kernel.hpp"
#include "fermigas/observables.hpp"
#include "fermigas/parallel.hpp"

#ifndef FERMIGAS_VERSION
#define FERMIGAS_VERSION "unknown"
#endif

namespace fermigas {

using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

// ---------------------------------------------------------------- tables

using Cell = std::variant<std::monostate, std::int64_t, double>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void write_csv(std::ostream& os) const {
        for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
        os << '\n';
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) os << ',';
                if (const auto* n = std::get_if<std::int64_t>(&row[i])) os << *n;
                if (const auto* d = std::get_if<double>(&row[i])) os << format_double(*d);
            }
            os << '\n';
        }
    }

    json to_json() const {
        json arr = json::array();
        for (const auto& row : rows) {
            json o = json::object();
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (const auto* n = std::get_if<std::int64_t>(&row[i]))
                    o[columns[i]] = *n;
                else if (const auto* d = std::get_if<double>(&row[i]))
                    o[columns[i]] = *d;
                else
                    o[columns[i]] = nullptr;
            }
            arr.push_back(std::move(o));
        }
        return arr;
    }
};

json momentum_json(const Momentum& p) { return json::array({p.x, p.y, p.z}); }

json meta(const RunConfig& cfg, const std::string& command) {
    return {{"tool", "fermigas"},
            {"version", FERMIGAS_VERSION},
            {"command", command},
            {"potential_fingerprint", cfg.potential_spec().fingerprint()},
            {"tolerances",
             {{"abs_tol", cfg.quadrature.abs_tol},
              {"rel_tol", cfg.quadrature.rel_tol},
              {"max_subdivisions", cfg.quadrature.max_subdivisions},
              {"route_tol", cfg.route_tol},
              {"oracle_tol", cfg.oracle.tol}}},
            {"config", to_json(cfg)}};
}

// Writes to the configured file, or to `out` when no output path is set.
class Sink {
public:
    Sink(const RunConfig& cfg, std::ostream& out) : out_(&out) {
        if (!cfg.output.empty()) {
            file_.open(cfg.output);
            if (!file_) throw ConfigError("output", "cannot open '" + cfg.output + "' for writing");
            out_ = &file_;
        }
    }
    std::ostream& stream() { return *out_; }

private:
    std::ofstream file_;
    std::ostream* out_;
};

void emit_json(const json& j, const RunConfig& cfg, std::ostream& out) {
    Sink sink(cfg, out);
    sink.stream() << j.dump(2) << '\n';
}

std::vector<Cell> q_cells(const FermiBall& ball, const Momentum& q) {
    return {Cell{ball.shell_cap()},
            Cell{ball.kf()},
            Cell{std::int64_t{q.x}},
            Cell{std::int64_t{q.y}},
            Cell{std::int64_t{q.z}},
            Cell{std::sqrt(static_cast<double>(q.norm2()))},
            Cell{excitation_gap(ball, q).value()}};
}

int series_order(const std::string& route) { return route.rfind("series:", 0) == 0 ? std::stoi(route.substr(7)) : 0; }

// Least-squares slope of log|y| against log x; NaN when fewer than two usable points.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(std::abs(y[i]) > 0)) continue;
        const double lx = std::log(x[i]);
        const double ly = std::log(std::abs(y[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return std::nan("");
    const double den = n * sxx - sx * sx;
    return den == 0 ? std::nan("") : (n * sxy - sx * sy) / den;
}

json slope_json(double s) { return std::isnan(s) ? json(nullptr) : json(s); }

// ---------------------------------------------------------------- commands

int cmd_ball(const RunConfig& cfg, std::ostream& out) {
    const FermiBall ball(cfg.shell_cap);
    json pts = json::array();
    for (const auto& p : ball.points()) pts.push_back(momentum_json(p));
    json j = {{"meta", meta(cfg, "ball")},
              {"shell_cap", ball.shell_cap()},
              {"N", ball.n_particles()},
              {"kf", ball.kf()},
              {"min_outside_norm2", ball.min_outside_norm2()},
              {"points", pts}};
    emit_json(j, cfg, out);
    return kExitOk;
}

int cmd_rpa(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const FermiBall ball(cfg.shell_cap);
    const auto qs = cfg.select_q(ball);
    const PotentialSpec spec = cfg.potential_spec();
    const KernelFamily family(ball, spec);
    const bool want_matrix = cfg.route == "matrix" || cfg.route == "all";
    const bool want_integral = cfg.route == "integral" || cfg.route == "all";
    const int order = series_order(cfg.route);

    Table t;
    t.columns = {"shell_cap", "kf",       "qx",  "qy",      "qz", "norm_q", "e_q", "n_rpa_matrix", "n_rpa_integral",
                 "n_ex",      "n_total"};
    double max_disc = 0.0;
    for (const auto& q : qs) {
        auto row = q_cells(ball, q);
        Cell matrix, integral, ex;
        double n_rpa = 0.0;
        if (want_matrix) n_rpa = std::get<double>(matrix = n_rpa_matrix(family, q).n_rpa);
        if (order > 0) n_rpa = std::get<double>(matrix = n_rpa_series(family, q, order).n_rpa);
        if (want_integral) {
            const double v = n_rpa_integral(ball, spec, q, cfg.quadrature).n_rpa;
            integral = v;
            if (want_matrix)
                max_disc = std::max(max_disc, std::abs(v - n_rpa));
            else
                n_rpa = v;
        }
        double n_ex = 0.0;
        if (cfg.include_exchange) ex = n_ex = n_exchange(family, q).n_ex;
        const double signed_ex = cfg.sign() == ExchangeSign::plus ? n_ex : -n_ex;
        const double total = ball.contains(q) ? 1.0 - n_rpa - signed_ex : n_rpa + signed_ex;
        if (!(total >= -1e-9 && total <= 1.0 + 1e-9))
            throw InvariantViolation("n_total at " + q.str() + " left [0, 1]: " + format_double(total));
        row.insert(row.end(), {matrix, integral, ex, Cell{total}});
        t.rows.push_back(std::move(row));
    }

    if (cfg.format == "json") {
        json j = {{"meta", meta(cfg, "rpa")}, {"rows", t.to_json()}};
        if (cfg.route == "all") j["max_route_discrepancy"] = max_disc;
        emit_json(j, cfg, out);
    } else {
        Sink sink(cfg, out);
        t.write_csv(sink.stream());
    }
    if (cfg.route == "all") err << "max_route_discrepancy=" << format_double(max_disc) << '\n';
    return kExitOk;
}

int cmd_exchange(const RunConfig& cfg, std::ostream& out) {
    const FermiBall ball(cfg.shell_cap);
    const auto qs = cfg.select_q(ball);
    const KernelFamily family(ball, cfg.potential_spec());
    Table t;
    t.columns = {"shell_cap", "kf", "qx", "qy", "qz", "norm_q", "e_q", "n_ex", "n_ex_m1", "difference"};
    for (const auto& q : qs) {
        auto row = q_cells(ball, q);
        const auto ex = n_exchange(family, q);
        row.insert(row.end(), {Cell{ex.n_ex}, Cell{ex.n_ex_m1}, Cell{ex.difference}});
        t.rows.push_back(std::move(row));
    }
    if (cfg.format == "json") {
        emit_json({{"meta", meta(cfg, "exchange")}, {"rows", t.to_json()}}, cfg, out);
    } else {
        Sink sink(cfg, out);
        t.write_csv(sink.stream());
    }
    return kExitOk;
}

int cmd_continuum(const RunConfig& cfg, std::ostream& out) {
    const FermiBall ball(cfg.shell_cap);
    const auto qs = cfg.select_q(ball);
    const PotentialSpec spec = cfg.potential_spec();
    if (!spec.is_radial()) throw ConfigError("potential", "the continuum formula needs a radial potential");
    for (const auto& q : qs)
        if (!(std::sqrt(static_cast<double>(q.norm2())) > ball.kf()))
            throw ConfigError("q", "continuum comparison needs |q| > k_F, got " + q.str());
    Table t;
    t.columns = {"shell_cap", "kf", "qx", "qy", "qz", "norm_q", "e_q", "kf2_n_discrete", "kf2_n_continuum",
                 "relative_gap"};
    const double kf2 = ball.kf() * ball.kf();
    for (const auto& q : qs) {
        auto row = q_cells(ball, q);
        const double nd = n_rpa_integral(ball, spec, q, cfg.quadrature).n_rpa;
        const double nc = n_rpa_continuum(spec, ball.kf(), {double(q.x), double(q.y), double(q.z)},
                                          std::sqrt(static_cast<double>(q.norm2())));
        const double gap = nc != 0.0 ? std::abs(nd - nc) / std::abs(nc) : 0.0;
        row.insert(row.end(), {Cell{kf2 * nd}, Cell{kf2 * nc}, Cell{gap}});
        t.rows.push_back(std::move(row));
    }
    if (cfg.format == "json") {
        emit_json({{"meta", meta(cfg, "continuum")}, {"rows", t.to_json()}}, cfg, out);
    } else {
        Sink sink(cfg, out);
        t.write_csv(sink.stream());
    }
    return kExitOk;
}

json oracle_rows_json(const OracleRun& run) {
    json rows = json::array();
    for (const auto& r : run.rows)
        rows.push_back({{"q", momentum_json(r.q)},
                        {"inside_ball", r.inside_ball},
                        {"n_exact", r.n_exact},
                        {"n_rpa_trunc", r.n_rpa_trunc},
                        {"n_ex_trunc", r.n_ex_trunc},
                        {"residual", r.residual},
                        {"residual_minus", r.residual_minus}});
    return rows;
}

json oracle_moments_json(const OracleRun& run) {
    json ms = json::array();
    for (const auto& m : run.moments)
        ms.push_back({{"lambda", m.lambda},
                      {"moments", std::vector<double>(std::begin(m.moment), std::end(m.moment))},
                      {"norm_deviation", m.norm_deviation},
                      {"particle_hole_gap", m.particle_hole_gap}});
    return ms;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out) {
    const FermiBall ball(cfg.shell_cap);
    const PotentialSpec base = parse_potential(cfg.potential);
    std::vector<Momentum> qs;
    if (!cfg.q_list.empty() || cfg.q_max_norm2) qs = cfg.select_q(ball);
    std::vector<double> couplings = cfg.oracle.couplings;
    if (couplings.empty()) couplings.push_back(cfg.coupling_scale);

    std::vector<OracleRun> runs;
    for (double s : couplings)
        runs.push_back(run_oracle(ball, base.with_scale(s), cfg.oracle.cutoff, cfg.oracle.cap, cfg.oracle.tol,
                                  cfg.oracle.lambda_grid, static_cast<std::size_t>(cfg.oracle.max_basis), qs));
    const OracleRun& first = runs.front();

    json modes = json::array();
    for (const auto& m : first.modes.modes) modes.push_back(momentum_json(m));
    json j = {{"meta", meta(cfg, "oracle")},
              {"modes", modes},
              {"dim", first.dim},
              {"nnz", first.nnz},
              {"cap", first.cap},
              {"tol", first.tol},
              {"coupling_scale", couplings.front()},
              {"per_q", oracle_rows_json(first)},
              {"moments", oracle_moments_json(first)},
              {"xi", first.xi},
              {"max_truncation_error", first.max_truncation_error}};
    if (runs.size() > 1) {
        json sweep = json::array();
        for (std::size_t i = 0; i < runs.size(); ++i)
            sweep.push_back({{"coupling_scale", couplings[i]},
                             {"per_q", oracle_rows_json(runs[i])},
                             {"xi", runs[i].xi}});
        j["sweep"] = sweep;
        json slopes = json::array();
        for (std::size_t k = 0; k < first.rows.size(); ++k) {
            std::vector<double> res, res_minus, rpa;
            for (const auto& r : runs) {
                res.push_back(r.rows[k].residual);
                res_minus.push_back(r.rows[k].residual_minus);
                rpa.push_back(r.rows[k].n_rpa_trunc);
            }
            slopes.push_back({{"q", momentum_json(first.rows[k].q)},
                              {"residual", slope_json(loglog_slope(couplings, res))},
                              {"residual_minus", slope_json(loglog_slope(couplings, res_minus))},
                              {"n_rpa_trunc", slope_json(loglog_slope(couplings, rpa))}});
        }
        j["slopes"] = slopes;
        std::vector<double> xis;
        for (const auto& r : runs) xis.push_back(r.xi);
        j["xi_slope"] = slope_json(loglog_slope(couplings, xis));
    }
    emit_json(j, cfg, out);

    for (const auto& r : runs)
        for (const auto& m : r.moments)
            if (m.particle_hole_gap > 1e-10) return kExitInvariantFailure;
    return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::vector<std::int64_t> caps = cfg.shell_caps;
    if (caps.empty()) caps.push_back(cfg.shell_cap);
    std::vector<double> couplings = cfg.couplings;
    if (couplings.empty()) couplings.push_back(cfg.coupling_scale);
    const PotentialSpec base = parse_potential(cfg.potential);
    const int order = series_order(cfg.route);

    struct Item {
        std::size_t cap_idx, coupling_idx;
        Momentum q;
        double n_rpa = 0.0;
    };
    std::vector<FermiBall> balls;
    std::vector<Item> items;
    for (std::size_t c = 0; c < caps.size(); ++c) {
        balls.emplace_back(caps[c]);
        const auto qs = cfg.select_q(balls.back());  // validates before any compute
        for (std::size_t s = 0; s < couplings.size(); ++s)
            for (const auto& q : qs) items.push_back({c, s, q});
    }
    std::vector<std::unique_ptr<KernelFamily>> families;
    for (std::size_t c = 0; c < caps.size(); ++c)
        for (std::size_t s = 0; s < couplings.size(); ++s)
            families.push_back(std::make_unique<KernelFamily>(balls[c], base.with_scale(couplings[s])));

    parallel_for(items.size(), [&](std::size_t i) {
        auto& it = items[i];
        const FermiBall& ball = balls[it.cap_idx];
        const KernelFamily& fam = *families[it.cap_idx * couplings.size() + it.coupling_idx];
        if (cfg.route == "integral")
            it.n_rpa = n_rpa_integral(ball, fam.potential(), it.q, cfg.quadrature).n_rpa;
        else if (order > 0)
            it.n_rpa = n_rpa_series(fam, it.q, order).n_rpa;
        else
            it.n_rpa = n_rpa_matrix(fam, it.q).n_rpa;
    });

    Table t;
    t.columns = {"shell_cap", "coupling_scale", "kf", "qx", "qy", "qz", "norm_q", "e_q", "n_rpa", "n_rpa_e_kf"};
    std::vector<std::vector<double>> max_scaled(caps.size(), std::vector<double>(couplings.size(), 0.0));
    for (const auto& it : items) {
        const FermiBall& ball = balls[it.cap_idx];
        const double e = excitation_gap(ball, it.q).value();
        const double scaled = it.n_rpa * e * ball.kf();
        max_scaled[it.cap_idx][it.coupling_idx] = std::max(max_scaled[it.cap_idx][it.coupling_idx], scaled);
        auto cells = q_cells(ball, it.q);
        cells.insert(cells.begin() + 1, Cell{couplings[it.coupling_idx]});
        cells.insert(cells.end(), {Cell{it.n_rpa}, Cell{scaled}});
        t.rows.push_back(std::move(cells));
    }

    json summary = json::array();
    for (std::size_t c = 0; c < caps.size(); ++c)
        for (std::size_t s = 0; s < couplings.size(); ++s)
            summary.push_back({{"shell_cap", caps[c]},
                               {"coupling_scale", couplings[s]},
                               {"max_n_rpa_e_kf", max_scaled[c][s]}});
    json slopes = json::array();
    if (couplings.size() > 1) {
        // items are grouped (cap, coupling, q); gather each (cap, q) across couplings
        for (std::size_t c = 0; c < caps.size(); ++c) {
            const auto qs = cfg.select_q(balls[c]);
            for (std::size_t k = 0; k < qs.size(); ++k) {
                std::vector<double> ys;
                for (const auto& it : items)
                    if (it.cap_idx == c && it.q == qs[k]) ys.push_back(it.n_rpa);
                slopes.push_back({{"shell_cap", caps[c]},
                                  {"q", momentum_json(qs[k])},
                                  {"n_rpa_slope", slope_json(loglog_slope(couplings, ys))}});
            }
        }
    }

    if (cfg.format == "json") {
        emit_json({{"meta", meta(cfg, "sweep")}, {"rows", t.to_json()}, {"max_n_rpa_e_kf", summary}, {"slopes", slopes}},
                  cfg, out);
    } else {
        Sink sink(cfg, out);
        t.write_csv(sink.stream());
        for (const auto& s : summary)
            err << "# max_n_rpa_e_kf shell_cap=" << s["shell_cap"].get<std::int64_t>()
                << " coupling_scale=" << format_double(s["coupling_scale"].get<double>())
                << " value=" << format_double(s["max_n_rpa_e_kf"].get<double>()) << '\n';
        for (const auto& s : slopes) {
            err << "# n_rpa_slope shell_cap=" << s["shell_cap"].get<std::int64_t>() << " q=" << s["q"].dump()
                << " slope=" << (s["n_rpa_slope"].is_null() ? "nan" : format_double(s["n_rpa_slope"].get<double>()))
                << '\n';
        }
    }
    return kExitOk;
}

struct Check {
    std::string name;
    bool passed = true;
    double measured = 0.0;
    double threshold = 0.0;
    std::string detail;
};

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
    const FermiBall ball(cfg.shell_cap);
    const PotentialSpec spec = cfg.potential_spec();
    std::vector<Momentum> qs;
    if (!cfg.q_list.empty() || cfg.q_max_norm2) {
        qs = cfg.select_q(ball);
    } else {
        RunConfig dflt = cfg;
        dflt.q_max_norm2 = std::max<std::int64_t>(4, 4 * cfg.shell_cap);
        qs = dflt.select_q(ball);
    }
    std::vector<Check> checks;

    {
        const auto range = std::max<std::int64_t>(4, static_cast<std::int64_t>(std::ceil(2 * ball.kf() + 2)));
        const auto rep = verify_hypotheses(spec, range);
        std::size_t neg = 0, odd = 0;
        std::string first_odd;
        for (const auto& v : rep.violations) {
            if (v.kind == "negative") ++neg;
            if (v.kind == "odd") {
                if (first_odd.empty()) first_odd = v.at.str();
                ++odd;
            }
        }
        checks.push_back({"potential.nonnegative", neg == 0, double(neg), 0.0, "violations on |l| <= " + std::to_string(range)});
        checks.push_back({"potential.even", odd == 0, double(odd), 0.0,
                          odd ? "first odd pair at " + first_odd : "V(l) = V(-l) on |l| <= " + std::to_string(range)});
    }

    const KernelFamily family(ball, spec);
    {
        double worst = 0.0;
        for (const auto& q : qs)
            for (const auto& l : relevant_shifts(ball, q)) {
                const auto k = family.get(l);
                if (k->empty()) continue;
                worst = std::max(worst, (k->K - k->K.transpose()).cwiseAbs().maxCoeff());
            }
        checks.push_back({"kernel.symmetric", worst <= 1e-14, worst, 1e-14, "max |K - K^T|"});
    }
    {
        double worst = 0.0, worst_range = 0.0, worst_reflect = 0.0;
        for (const auto& q : qs) {
            const double a = n_rpa_matrix(family, q).n_rpa;
            const double b = n_rpa_integral(ball, spec, q, cfg.quadrature).n_rpa;
            worst = std::max(worst, std::abs(a - b));
            const auto md = momentum_distribution(family, q, cfg.include_exchange, cfg.sign());
            worst_range = std::max({worst_range, -md.n, md.n - 1.0});
            const auto mr = momentum_distribution(family, -q, cfg.include_exchange, cfg.sign());
            worst_reflect = std::max(worst_reflect, std::abs(md.n - mr.n));
        }
        checks.push_back({"routes.matrix_vs_integral", worst <= cfg.route_tol, worst, cfg.route_tol,
                          "max |n_rpa_matrix - n_rpa_integral| over " + std::to_string(qs.size()) + " q"});
        checks.push_back({"observables.unit_interval", worst_range <= 1e-9, std::max(0.0, worst_range), 1e-9,
                          "n(q) in [0, 1]"});
        checks.push_back({"observables.reflection", worst_reflect <= 1e-10, worst_reflect, 1e-10, "|n(q) - n(-q)|"});
    }
    {
        const ModeSet modes = build_mode_set(ball, cfg.oracle.cutoff);
        if (modes.size() <= kMaxModes) {
            const OracleRun run = run_oracle(ball, spec, cfg.oracle.cutoff, cfg.oracle.cap, cfg.oracle.tol,
                                             cfg.oracle.lambda_grid, static_cast<std::size_t>(cfg.oracle.max_basis));
            double ph = 0.0, norm = 0.0, reflect = 0.0;
            for (const auto& m : run.moments) {
                ph = std::max(ph, m.particle_hole_gap);
                norm = std::max(norm, m.norm_deviation);
            }
            for (const auto& r : run.rows)
                for (const auto& s : run.rows)
                    if (s.q == -r.q) reflect = std::max(reflect, std::abs(r.n_exact - s.n_exact));
            const double norm_tol = std::max(1e-12, cfg.oracle.tol);
            checks.push_back({"oracle.particle_hole_sum_rule", ph <= 1e-10, ph, 1e-10, "over the lambda grid"});
            checks.push_back({"oracle.norm", norm <= norm_tol, norm, norm_tol, "| ||xi|| - 1 |"});
            checks.push_back({"oracle.reflection", reflect <= 1e-10, reflect, 1e-10, "|n_exact(q) - n_exact(-q)|"});
        } else {
            checks.push_back({"oracle.skipped", true, double(modes.size()), double(kMaxModes), "mode set too large"});
        }
    }

    bool all = true;
    for (const auto& c : checks) all = all && c.passed;
    if (cfg.format == "json") {
        json arr = json::array();
        for (const auto& c : checks)
            arr.push_back({{"name", c.name},
                           {"passed", c.passed},
                           {"measured", c.measured},
                           {"threshold", c.threshold},
                           {"detail", c.detail}});
        emit_json({{"meta", meta(cfg, "verify")}, {"checks", arr}, {"passed", all}}, cfg, out);
    } else {
        Sink sink(cfg, out);
        sink.stream() << "check,passed,measured,threshold,detail\n";
        for (const auto& c : checks)
            sink.stream() << c.name << ',' << (c.passed ? "true" : "false") << ',' << format_double(c.measured) << ','
                          << format_double(c.threshold) << ",\"" << c.detail << "\"\n";
    }
    return all ? kExitOk : kExitInvariantFailure;
}

// ---------------------------------------------------------------- argument parsing

struct Flags {
    std::string config_path;
    std::int64_t shell_cap = 0;
    std::string potential;
    double coupling_scale = 0;
    std::vector<std::string> q;
    std::int64_t q_max_norm2 = 0;
    bool outside_only = false;
    std::string route;
    double abs_tol = 0, rel_tol = 0;
    int max_subdivisions = 0;
    double route_tol = 0;
    bool no_exchange = false;
    std::string exchange_sign;
    std::int64_t cutoff = 0;
    int cap = 0;
    double tol = 0;
    std::vector<double> lambda_grid;
    std::int64_t max_basis = 0;
    std::vector<double> oracle_couplings;
    std::vector<std::int64_t> shell_caps;
    std::vector<double> couplings;
    std::string output;
    std::string format;
    bool dump_config = false;
};

void add_flags(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config_path, "JSON run configuration; flags override its values");
    sub->add_option("--shell-cap", f.shell_cap, "maximal |k|^2 inside the Fermi ball");
    sub->add_option("--potential", f.potential, "coulomb:g=1 | yukawa:g=1,p=2 | zero | skewed:g=1,eps=0.1");
    sub->add_option("--coupling-scale", f.coupling_scale, "global multiplier on the potential");
    sub->add_option("--q", f.q, "momentum x,y,z (repeatable)");
    sub->add_option("--q-max-norm2", f.q_max_norm2, "select every q with |q|^2 <= value");
    sub->add_flag("--outside-only", f.outside_only, "drop q inside the Fermi ball");
    sub->add_option("--route", f.route, "matrix | integral | series:<n> | all");
    sub->add_option("--abs-tol", f.abs_tol, "quadrature absolute tolerance");
    sub->add_option("--rel-tol", f.rel_tol, "quadrature relative tolerance");
    sub->add_option("--max-subdivisions", f.max_subdivisions, "quadrature subdivision budget");
    sub->add_option("--route-tol", f.route_tol, "verify: allowed |matrix - integral|");
    sub->add_flag("--no-exchange", f.no_exchange, "omit n_ex");
    sub->add_option("--exchange-sign", f.exchange_sign, "plus | minus");
    sub->add_option("--cutoff", f.cutoff, "oracle shift cutoff |l|^2");
    sub->add_option("--cap", f.cap, "oracle particle-number cap (even)");
    sub->add_option("--tol", f.tol, "oracle exponential-action tolerance");
    sub->add_option("--lambda-grid", f.lambda_grid, "oracle lambda grid")->delimiter(',');
    sub->add_option("--max-basis", f.max_basis, "oracle basis-size limit");
    sub->add_option("--oracle-couplings", f.oracle_couplings, "oracle coupling sweep")->delimiter(',');
    sub->add_option("--shell-caps", f.shell_caps, "sweep shell caps")->delimiter(',');
    sub->add_option("--couplings", f.couplings, "sweep coupling scales")->delimiter(',');
    sub->add_option("-o,--output", f.output, "output file (default stdout)");
    sub->add_option("--format", f.format, "csv | json");
    sub->add_flag("--dump-config", f.dump_config, "print the resolved configuration and exit");
}

RunConfig resolve(const CLI::App* sub, const Flags& f) {
    RunConfig cfg;
    if (sub->count("--config")) {
        std::ifstream in(f.config_path);
        if (!in) throw ConfigError("config", "cannot read '" + f.config_path + "'");
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw ConfigError("config", std::string("malformed JSON: ") + e.what());
        }
        cfg = config_from_json(j);
    }
    auto given = [&](const char* name) { return sub->count(name) > 0; };
    if (given("--shell-cap")) cfg.shell_cap = f.shell_cap;
    if (given("--potential")) cfg.potential = f.potential;
    if (given("--coupling-scale")) cfg.coupling_scale = f.coupling_scale;
    if (given("--q")) {
        cfg.q_list.clear();
        for (const auto& s : f.q) cfg.q_list.push_back(parse_momentum(s));
    }
    if (given("--q-max-norm2")) cfg.q_max_norm2 = f.q_max_norm2;
    if (given("--outside-only")) cfg.outside_only = f.outside_only;
    if (given("--route")) cfg.route = f.route;
    if (given("--abs-tol")) cfg.quadrature.abs_tol = f.abs_tol;
    if (given("--rel-tol")) cfg.quadrature.rel_tol = f.rel_tol;
    if (given("--max-subdivisions")) cfg.quadrature.max_subdivisions = f.max_subdivisions;
    if (given("--route-tol")) cfg.route_tol = f.route_tol;
    if (given("--no-exchange")) cfg.include_exchange = false;
    if (given("--exchange-sign")) cfg.exchange_sign = f.exchange_sign;
    if (given("--cutoff")) cfg.oracle.cutoff = f.cutoff;
    if (given("--cap")) cfg.oracle.cap = f.cap;
    if (given("--tol")) cfg.oracle.tol = f.tol;
    if (given("--lambda-grid")) cfg.oracle.lambda_grid = f.lambda_grid;
    if (given("--max-basis")) cfg.oracle.max_basis = f.max_basis;
    if (given("--oracle-couplings")) cfg.oracle.couplings = f.oracle_couplings;
    if (given("--shell-caps")) cfg.shell_caps = f.shell_caps;
    if (given("--couplings")) cfg.couplings = f.couplings;
    if (given("--output")) cfg.output = f.output;
    if (given("--format")) cfg.format = f.format;
    cfg.validate();
    return cfg;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Momentum distribution of the bosonized Fermi-gas trial state"};
    app.name("fermigas");
    app.require_subcommand(1);
    Flags flags;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"ball", "Fermi ball summary (JSON)"},
        {"rpa", "n_rpa by matrix, integral or series route"},
        {"exchange", "exchange term and its kernel counterpart"},
        {"continuum", "discrete n_rpa against the continuum formula"},
        {"oracle", "exact truncated Fock-space reference"},
        {"sweep", "shell-cap and coupling sweeps"},
        {"verify", "invariant suite; exit 1 if any check fails"},
    };
    std::vector<CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        add_flags(sub, flags);
        subs.push_back(sub);
    }

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        for (auto* sub : subs) {
            if (!sub->parsed()) continue;
            const RunConfig cfg = resolve(sub, flags);
            if (flags.dump_config) {
                out << to_json(cfg).dump(2) << '\n';
                return kExitOk;
            }
            const std::string name = sub->get_name();
            if (name == "ball") return cmd_ball(cfg, out);
            if (name == "rpa") return cmd_rpa(cfg, out, err);
            if (name == "exchange") return cmd_exchange(cfg, out);
            if (name == "continuum") return cmd_continuum(cfg, out);
            if (name == "oracle") return cmd_oracle(cfg, out);
            if (name == "sweep") return cmd_sweep(cfg, out, err);
            if (name == "verify") return cmd_verify(cfg, out);
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const InvalidArgument& e) {
        err << "invalid argument: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const ConvergenceError& e) {
        err << "non-convergence: " << e.what() << " (achieved " << format_double(e.achieved()) << ", shift "
            << e.worst_shift().str() << ")\n";
        return kExitNonConvergence;
    } catch (const NumericDomainError& e) {
        err << "numeric error: " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const ResourceLimitError& e) {
        err << "resource limit: " << e.what() << '\n';
        return kExitResourceGuard;
    } catch (const InvariantViolation& e) {
        err << "invariant violated: " << e.what() << '\n';
        return kExitInvariantFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvariantFailure;
    }
    return kExitConfigError;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, out, err);
}

}  // namespace fermigas
