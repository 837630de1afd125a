#include "fermigas/config.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "fermigas/errors.hpp"

namespace fermigas {

using nlohmann::json;

Momentum parse_momentum(const std::string& text) {
    std::stringstream ss(text);
    std::string part;
    std::vector<int> v;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t used = 0;
            const int x = std::stoi(part, &used);
            if (used != part.size()) throw std::invalid_argument(part);
            v.push_back(x);
        } catch (const std::exception&) {
            throw ConfigError("q", "cannot parse '" + text + "' as x,y,z");
        }
    }
    if (v.size() != 3) throw ConfigError("q", "expected three integers in '" + text + "'");
    return {v[0], v[1], v[2]};
}

namespace {

int series_order(const std::string& route) {
    const std::string prefix = "series:";
    if (route.rfind(prefix, 0) != 0) return 0;
    try {
        std::size_t used = 0;
        const std::string tail = route.substr(prefix.size());
        const int n = std::stoi(tail, &used);
        if (used != tail.size()) return -1;
        return n;
    } catch (const std::exception&) {
        return -1;
    }
}

void require(bool ok, const char* field, const std::string& what) {
    if (!ok) throw ConfigError(field, what);
}

}  // namespace

void RunConfig::validate() const {
    require(shell_cap >= 0, "shell_cap", "must be a nonnegative integer");
    require(shell_cap <= 10'000, "shell_cap", "must be at most 10000");
    try {
        (void)potential_spec();
    } catch (const std::exception& e) {
        throw ConfigError(std::isfinite(coupling_scale) && coupling_scale >= 0 ? "potential" : "coupling_scale",
                          e.what());
    }
    if (q_max_norm2) require(*q_max_norm2 >= 0, "q_max_norm2", "must be nonnegative");
    if (route != "matrix" && route != "integral" && route != "all") {
        const int n = series_order(route);
        require(n >= 2 && n % 2 == 0, "route", "expected matrix, integral, all or series:<even n ≥ 2>");
    }
    require(quadrature.abs_tol > 0 && std::isfinite(quadrature.abs_tol), "quadrature.abs_tol", "must be positive");
    require(quadrature.rel_tol > 0 && std::isfinite(quadrature.rel_tol), "quadrature.rel_tol", "must be positive");
    require(quadrature.max_subdivisions >= 1, "quadrature.max_subdivisions", "must be at least 1");
    require(route_tol > 0 && std::isfinite(route_tol), "route_tol", "must be positive");
    require(exchange_sign == "plus" || exchange_sign == "minus", "exchange_sign", "expected plus or minus");
    require(oracle.cutoff >= 1, "oracle.cutoff", "must be at least 1");
    require(oracle.cap >= 0 && oracle.cap % 2 == 0, "oracle.cap", "must be a nonnegative even integer");
    require(oracle.tol > 0 && std::isfinite(oracle.tol), "oracle.tol", "must be positive");
    require(!oracle.lambda_grid.empty(), "oracle.lambda_grid", "must not be empty");
    for (double l : oracle.lambda_grid) require(l >= 0.0 && l <= 1.0, "oracle.lambda_grid", "values must lie in [0, 1]");
    require(oracle.max_basis >= 1, "oracle.max_basis", "must be positive");
    for (double s : oracle.couplings) require(s > 0 && std::isfinite(s), "oracle.couplings", "values must be positive");
    for (auto c : shell_caps) require(c >= 0 && c <= 10'000, "shell_caps", "values must lie in [0, 10000]");
    for (double s : couplings) require(s > 0 && std::isfinite(s), "couplings", "values must be positive");
    require(format == "csv" || format == "json", "format", "expected csv or json");
}

PotentialSpec RunConfig::potential_spec() const { return parse_potential(potential).with_scale(coupling_scale); }

ExchangeSign RunConfig::sign() const { return exchange_sign == "minus" ? ExchangeSign::minus : ExchangeSign::plus; }

std::vector<Momentum> RunConfig::select_q(const FermiBall& ball) const {
    std::set<Momentum, CanonicalLess> out;
    for (const auto& q : q_list)
        if (!outside_only || !ball.contains(q)) out.insert(q);
    if (q_max_norm2) {
        const int r = static_cast<int>(std::floor(std::sqrt(static_cast<double>(*q_max_norm2))));
        for (int x = -r; x <= r; ++x)
            for (int y = -r; y <= r; ++y)
                for (int z = -r; z <= r; ++z) {
                    const Momentum q{x, y, z};
                    if (q.norm2() <= *q_max_norm2 && (!outside_only || !ball.contains(q))) out.insert(q);
                }
    }
    if (out.empty()) throw ConfigError("q", "the q selector is empty");
    return {out.begin(), out.end()};
}

json to_json(const RunConfig& c) {
    json q = json::array();
    for (const auto& p : c.q_list) q.push_back({p.x, p.y, p.z});
    json j = {
        {"shell_cap", c.shell_cap},
        {"potential", c.potential},
        {"coupling_scale", c.coupling_scale},
        {"q", q},
        {"q_max_norm2", c.q_max_norm2 ? json(*c.q_max_norm2) : json(nullptr)},
        {"outside_only", c.outside_only},
        {"route", c.route},
        {"quadrature",
         {{"abs_tol", c.quadrature.abs_tol},
          {"rel_tol", c.quadrature.rel_tol},
          {"max_subdivisions", c.quadrature.max_subdivisions}}},
        {"route_tol", c.route_tol},
        {"include_exchange", c.include_exchange},
        {"exchange_sign", c.exchange_sign},
        {"oracle",
         {{"cutoff", c.oracle.cutoff},
          {"cap", c.oracle.cap},
          {"tol", c.oracle.tol},
          {"lambda_grid", c.oracle.lambda_grid},
          {"max_basis", c.oracle.max_basis},
          {"couplings", c.oracle.couplings}}},
        {"shell_caps", c.shell_caps},
        {"couplings", c.couplings},
        {"output", c.output},
        {"format", c.format},
    };
    return j;
}

namespace {

template <class T>
void read(const json& j, const char* key, T& out, const std::string& field) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(field, std::string("wrong type: ") + e.what());
    }
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& prefix) {
    if (!j.is_object()) throw ConfigError(prefix.empty() ? "config" : prefix, "expected a JSON object");
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) throw ConfigError(prefix + k, "unknown field");
}

}  // namespace

RunConfig config_from_json(const json& j) {
    reject_unknown(j,
                   {"shell_cap", "potential", "coupling_scale", "q", "q_max_norm2", "outside_only", "route",
                    "quadrature", "route_tol", "include_exchange", "exchange_sign", "oracle", "shell_caps",
                    "couplings", "output", "format"},
                   "");
    RunConfig c;
    read(j, "shell_cap", c.shell_cap, "shell_cap");
    read(j, "potential", c.potential, "potential");
    read(j, "coupling_scale", c.coupling_scale, "coupling_scale");
    if (j.contains("q")) {
        const auto& q = j.at("q");
        if (!q.is_array()) throw ConfigError("q", "expected a list of [x, y, z]");
        for (const auto& p : q) {
            if (!p.is_array() || p.size() != 3) throw ConfigError("q", "expected a list of [x, y, z]");
            try {
                c.q_list.push_back({p[0].get<int>(), p[1].get<int>(), p[2].get<int>()});
            } catch (const json::exception&) {
                throw ConfigError("q", "coordinates must be integers");
            }
        }
    }
    if (j.contains("q_max_norm2") && !j.at("q_max_norm2").is_null()) {
        std::int64_t v = 0;
        read(j, "q_max_norm2", v, "q_max_norm2");
        c.q_max_norm2 = v;
    }
    read(j, "outside_only", c.outside_only, "outside_only");
    read(j, "route", c.route, "route");
    if (j.contains("quadrature")) {
        const auto& q = j.at("quadrature");
        reject_unknown(q, {"abs_tol", "rel_tol", "max_subdivisions"}, "quadrature.");
        read(q, "abs_tol", c.quadrature.abs_tol, "quadrature.abs_tol");
        read(q, "rel_tol", c.quadrature.rel_tol, "quadrature.rel_tol");
        read(q, "max_subdivisions", c.quadrature.max_subdivisions, "quadrature.max_subdivisions");
    }
    read(j, "route_tol", c.route_tol, "route_tol");
    read(j, "include_exchange", c.include_exchange, "include_exchange");
    read(j, "exchange_sign", c.exchange_sign, "exchange_sign");
    if (j.contains("oracle")) {
        const auto& o = j.at("oracle");
        reject_unknown(o, {"cutoff", "cap", "tol", "lambda_grid", "max_basis", "couplings"}, "oracle.");
        read(o, "cutoff", c.oracle.cutoff, "oracle.cutoff");
        read(o, "cap", c.oracle.cap, "oracle.cap");
        read(o, "tol", c.oracle.tol, "oracle.tol");
        read(o, "lambda_grid", c.oracle.lambda_grid, "oracle.lambda_grid");
        read(o, "max_basis", c.oracle.max_basis, "oracle.max_basis");
        read(o, "couplings", c.oracle.couplings, "oracle.couplings");
    }
    read(j, "shell_caps", c.shell_caps, "shell_caps");
    read(j, "couplings", c.couplings, "couplings");
    read(j, "output", c.output, "output");
    read(j, "format", c.format, "format");
    return c;
}

}  // namespace fermigas
