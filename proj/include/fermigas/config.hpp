#pragma once

// Run configuration shared by every CLI subcommand. Serializes to JSON and back unchanged.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fermigas/lattice.hpp"
#include "fermigas/observables.hpp"
#include "fermigas/quadrature.hpp"

namespace fermigas {

// Config error naming the offending field; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct OracleOptions {
    std::int64_t cutoff = 1;
    int cap = 6;
    double tol = 1e-20;
    std::vector<double> lambda_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::int64_t max_basis = 1'000'000;
    std::vector<double> couplings;  // optional coupling sweep for residual slopes
};

struct RunConfig {
    std::int64_t shell_cap = 1;
    std::string potential = "coulomb:g=1";
    double coupling_scale = 1.0;
    // q selector: explicit list, or every lattice point with |q|² ≤ q_max_norm2.
    std::vector<Momentum> q_list;
    std::optional<std::int64_t> q_max_norm2;
    bool outside_only = false;
    std::string route = "matrix";  // matrix | integral | series:<n> | all
    QuadratureConfig quadrature{};
    double route_tol = 1e-8;
    bool include_exchange = true;
    std::string exchange_sign = "plus";  // plus | minus
    OracleOptions oracle{};
    std::vector<std::int64_t> shell_caps;  // sweep
    std::vector<double> couplings;         // sweep
    std::string output;                    // empty: stdout
    std::string format = "csv";            // csv | json

    // Throws ConfigError naming the first invalid field.
    void validate() const;

    PotentialSpec potential_spec() const;  // descriptor with coupling_scale applied
    ExchangeSign sign() const;
    // q points selected for a given ball; throws ConfigError when the selector is empty.
    std::vector<Momentum> select_q(const FermiBall& ball) const;
};

nlohmann::json to_json(const RunConfig& cfg);
// Unknown keys and wrongly typed values raise ConfigError; missing keys keep their defaults.
RunConfig config_from_json(const nlohmann::json& j);

Momentum parse_momentum(const std::string& text);  // "x,y,z"

}  // namespace fermigas
