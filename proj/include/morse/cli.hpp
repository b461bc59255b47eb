#pragma once

// Command-line front end: `morse <subcommand> <config.json> [-o output]`.
//
// The config is one JSON document whose keys mirror the library's field
// names: "params", exactly one command block named after the subcommand,
// "output" and "format". Every output gets a "<output>.json" sidecar holding
// the fully defaulted config, which reproduces the output when fed back.

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "morse/descriptors.hpp"
#include "morse/integrate.hpp"
#include "morse/model.hpp"

namespace morse::cli {

// Config validation failure; key() names the offending JSON key path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

struct PhasePortraitBlock {
    std::vector<double> levels{0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0};
    std::size_t samples = 401;
    double t_max = 10.0;   // half-width of the time window for open curves
};

struct TrajectoryBlock {
    std::optional<double> h;
    std::optional<PhaseState> s0;
    std::string method = "analytic";   // "analytic" or "numeric"
    double t_start = 0.0;
    double t_end = 10.0;
    std::size_t samples = 101;
    IntegratorConfig integrator;
};

struct PeriodBlock {
    std::vector<double> h;
};

struct ActionAngleBlock {
    std::vector<PhaseState> states;
    std::vector<std::pair<double, double>> action_angles;   // (I, theta)
};

struct HomoclinicBlock {
    double t_start = -5.0;
    double t_end = 5.0;
    std::size_t samples = 11;
};

struct Range {
    double start = 0.0;
    double end = 0.0;
    std::size_t count = 0;
};

struct MelnikovBlock {
    std::optional<Range> t0_range;
    std::vector<double> t0_list;
    double phi0 = 0.0;
    double t_cut = 0.0;         // 0 selects 1e4 / omega
    double tolerance = 1e-10;
};

struct PoincareBlock {
    std::vector<PhaseState> seeds;
    std::size_t iterates = 500;
    double t_start = 0.0;
    IntegratorConfig integrator;
};

struct LdBlock {
    GridSpec grid;
    IntegratorConfig integrator;
    double q_ceiling = 0.0;     // 0 selects the free-flight ceiling (8 / alpha) ln 10
    bool rescale = true;
};

using CommandBlock = std::variant<PhasePortraitBlock, TrajectoryBlock, PeriodBlock,
                                  ActionAngleBlock, HomoclinicBlock, MelnikovBlock,
                                  PoincareBlock, LdBlock>;

struct RunConfig {
    std::string command;
    MorseParams params;
    CommandBlock block;
    std::string output;
    std::string format = "csv";
    std::vector<std::string> defaulted;   // key paths filled from defaults
};

const std::vector<std::string>& subcommands();

// Parses and validates a config for `command`. Throws ConfigError.
RunConfig parse_config(const std::string& command, const nlohmann::json& doc);

// Fully explicit config (every default written out).
nlohmann::json to_json(const RunConfig& cfg);

// Exit codes: 0 success, 1 I/O failure, 2 usage or config error, 3 numeric
// failure (partial outputs removed).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace morse::cli
