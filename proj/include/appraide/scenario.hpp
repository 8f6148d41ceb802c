#pragma once

// Text scenarios driving the simulator, with embedded assertions.
//
//   seed 42
//   0 register alice pw1234 apprenant
//   5 publish alice demande-aide maths lycee class:camarades dist:non "..."
//   9 assert renders bobby alice#1
//
// One command per line, `#` starts a comment, ticks never decrease.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "appraide/sim.hpp"

namespace appraide::scenario {

class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

struct Command {
    int line = 0;
    std::int64_t tick = 0;
    std::string name;
    std::vector<std::string> args;              // positional, quotes removed
    std::map<std::string, std::string> options;  // key:value tokens
    std::string text;                            // source line without comment
};

struct Scenario {
    std::uint64_t seed = 1;
    std::vector<Command> commands;
};

/// Names accepted after the tick.
const std::vector<std::string_view>& command_names();

Scenario parse_scenario(std::string_view text);

struct Entry {
    int line = 0;
    std::string text;
    bool passed = false;
    std::string detail;
};

struct Report {
    std::uint64_t seed = 0;
    std::vector<Entry> entries;  // asserts and unexpected command failures
    std::vector<std::string> violations;
    std::string world_digest;
    std::string trace;
    std::string world_dump;

    bool passed() const;
    std::string str() const;
};

/// Runs every command at its tick, then drains the event queue and runs the
/// end-of-run scanners.
Report run_scenario(const Scenario& scenario, std::optional<std::uint64_t> seed_override = std::nullopt,
                    sim::Config config = {});

/// Same, on a caller-owned world (seeded by the caller).
Report run_scenario_on(sim::World& world, const Scenario& scenario);

}  // namespace appraide::scenario
