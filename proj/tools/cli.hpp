#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fspvm/solver.hpp"

namespace fspvm::cli {

enum Exit : int {
    kOk = 0,
    kInputError = 1,  // parse, type, spec or argument errors
    kUsageError = 2,  // I/O, bad flags, bad config
    kReverted = 3,
    kOutOfGas = 4,
    kFalsified = 5,
    kUnknown = 6,
    kFault = 7,
    kDiverged = 8,
};

enum class Format { Text, Json };

struct Config {
    std::size_t mem_size = 100;
    std::uint64_t gas_limit = 1000000;
    int uint_default_width = 256;
    unsigned call_depth_max = 1024;
    std::size_t max_paths = 4096;
    SolverBudget solver;
    Format format = Format::Text;
    bool trace = false;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat `key = value` lines; `#` starts a comment. Keys are the Config
/// field names plus solver_full_range_width, solver_samples, solver_seed,
/// solver_max_assignments, solver_max_steps and solver_timeout_ms.
/// Unknown keys and non-positive numbers throw ConfigError.
void apply_config_text(Config& cfg, const std::string& text, const std::string& origin);
void apply_config_value(Config& cfg, const std::string& key, const std::string& value);
std::vector<std::string> config_keys();

/// Runs one command line; `argv[0]` is the program name.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace fspvm::cli
