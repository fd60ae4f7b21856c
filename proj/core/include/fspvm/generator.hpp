#pragma once

// Random well-typed contracts (and matching property specs) for fuzzing the
// typechecker, the interpreter and the verifier.

#include <cstdint>
#include <string>

#include "fspvm/lolisa.hpp"

namespace fspvm {

struct GenOptions {
    int uint_width = 256;
    /// Scalar state only, no msg/now reads, at most two integer and two
    /// boolean inputs (state plus parameters) to the entry function `f`,
    /// so every input can be enumerated.
    bool verification = false;
};

/// Solidity source; identical for identical arguments.
std::string generate_source(std::uint64_t seed, int size, const GenOptions& opts = {});

/// generate_source, parsed and typechecked.
Contract program_generator(std::uint64_t seed, int size, const GenOptions& opts = {});

/// A property of `entry` over the contract's scalar state, its parameters
/// and result_0, in the spec file format.
std::string generate_spec(std::uint64_t seed, const Contract& c, const std::string& entry = "f");

}  // namespace fspvm
