#pragma once

#include <stdexcept>
#include <string>

namespace mulgraph {

// Two jump events landed on the same time stamp. Exact ties have probability
// zero under the sampling laws, so construction refuses them instead of
// perturbing; the caller decides whether to resample.
class CollisionError : public std::runtime_error {
public:
    explicit CollisionError(const std::string& what) : std::runtime_error(what) {}
};

// A trial hit a zero-probability float coincidence (e.g. a departure landing
// exactly on an arrival). The trial is invalid but the caller may simply draw
// a fresh one.
class RetryTrial : public std::runtime_error {
public:
    explicit RetryTrial(const std::string& what) : std::runtime_error(what) {}
};

// A simulated path was too short to resolve a first passage or a time change;
// rerun with a longer horizon.
class ExtendHorizon : public std::runtime_error {
public:
    explicit ExtendHorizon(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mulgraph
