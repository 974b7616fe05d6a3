#pragma once

#include <stdexcept>
#include <string>

namespace stepspike {

/// Malformed or missing input data (files, config values).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inputs parse fine but disagree with each other (span mismatch, date gaps).
class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace stepspike
