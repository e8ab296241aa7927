#pragma once

#include <stdexcept>

namespace ladr {

// Invalid configuration or construction-time contract violation (CLI exit 2).
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Filesystem failure: unwritable path, missing file (CLI exit 3).
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Structurally bad file contents (header mismatch, wrong record shape).
class format_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A replay stream was asked for more step records than it holds.
class replay_exhausted_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Requested enumeration exceeds the search budget.
class resource_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ladr
