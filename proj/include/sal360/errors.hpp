#pragma once

#include <stdexcept>
#include <string>

namespace sal360 {

// Error taxonomy used across the toolkit. All errors are exceptions rooted
// at sal360::error so callers can catch the whole family at once.
struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// A caller passed an argument outside the operation's domain
// (bad pixel index, mismatched grids, non-positive sigma, ...).
struct input_error : error {
    explicit input_error(const std::string& msg) : error(msg) {}
};

// The data itself is unusable (empty trace, malformed CSV row,
// non-finite map values, missing files, ...).
struct data_error : error {
    explicit data_error(const std::string& msg) : error(msg) {}
};

// Inputs are syntactically fine but the quantity is undefined on them
// (zero-variance map for CC, all-zero ground truth for KL, no fixations).
// Callers typically skip the sample/frame and count the exclusion.
struct degenerate_error : error {
    explicit degenerate_error(const std::string& msg) : error(msg) {}
};

// Internal state is not ready for the requested operation
// (optimizer stepping a parameter that never received a gradient).
struct state_error : error {
    explicit state_error(const std::string& msg) : error(msg) {}
};

}  // namespace sal360
