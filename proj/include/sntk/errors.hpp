#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sntk {

// Base class for everything this library throws on purpose.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad arguments: non-finite entries, out-of-range parameters, shape mismatches.
struct invalid_input : error {
    using error::error;
};

struct dimension_mismatch : invalid_input {
    using invalid_input::invalid_input;
};

// A stated mathematical hypothesis does not hold (names the violated constraint).
struct domain_error : error {
    using error::error;
};

// Cholesky hit a non-positive pivot; `pivot` is the offending index.
struct singular_matrix : error {
    singular_matrix(const std::string& what, std::size_t pivot_index)
        : error(what), pivot(pivot_index) {}
    std::size_t pivot;
};

// Training blew up; `step` is the first offending gradient-descent step.
struct divergence_error : error {
    divergence_error(const std::string& what, long step_index)
        : error(what), step(step_index) {}
    long step;
};

// A trace field was requested that tracking flags did not record.
struct missing_data : error {
    using error::error;
};

// Malformed file contents; `offset` is a byte offset (binary) or line number (text).
struct format_error : error {
    format_error(const std::string& what, std::size_t where)
        : error(what), offset(where) {}
    std::size_t offset;
};

struct io_error : error {
    using error::error;
};

// Rejection sampling could not place the requested number of points.
struct capacity_error : error {
    capacity_error(const std::string& what, std::size_t achieved_n)
        : error(what), achieved(achieved_n) {}
    std::size_t achieved;
};

// An internal consistency audit failed (e.g. a stale sparse-update index).
struct internal_error : error {
    using error::error;
};

}  // namespace sntk
