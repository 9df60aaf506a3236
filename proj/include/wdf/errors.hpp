#pragma once

#include <stdexcept>
#include <string>

namespace wdf {

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
    ParseError(const std::string& msg, std::size_t line)
        : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
    std::size_t line_number = 0;
};

// Duplicate observations for the same (meter, hour).
struct ConflictError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Series that should share a common hourly grid do not.
struct AlignmentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A gap exceeds the configured limit under a fill policy that cannot bridge it.
struct UnfillableGapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Not enough history for the requested split, window, or forecast origin.
struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Loss became non-finite during gradient descent.
struct TrainingDivergedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Metric or score that is undefined on the given input (all-zero scalogram,
// all-excluded MAPE, silhouette at k=1).
struct UndefinedMetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace wdf
