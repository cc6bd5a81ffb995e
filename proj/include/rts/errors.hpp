#pragma once

#include <stdexcept>
#include <string>

namespace rts {

struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidSpec : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateSeries : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SeriesTooShort : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptySplit : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ShapeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonFiniteGradient : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct Infeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyCalibration : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonPositiveOptimalCost : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IncompleteGrid : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace rts
