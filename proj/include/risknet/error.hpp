#pragma once

#include <stdexcept>
#include <string>

namespace risknet {

// Invalid argument or precondition violation.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed input text (JSON, CSV, SNDlib).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite values during training or gradient evaluation.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A simulation exceeded its wall-clock budget.
class SimulationTimeout : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace risknet
