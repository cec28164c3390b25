#pragma once

#include <stdexcept>
#include <string>

namespace tiered_review {

/// A distribution or method parameter is outside its domain.
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Observed or configured data violates a model invariant.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace tiered_review
