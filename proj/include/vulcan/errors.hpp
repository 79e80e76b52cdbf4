#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vulcan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A safe history contains an action with immediate risk 1, so ser is undefined.
class DegenerateRisk : public Error {
public:
    using Error::Error;
};

/// A policy is missing an action at a reachable non-terminal history.
class IncompletePolicy : public Error {
public:
    using Error::Error;
};

/// An exhaustive enumeration exceeded its configured budget.
class BudgetExceeded : public Error {
public:
    BudgetExceeded(const std::string& what, std::size_t limit)
        : Error(what + " (budget " + std::to_string(limit) + ")"), limit_(limit) {}

    std::size_t limit() const noexcept { return limit_; }

private:
    std::size_t limit_;
};

/// uct_select was called on a node whose actions have all been deleted.
class NoActions : public Error {
public:
    using Error::Error;
};

class UnknownReward : public Error {
public:
    using Error::Error;
};

class SingularKernel : public Error {
public:
    using Error::Error;
};

class MeanInsideObstacle : public Error {
public:
    using Error::Error;
};

/// A planner found no policy where the caller needs one.
class NoSolution : public Error {
public:
    using Error::Error;
};

/// Invalid domain or run configuration.
class InvalidConfig : public Error {
public:
    using Error::Error;
};

}  // namespace vulcan
