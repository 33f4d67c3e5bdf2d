#pragma once

#include <stdexcept>
#include <string>

namespace trajfb {

// Base for everything this library throws on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

struct NonStochasticRow : Error {
    NonStochasticRow(int s, int a, double sum)
        : Error("transition row (s=" + std::to_string(s) + ", a=" + std::to_string(a) +
                ") sums to " + std::to_string(sum) + ", expected 1") {}
};

struct RewardOutOfRange : Error {
    RewardOutOfRange(int s, int a, double r)
        : Error("mean reward at (s=" + std::to_string(s) + ", a=" + std::to_string(a) +
                ") is " + std::to_string(r) + ", expected [0,1]") {}
};

struct InvalidLambda : Error {
    explicit InvalidLambda(double lam)
        : Error("ridge parameter must be positive, got " + std::to_string(lam)) {}
};

struct InvalidDelta : Error {
    explicit InvalidDelta(double delta)
        : Error("failure probability must lie in (0,1), got " + std::to_string(delta)) {}
};

struct InvalidK : Error {
    explicit InvalidK(long k)
        : Error("episode index must be >= 1, got " + std::to_string(k)) {}
};

struct FactorizationFailure : Error {
    explicit FactorizationFailure(const std::string& msg) : Error(msg) {}
};

struct EnumerationTooLarge : Error {
    explicit EnumerationTooLarge(const std::string& msg) : Error(msg) {}
};

// Oracle-side guard for brute-force blowups.
struct TooLarge : Error {
    explicit TooLarge(const std::string& msg) : Error(msg) {}
};

struct StaleFeedback : Error {
    explicit StaleFeedback(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

struct InvalidSpec : Error {
    explicit InvalidSpec(const std::string& msg) : Error(msg) {}
};

struct EmptyInput : Error {
    explicit EmptyInput(const std::string& msg) : Error(msg) {}
};

} // namespace trajfb
