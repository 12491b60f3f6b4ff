#pragma once

#include <functional>

#include "mpmc/types.hpp"

namespace mpmc {

/// Potential energy V together with its gradient. A default-constructed
/// Potential is the zero potential; callers can test `is_zero()` to skip
/// gradient evaluations.
class Potential {
public:
    using ValueFn = std::function<double(const Vec&)>;
    using GradientFn = std::function<Vec(const Vec&)>;

    Potential() = default;
    Potential(ValueFn value, GradientFn gradient)
        : value_(std::move(value)), gradient_(std::move(gradient)) {}

    bool is_zero() const noexcept { return !value_; }

    double value(const Vec& x) const { return value_ ? value_(x) : 0.0; }

    Vec gradient(const Vec& x) const {
        return gradient_ ? gradient_(x) : Vec::Zero(x.size());
    }

private:
    ValueFn value_;
    GradientFn gradient_;
};

}  // namespace mpmc
