#pragma once

// The single-edge message kernel F(x, theta) = arctanh(theta tanh x), the
// generation maps psi_n(x) = h_n + d F(x, theta) and their backward composition.

#include <cstdint>
#include <vector>

#include "cayley/tree_model.hpp"

namespace cayley {

// A boundary-field value on the extended real line. Infinite values are a
// separate case rather than IEEE infinities so a single map application
// lands them on the finite limit psi(+-inf).
class ExtendedReal {
public:
    enum class Kind { Finite, PlusInfinity, MinusInfinity };

    constexpr ExtendedReal(double value) noexcept : kind_(Kind::Finite), value_(value) {}  // NOLINT

    static constexpr ExtendedReal plus_infinity() noexcept { return ExtendedReal(Kind::PlusInfinity); }
    static constexpr ExtendedReal minus_infinity() noexcept { return ExtendedReal(Kind::MinusInfinity); }

    constexpr Kind kind() const noexcept { return kind_; }
    constexpr bool is_finite() const noexcept { return kind_ == Kind::Finite; }
    // Only meaningful when finite.
    constexpr double value() const noexcept { return value_; }

    friend constexpr bool operator==(const ExtendedReal&, const ExtendedReal&) = default;

private:
    constexpr explicit ExtendedReal(Kind kind) noexcept : kind_(kind), value_(0.0) {}
    Kind kind_;
    double value_;
};

// F(x, theta) = arctanh(theta tanh x); F(+-inf) = +-arctanh(theta).
double kernel_F(ExtendedReal x, double theta);

// F'(x) = theta (1 - t^2) / (1 - theta^2 t^2), t = tanh x.
double kernel_F_prime(double x, double theta);

// F''(x) = -2 theta (1 - theta^2) t (1 - t^2) / (1 - theta^2 t^2)^2.
double kernel_F_second(double x, double theta);

// psi(x) = h + d F(x, theta) and its derivatives.
double psi(ExtendedReal x, double h, const ModelParams& params);
double psi_prime(double x, const ModelParams& params);
double psi_second(double x, const ModelParams& params);

// Backward trace b_k..b_n plus the seed b_{n+1}, with
// b_{m-1} = h_{m-1} + d F(b_m, theta).
struct IterationTrace {
    std::int64_t start_depth;  // n
    std::int64_t end_depth;    // k
    ExtendedReal seed;         // b_{n+1}
    std::vector<double> values;  // values[i] = b_{k+i}, i = 0..n-k
    ModelParams params;
    FieldProfile profile;

    double at(std::int64_t m) const { return values.at(static_cast<std::size_t>(m - end_depth)); }
    double front() const { return values.front(); }  // b_k
};

// Runs b_{n+1} = seed down to b_k. Throws DomainError unless 1 <= k <= n.
IterationTrace iterate_backward(const FieldProfile& profile, const ModelParams& params, std::int64_t from_depth,
                                std::int64_t to_depth, ExtendedReal seed);

// Same iteration, returning only b_k.
double iterate_backward_value(const FieldProfile& profile, const ModelParams& params, std::int64_t from_depth,
                              std::int64_t to_depth, ExtendedReal seed);

// Largest relative violation of b_{m-1} = h_{m-1} + d F(b_m) over a trace.
double recursion_residual(const IterationTrace& trace);

inline constexpr double kRecursionResidualTolerance = 1e-12;

}  // namespace cayley
