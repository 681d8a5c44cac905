#include "cayley/recursion.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace cayley {

namespace {

void check_theta(double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw DomainError("theta must lie in (0, 1)");
}

// arctanh(u) = 1/2 log((1 + u) / (1 - u)) written with log1p for small |u|;
// evaluated on |u| so the result is exactly odd.
double stable_atanh(double u) {
    const double a = std::abs(u);
    assert(a < 1.0);
    return std::copysign(0.5 * std::log1p(2.0 * a / (1.0 - a)), u);
}

// 1 - tanh^2 x without cancellation at large |x|.
double sech_squared(double x) {
    const double s = 1.0 / std::cosh(x);
    return s * s;
}

}  // namespace

double kernel_F(ExtendedReal x, double theta) {
    check_theta(theta);
    switch (x.kind()) {
        case ExtendedReal::Kind::PlusInfinity: return stable_atanh(theta);
        case ExtendedReal::Kind::MinusInfinity: return -stable_atanh(theta);
        case ExtendedReal::Kind::Finite: break;
    }
    const double u = theta * std::tanh(x.value());
    if (!(std::abs(u) < 1.0)) throw DomainError("kernel argument left (-1, 1)");
    return stable_atanh(u);
}

double kernel_F_prime(double x, double theta) {
    check_theta(theta);
    const double t = std::tanh(x);
    return theta * sech_squared(x) / (1.0 - theta * theta * t * t);
}

double kernel_F_second(double x, double theta) {
    check_theta(theta);
    const double t = std::tanh(x);
    const double denom = 1.0 - theta * theta * t * t;
    return -2.0 * theta * (1.0 - theta * theta) * t * sech_squared(x) / (denom * denom);
}

double psi(ExtendedReal x, double h, const ModelParams& params) {
    return h + params.d() * kernel_F(x, params.theta());
}

double psi_prime(double x, const ModelParams& params) { return params.d() * kernel_F_prime(x, params.theta()); }

double psi_second(double x, const ModelParams& params) { return params.d() * kernel_F_second(x, params.theta()); }

namespace {

void check_depths(std::int64_t from_depth, std::int64_t to_depth) {
    if (to_depth < 1) throw DomainError("backward iteration must stop at a generation >= 1");
    if (to_depth > from_depth) throw DomainError("backward iteration requires to_depth <= from_depth");
}

}  // namespace

IterationTrace iterate_backward(const FieldProfile& profile, const ModelParams& params, std::int64_t from_depth,
                                std::int64_t to_depth, ExtendedReal seed) {
    check_depths(from_depth, to_depth);
    const FieldEvaluator field(profile, params);
    std::vector<double> values(static_cast<std::size_t>(from_depth - to_depth + 1));
    ExtendedReal current = seed;
    for (std::int64_t m = from_depth; m >= to_depth; --m) {
        const double next = psi(current, field(m), params);
        values[static_cast<std::size_t>(m - to_depth)] = next;
        current = next;
    }
    return IterationTrace{from_depth, to_depth, seed, std::move(values), params, profile};
}

double iterate_backward_value(const FieldProfile& profile, const ModelParams& params, std::int64_t from_depth,
                              std::int64_t to_depth, ExtendedReal seed) {
    check_depths(from_depth, to_depth);
    const FieldEvaluator field(profile, params);
    ExtendedReal current = seed;
    for (std::int64_t m = from_depth; m >= to_depth; --m) current = psi(current, field(m), params);
    return current.value();
}

double recursion_residual(const IterationTrace& trace) {
    const FieldEvaluator field(trace.profile, trace.params);
    double worst = 0.0;
    for (std::int64_t m = trace.end_depth; m <= trace.start_depth; ++m) {
        const ExtendedReal above = (m == trace.start_depth) ? trace.seed : ExtendedReal(trace.at(m + 1));
        const double expected = psi(above, field(m), trace.params);
        const double scale = std::max(1.0, std::abs(expected));
        worst = std::max(worst, std::abs(trace.at(m) - expected) / scale);
    }
    return worst;
}

}  // namespace cayley
