#include "cayley/perturbation.hpp"

#include <algorithm>
#include <cmath>

#include "cayley/recursion.hpp"

namespace cayley {

namespace {

// Non-negative and non-increasing. Zeros can only trail, which covers finite
// lists read past their end.
void check_sequence(std::span<const double> eps) {
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!std::isfinite(eps[i]) || !(eps[i] >= 0.0))
            throw MonotonicityError("eps_" + std::to_string(i + 1) + " is negative");
        if (i > 0 && eps[i] > eps[i - 1]) throw MonotonicityError("eps increases at n = " + std::to_string(i + 1));
    }
}

std::vector<double> prefix_values(const EpsilonFamily& family, std::int64_t n) {
    std::vector<double> eps(static_cast<std::size_t>(std::max<std::int64_t>(n, 0)));
    for (std::int64_t i = 1; i <= n; ++i) eps[static_cast<std::size_t>(i - 1)] = family.at(i);
    return eps;
}

// S_n by suffix sums only; used for horizon sweeps.
double suffix_square_sum(const EpsilonFamily& family, std::int64_t n) {
    double suffix = 0.0;
    double total = 0.0;
    for (std::int64_t j = n; j >= 1; --j) {
        suffix += family.at(j);
        total += suffix * suffix;
    }
    return total;
}

}  // namespace

ConditionSumReport condition_sum(std::span<const double> eps, std::int64_t tail_from) {
    check_sequence(eps);
    const auto n = static_cast<std::int64_t>(eps.size());
    if (n < 1) throw DomainError("condition sum needs a horizon n >= 1");
    if (tail_from < 1 || tail_from > n + 1) throw DomainError("tail start outside 1..n+1");

    ConditionSumReport report;
    report.n = n;
    report.tail_from = tail_from;

    double suffix = 0.0;
    for (std::int64_t j = n; j >= 1; --j) {
        const double e = eps[static_cast<std::size_t>(j - 1)];
        suffix += e;
        report.S_n += suffix * suffix;
        if (j >= tail_from) report.tail_sum += e;
        const double ie = static_cast<double>(j) * e;
        const double rev = static_cast<double>(n - j + 1) * e;
        report.lower += ie * ie;
        report.upper += rev * rev;
    }

    double weighted_prefix = 0.0;  // sum_{j < i} j eps_j
    for (std::int64_t i = 1; i <= n; ++i) {
        const double e = eps[static_cast<std::size_t>(i - 1)];
        report.S_n_identity += static_cast<double>(i) * e * e + 2.0 * e * weighted_prefix;
        weighted_prefix += static_cast<double>(i) * e;
    }
    return report;
}

ConditionSumReport condition_sum(const EpsilonFamily& family, std::int64_t n, std::int64_t tail_from) {
    const std::vector<double> eps = prefix_values(family, n);
    return condition_sum(std::span<const double>(eps), tail_from);
}

const char* to_string(ConditionVerdict v) {
    switch (v) {
        case ConditionVerdict::Convergent: return "convergent";
        case ConditionVerdict::Divergent: return "divergent";
        case ConditionVerdict::Undetermined: return "undetermined";
    }
    return "?";
}

std::vector<std::int64_t> default_condition_horizons() {
    std::vector<std::int64_t> horizons;
    for (int k = 0; k <= 8; ++k) horizons.push_back(std::int64_t{1000} << k);
    return horizons;
}

ConditionVerdict analytic_power_law_condition(double gamma) {
    return 2.0 - 2.0 * gamma < -1.0 ? ConditionVerdict::Convergent : ConditionVerdict::Divergent;
}

ConditionClassification classify_condition(const EpsilonFamily& family, const std::vector<std::int64_t>& horizons,
                                           const ConditionConfig& config) {
    if (horizons.empty()) throw DomainError("horizon schedule is empty");
    if (!std::is_sorted(horizons.begin(), horizons.end()) ||
        std::adjacent_find(horizons.begin(), horizons.end()) != horizons.end() || horizons.front() < 1)
        throw DomainError("horizon schedule must be strictly increasing and positive");

    ConditionClassification out{ConditionVerdict::Undetermined, std::nullopt, horizons, {}, {}};
    if (const auto* power = std::get_if<PowerLaw>(&family.kind())) out.analytic = analytic_power_law_condition(power->gamma);

    for (std::int64_t n : horizons) out.sums.push_back(suffix_square_sum(family, n));

    std::vector<double> increments;
    for (std::size_t i = 1; i < out.sums.size(); ++i) increments.push_back(out.sums[i] - out.sums[i - 1]);
    for (std::size_t i = 1; i < increments.size(); ++i) {
        const double previous = increments[i - 1];
        out.increment_ratios.push_back(previous > 0.0 ? increments[i] / previous : 0.0);
    }

    if (std::any_of(out.sums.begin(), out.sums.end(), [&](double s) { return s > config.blow_up; })) {
        out.numeric = ConditionVerdict::Divergent;
        return out;
    }
    const auto needed = static_cast<std::size_t>(config.sustained_doublings);
    if (out.increment_ratios.size() < needed) return out;

    const double last = out.sums.back();
    const bool exhausted = std::all_of(increments.end() - static_cast<std::ptrdiff_t>(needed), increments.end(),
                                       [&](double inc) { return inc <= 1e-15 * std::max(last, 1e-300); });
    const auto tail = [&] { return std::span(out.increment_ratios).last(needed); };
    if (exhausted || std::all_of(tail().begin(), tail().end(), [&](double r) { return r < config.shrink_ratio; })) {
        out.numeric = ConditionVerdict::Convergent;
    } else if (std::all_of(tail().begin(), tail().end(), [](double r) { return r >= 1.0; })) {
        out.numeric = ConditionVerdict::Divergent;
    }
    return out;
}

namespace {

void require_saddle(const ModelParams& params) {
    if (!(params.d() * params.theta() > 1.0)) throw CriticalityError("no saddle node: theta <= 1/d");
}

}  // namespace

double taylor_plus_prediction(std::int64_t k, std::int64_t n, const EpsilonFamily& eps, double b_plus,
                              const ModelParams& params) {
    require_saddle(params);
    if (k < 1 || k > n) throw DomainError("Taylor prediction needs 1 <= k <= n");
    const double curvature = 0.5 * std::abs(psi_second(b_plus, params));
    double suffix = 0.0;
    double squares = 0.0;  // sum_{i=k+1}^n suffix_i^2
    for (std::int64_t i = n; i >= k; --i) {
        suffix += eps.at(i);
        if (i > k) squares += suffix * suffix;
    }
    return b_plus - suffix - curvature * squares;
}

double taylor_minus_prediction(std::int64_t k, std::int64_t n, const EpsilonFamily& eps, double b_minus,
                               const ModelParams& params) {
    require_saddle(params);
    if (k < 1 || k > n) throw DomainError("Taylor prediction needs 1 <= k <= n");
    const double contraction = psi_prime(b_minus, params);
    double weight = 1.0;
    double shift = 0.0;
    for (std::int64_t i = k; i <= n - 1; ++i) {
        shift += weight * eps.at(i);
        weight *= contraction;
    }
    return b_minus - shift;
}

}  // namespace cayley
