#pragma once

// The summability condition sum_j (sum_{i>=j} eps_i)^2, its rearrangement
// bounds, and second/first order predictors for perturbed backward iteration
// started at the critical fixed points.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cayley/tree_model.hpp"

namespace cayley {

struct ConditionSumReport {
    std::int64_t n = 0;
    double S_n = 0.0;           // suffix-sum route
    double S_n_identity = 0.0;  // sum i eps_i^2 + 2 sum_{i>=2} eps_i sum_{j<i} j eps_j
    double lower = 0.0;         // sum (i eps_i)^2
    double upper = 0.0;         // sum ((n - i + 1) eps_i)^2
    std::int64_t tail_from = 1;
    double tail_sum = 0.0;      // sum_{i=tail_from}^n eps_i
};

// eps holds eps_1..eps_n. Throws MonotonicityError unless the sequence is
// positive and non-increasing (all zeros allowed).
ConditionSumReport condition_sum(std::span<const double> eps, std::int64_t tail_from = 1);
ConditionSumReport condition_sum(const EpsilonFamily& family, std::int64_t n, std::int64_t tail_from = 1);

enum class ConditionVerdict { Convergent, Divergent, Undetermined };
const char* to_string(ConditionVerdict v);

struct ConditionConfig {
    double shrink_ratio = 0.9;   // successive increment ratio counted as geometric shrinking
    int sustained_doublings = 3; // number of trailing ratios that must agree
    double blow_up = 1e6;        // S_n above this is divergent outright
};

std::vector<std::int64_t> default_condition_horizons();  // 1000 * 2^k, k = 0..8

struct ConditionClassification {
    ConditionVerdict numeric;
    std::optional<ConditionVerdict> analytic;  // power laws only: Convergent iff gamma > 3/2
    std::vector<std::int64_t> horizons;
    std::vector<double> sums;
    std::vector<double> increment_ratios;
};

ConditionClassification classify_condition(const EpsilonFamily& family,
                                           const std::vector<std::int64_t>& horizons = default_condition_horizons(),
                                           const ConditionConfig& config = {});

// Exact power-law rule: the sum converges iff 2 - 2 gamma < -1.
ConditionVerdict analytic_power_law_condition(double gamma);

// b+ - sum_{i=k}^n eps_i - |psi''(b+)|/2 sum_{i=k+1}^n (sum_{j=i}^n eps_j)^2,
// predicting the perturbed backward iteration psi~_{k,n}(b+) at h = -h_c.
double taylor_plus_prediction(std::int64_t k, std::int64_t n, const EpsilonFamily& eps, double b_plus,
                              const ModelParams& params);

// b- - sum_{i=k}^{n-1} psi'(b-)^{i-k} eps_i, predicting psi~_{k,n-1}(b-).
double taylor_minus_prediction(std::int64_t k, std::int64_t n, const EpsilonFamily& eps, double b_minus,
                               const ModelParams& params);

}  // namespace cayley
