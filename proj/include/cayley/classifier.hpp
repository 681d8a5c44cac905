#pragma once

// Finite-depth analogues of the extremal boundary fields b~+ and b~- for a
// perturbed critical field, and the transition/uniqueness verdict built on
// their gap.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cayley/perturbation.hpp"
#include "cayley/recursion.hpp"
#include "cayley/tree_model.hpp"

namespace cayley {

// psi~_{k0,n}(b+), b+ the saddle at h = -h_c. A lower bound for b~+_{k0}.
double b_plus_tilde(const FieldProfile& profile, const ModelParams& params, std::int64_t k0, std::int64_t n);

// psi~_{k0,n}(b-), b- the attracting fixed point at h = -h_c. An upper bound for b~-_{k0}.
double b_minus_tilde(const FieldProfile& profile, const ModelParams& params, std::int64_t k0, std::int64_t n);

enum class Regime { CompatibleHead, InhomogeneousWindow, HomogeneousTail };
const char* to_string(Regime r);

// b^{+,k,n,N}_m for m = 1..N-1 with b_N = +inf: the homogeneous map at
// h = -h_c produces b_m for n <= m < N, the profile's maps produce b_m for m < n.
struct AuxiliaryFieldTrace {
    std::int64_t k;
    std::int64_t n;
    std::int64_t N;
    std::vector<double> values;   // values[m - 1] = b_m, m = 1..N-1
    std::vector<Regime> regimes;  // parallel to values

    double at(std::int64_t m) const { return values.at(static_cast<std::size_t>(m - 1)); }
};

// Throws DomainError unless 1 <= k < n < N.
AuxiliaryFieldTrace auxiliary_trace(const FieldProfile& profile, const ModelParams& params, std::int64_t k,
                                    std::int64_t n, std::int64_t N);

enum class Verdict { Transition, Uniqueness, Inconclusive };
const char* to_string(Verdict v);

struct ClassifyTolerances {
    double tau_gap = 1e-4;
    double tau_uniq = 1e-6;
};

struct ClassifyOptions {
    std::vector<std::int64_t> probes{1, 5, 10};
    std::vector<std::int64_t> depths{250, 500, 1000, 2000, 4000};
    ClassifyTolerances tolerances{};
};

struct GapSample {
    std::int64_t k0;
    std::int64_t n;
    double b_plus;
    double b_minus;
    double gap;
};

struct ConditionSummary {
    ConditionSumReport at_max_depth;
    ConditionClassification classification;
};

struct ClassificationVerdict {
    Verdict verdict = Verdict::Inconclusive;
    std::string reason;
    std::vector<GapSample> gap_trace;     // probe-major, depths ascending
    std::vector<Verdict> probe_verdicts;  // per probe, from the gap trend alone
    std::optional<ConditionSummary> condition;
    ClassifyOptions options;
    std::optional<double> h_c;
    std::optional<double> b_plus;
    std::optional<double> b_minus;
    // b+ minus the plus-seeded value at the smallest probe and deepest depth.
    std::optional<double> observed_delta_prime;
    // Largest per-generation gap ratio where the plus trace sits below the
    // midpoint of (b-, b+), and 1 minus it.
    std::optional<double> contraction_rate;
    std::optional<double> observed_delta_second;
    double min_gap = 0.0;  // smallest gap seen; ordering requires >= -1e-10
};

inline constexpr double kOrderingTolerance = 1e-10;

ClassificationVerdict classify(const FieldProfile& profile, const ModelParams& params,
                               const ClassifyOptions& options = {});

}  // namespace cayley
