#include "cayley/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cayley/criticality.hpp"

namespace cayley {

namespace {

void check_probe_depth(std::int64_t k0, std::int64_t n) {
    if (k0 < 1) throw DomainError("probe generation must be >= 1");
    if (n <= k0) throw DomainError("depth must exceed the probe generation");
}

}  // namespace

double b_plus_tilde(const FieldProfile& profile, const ModelParams& params, std::int64_t k0, std::int64_t n) {
    check_probe_depth(k0, n);
    const CriticalPair pair = critical_pair(params);
    return iterate_backward_value(profile, params, n, k0, pair.b_plus);
}

double b_minus_tilde(const FieldProfile& profile, const ModelParams& params, std::int64_t k0, std::int64_t n) {
    check_probe_depth(k0, n);
    const CriticalPair pair = critical_pair(params);
    return iterate_backward_value(profile, params, n, k0, pair.b_minus);
}

const char* to_string(Regime r) {
    switch (r) {
        case Regime::CompatibleHead: return "compatible-head";
        case Regime::InhomogeneousWindow: return "inhomogeneous-window";
        case Regime::HomogeneousTail: return "homogeneous-tail";
    }
    return "?";
}

AuxiliaryFieldTrace auxiliary_trace(const FieldProfile& profile, const ModelParams& params, std::int64_t k,
                                    std::int64_t n, std::int64_t N) {
    if (!(1 <= k && k < n && n < N)) throw DomainError("auxiliary trace needs 1 <= k < n < N");
    const double hc = critical_pair(params).h_c;
    const FieldEvaluator field(profile, params);

    AuxiliaryFieldTrace trace{k, n, N, std::vector<double>(static_cast<std::size_t>(N - 1)),
                              std::vector<Regime>(static_cast<std::size_t>(N - 1))};
    ExtendedReal current = ExtendedReal::plus_infinity();
    for (std::int64_t m = N - 1; m >= 1; --m) {
        Regime regime = Regime::HomogeneousTail;
        double next = 0.0;
        if (m >= n) {
            next = psi(current, -hc, params);
        } else {
            regime = m >= k ? Regime::InhomogeneousWindow : Regime::CompatibleHead;
            next = psi(current, field(m), params);
        }
        trace.values[static_cast<std::size_t>(m - 1)] = next;
        trace.regimes[static_cast<std::size_t>(m - 1)] = regime;
        current = next;
    }
    return trace;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Transition: return "Transition";
        case Verdict::Uniqueness: return "Uniqueness";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

namespace {

// A Transition call also needs the gap to hold up over the last doubling.
constexpr double kGapRetention = 0.5;
// Slack when comparing successive gaps for the "shrinking" test.
constexpr double kShrinkSlack = 1e-15;
// Only gaps above this feed the contraction-rate estimate.
constexpr double kContractionFloor = 1e-10;

void check_options(const ClassifyOptions& options) {
    if (options.probes.empty()) throw DomainError("probe set is empty");
    if (options.depths.empty()) throw DomainError("depth schedule is empty");
    if (!std::is_sorted(options.depths.begin(), options.depths.end()) ||
        std::adjacent_find(options.depths.begin(), options.depths.end()) != options.depths.end())
        throw DomainError("depth schedule must be strictly increasing");
    const auto max_probe = *std::max_element(options.probes.begin(), options.probes.end());
    const auto min_probe = *std::min_element(options.probes.begin(), options.probes.end());
    if (min_probe < 1) throw DomainError("probe generations must be >= 1");
    if (options.depths.front() <= max_probe) throw DomainError("every depth must exceed every probe generation");
}

Verdict probe_verdict(const std::vector<double>& gaps, const ClassifyTolerances& tol) {
    const double last = gaps.back();
    const double previous = gaps.size() >= 2 ? gaps[gaps.size() - 2] : last;
    if (last > tol.tau_gap && last >= kGapRetention * previous) return Verdict::Transition;
    if (gaps.size() >= 3 && last < tol.tau_uniq) {
        const double before = gaps[gaps.size() - 3];
        if (last <= previous + kShrinkSlack && previous <= before + kShrinkSlack) return Verdict::Uniqueness;
    }
    return Verdict::Inconclusive;
}

bool near_critical_power(const FieldProfile& profile) {
    const EpsilonFamily* eps = profile.epsilon();
    if (eps == nullptr) return false;
    const auto* power = std::get_if<PowerLaw>(&eps->kind());
    return power != nullptr && power->gamma >= 1.45 && power->gamma <= 1.55;
}

}  // namespace

ClassificationVerdict classify(const FieldProfile& profile, const ModelParams& params, const ClassifyOptions& options) {
    check_options(options);
    ClassificationVerdict out;
    out.options = options;

    if (!(params.d() * params.theta() > 1.0)) {
        out.verdict = Verdict::Uniqueness;
        out.reason = "subcritical theta: theta <= 1/d, psi has a single fixed point";
        return out;
    }

    const CriticalPair pair = critical_pair(params);
    out.h_c = pair.h_c;
    out.b_plus = pair.b_plus;
    out.b_minus = pair.b_minus;

    if (const EpsilonFamily* eps = profile.epsilon()) {
        out.condition = ConditionSummary{condition_sum(*eps, options.depths.back()), classify_condition(*eps)};
    }

    const auto probes = options.probes;
    const std::int64_t lowest = *std::min_element(probes.begin(), probes.end());
    std::vector<std::vector<double>> gaps(probes.size());
    std::vector<GapSample> samples_by_depth;
    std::optional<IterationTrace> final_plus, final_minus;
    for (std::int64_t n : options.depths) {
        IterationTrace plus = iterate_backward(profile, params, n, lowest, pair.b_plus);
        IterationTrace minus = iterate_backward(profile, params, n, lowest, pair.b_minus);
        for (std::size_t p = 0; p < probes.size(); ++p) {
            const double hi = plus.at(probes[p]);
            const double lo = minus.at(probes[p]);
            gaps[p].push_back(hi - lo);
            samples_by_depth.push_back(GapSample{probes[p], n, hi, lo, hi - lo});
        }
        if (n == options.depths.back()) {
            final_plus.emplace(std::move(plus));
            final_minus.emplace(std::move(minus));
        }
    }
    for (std::size_t p = 0; p < probes.size(); ++p)
        for (const GapSample& s : samples_by_depth)
            if (s.k0 == probes[p]) out.gap_trace.push_back(s);

    out.min_gap = out.gap_trace.front().gap;
    for (const GapSample& s : out.gap_trace) out.min_gap = std::min(out.min_gap, s.gap);

    for (const auto& g : gaps) out.probe_verdicts.push_back(probe_verdict(g, options.tolerances));

    const IterationTrace& top_plus = *final_plus;
    const IterationTrace& top_minus = *final_minus;
    out.observed_delta_prime = pair.b_plus - top_plus.at(lowest);

    const double midpoint = 0.5 * (pair.b_plus + pair.b_minus);
    double worst_ratio = -1.0;
    for (std::int64_t m = lowest; m < top_plus.start_depth; ++m) {
        const double above = top_plus.at(m + 1) - top_minus.at(m + 1);
        if (top_plus.at(m) >= midpoint || above <= kContractionFloor) continue;
        worst_ratio = std::max(worst_ratio, (top_plus.at(m) - top_minus.at(m)) / above);
    }
    if (worst_ratio >= 0.0) {
        out.contraction_rate = worst_ratio;
        out.observed_delta_second = 1.0 - worst_ratio;
    }

    const bool agree = std::all_of(out.probe_verdicts.begin(), out.probe_verdicts.end(),
                                   [&](Verdict v) { return v == out.probe_verdicts.front(); });
    std::ostringstream reason;
    if (out.min_gap < -kOrderingTolerance) {
        out.verdict = Verdict::Inconclusive;
        reason << "ordering violated: minimum gap " << out.min_gap;
    } else if (agree && out.probe_verdicts.front() != Verdict::Inconclusive) {
        out.verdict = out.probe_verdicts.front();
        reason << (out.verdict == Verdict::Transition ? "gap persists above tau_gap at every probe"
                                                      : "gap collapsed below tau_uniq and shrinking at every probe");
    } else {
        out.verdict = Verdict::Inconclusive;
        reason << (agree ? "gap trend meets neither criterion" : "probes disagree");
    }

    if (out.verdict == Verdict::Inconclusive && near_critical_power(profile) && out.condition &&
        out.condition->classification.analytic == ConditionVerdict::Divergent) {
        out.verdict = Verdict::Uniqueness;
        reason << "; labelled by the analytic fast-path (condition sum diverges)";
    }
    out.reason = reason.str();
    return out;
}

}  // namespace cayley
