#include "cayley/criticality.hpp"

#include <algorithm>
#include <cmath>

#include "cayley/recursion.hpp"

namespace cayley {

double beta_c(int d, double J) {
    if (d < 2) throw DomainError("tree order d must be >= 2");
    if (!(J > 0.0) || !std::isfinite(J)) throw DomainError("coupling J must be positive and finite");
    return std::atanh(1.0 / d) / J;
}

namespace {

bool supercritical(const ModelParams& params) { return params.d() * params.theta() > 1.0; }

void require_not_subcritical(const ModelParams& params) {
    if (params.d() * params.theta() < 1.0)
        throw CriticalityError("critical field undefined: theta <= 1/d (theta = " + std::to_string(params.theta()) +
                               ", d = " + std::to_string(params.d()) + ")");
}

// Bisects a sign change of f on [lo, hi] down to adjacent doubles.
template <class Fn>
double bisect(Fn&& f, double lo, double hi) {
    double f_lo = f(lo);
    for (int iter = 0; iter < 400; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double f_mid = f(mid);
        if (f_mid == 0.0) return mid;
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double tangency_point(const ModelParams& params) {
    require_not_subcritical(params);
    const double d = params.d();
    const double theta = params.theta();
    const double t_squared = (d * theta - 1.0) / (theta * (d - theta));
    return std::atanh(std::sqrt(t_squared));
}

double critical_field(const ModelParams& params) {
    const double x = tangency_point(params);
    return params.d() * kernel_F(x, params.theta()) - x;
}

double critical_field_numeric(const ModelParams& params) {
    require_not_subcritical(params);
    if (!supercritical(params)) return 0.0;
    // d F'(x) - 1 is positive at 0 and strictly decreasing on x > 0.
    const auto slope_excess = [&](double x) { return psi_prime(x, params) - 1.0; };
    double hi = 1.0;
    while (slope_excess(hi) > 0.0) hi *= 2.0;
    const double x = bisect(slope_excess, 0.0, hi);
    return params.d() * kernel_F(x, params.theta()) - x;
}

const char* to_string(Stability s) {
    switch (s) {
        case Stability::Attracting: return "attracting";
        case Stability::SaddleNode: return "saddle-node";
        case Stability::Repelling: return "repelling";
    }
    return "?";
}

const char* to_string(FixedPointCase c) {
    switch (c) {
        case FixedPointCase::One: return "one";
        case FixedPointCase::Two: return "two";
        case FixedPointCase::Three: return "three";
    }
    return "?";
}

Stability classify_stability(double psi_prime) {
    if (std::abs(psi_prime - 1.0) <= kSaddleBand) return Stability::SaddleNode;
    return psi_prime < 1.0 ? Stability::Attracting : Stability::Repelling;
}

bool in_tangency_band(double h, const ModelParams& params) {
    if (!supercritical(params)) return false;
    const double hc = critical_field(params);
    return std::abs(std::abs(h) - hc) <= kTangencyBand * std::max(1.0, hc);
}

namespace {

// Roots of psi(b) - b on [lo, hi]: a uniform grid, split additionally at the
// turning points +-x* so every cell lies on a monotone branch.
std::vector<double> bracket_roots(double h, const ModelParams& params, double lo, double hi) {
    const auto excess = [&](double b) { return psi(b, h, params) - b; };
    std::vector<double> grid;
    grid.reserve(kBracketCells + 3);
    for (int i = 0; i <= kBracketCells; ++i) grid.push_back(lo + (hi - lo) * i / kBracketCells);
    if (supercritical(params)) {
        const double x = tangency_point(params);
        for (double turn : {-x, x})
            if (turn > lo && turn < hi) grid.push_back(turn);
        std::sort(grid.begin(), grid.end());
    }

    std::vector<double> roots;
    double previous = grid.front();
    double f_previous = excess(previous);
    if (f_previous == 0.0) roots.push_back(previous);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double b = grid[i];
        const double f = excess(b);
        if (f == 0.0) {
            roots.push_back(b);
        } else if (f_previous != 0.0 && (f > 0.0) != (f_previous > 0.0)) {
            roots.push_back(bisect(excess, previous, b));
        }
        previous = b;
        f_previous = f;
    }
    return roots;
}

FixedPoint make_point(double b, const ModelParams& params) {
    const double slope = psi_prime(b, params);
    return FixedPoint{b, slope, classify_stability(slope)};
}

}  // namespace

FixedPointReport fixed_points(double h, const ModelParams& params) {
    const double bound = std::abs(h) + params.d() * std::atanh(params.theta()) + 1.0;
    FixedPointReport report{h, params, {}, FixedPointCase::One};

    if (in_tangency_band(h, params)) {
        // Double root: the saddle sits at the tangency point, the transversal
        // root on the opposite side of the origin.
        const double x = tangency_point(params);
        const double saddle = h < 0.0 ? x : -x;
        const auto others = h < 0.0 ? bracket_roots(h, params, -bound, 0.0) : bracket_roots(h, params, 0.0, bound);
        for (double b : others) report.points.push_back(make_point(b, params));
        report.points.push_back(make_point(saddle, params));
    } else {
        for (double b : bracket_roots(h, params, -bound, bound)) report.points.push_back(make_point(b, params));
    }

    std::sort(report.points.begin(), report.points.end(),
              [](const FixedPoint& a, const FixedPoint& b) { return a.b < b.b; });
    switch (report.points.size()) {
        case 1: report.case_label = FixedPointCase::One; break;
        case 2: report.case_label = FixedPointCase::Two; break;
        case 3: report.case_label = FixedPointCase::Three; break;
        default: throw CaseError("unexpected number of fixed points: " + std::to_string(report.points.size()));
    }
    return report;
}

std::pair<double, double> extremal_pair(double h, const ModelParams& params) {
    const FixedPointReport report = fixed_points(h, params);
    if (report.points.size() < 2) throw CaseError("psi has a single fixed point; no extremal pair");
    return {report.points.front().b, report.points.back().b};
}

CriticalPair critical_pair(const ModelParams& params) {
    if (!supercritical(params)) throw CriticalityError("no saddle node: theta <= 1/d");
    const double hc = critical_field(params);
    const auto [lower, upper] = extremal_pair(-hc, params);
    return CriticalPair{hc, lower, upper};
}

}  // namespace cayley
