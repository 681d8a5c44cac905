#pragma once

// Critical temperature, critical field and the fixed-point structure of the
// homogeneous map psi(x) = h + d F(x, theta).

#include <utility>
#include <vector>

#include "cayley/tree_model.hpp"

namespace cayley {

// beta_c = arctanh(1/d) / J, i.e. d tanh(beta_c J) = 1.
double beta_c(int d, double J);

// theta_c = 1/d.
inline double theta_c(int d) { return 1.0 / d; }

// Tangency point x* > 0 of psi with the diagonal: psi'(x*) = 1, from
// tanh^2 x* = (d theta - 1) / (theta (d - theta)). Throws CriticalityError for theta < 1/d.
double tangency_point(const ModelParams& params);

// h_c = d F(x*, theta) - x*, from the closed-form tangency point.
// Zero at theta = 1/d; throws CriticalityError for theta < 1/d.
double critical_field(const ModelParams& params);

// Independent route: bisection on d F'(x) = 1 for x > 0 then h_c = d F(x) - x.
double critical_field_numeric(const ModelParams& params);

enum class Stability { Attracting, SaddleNode, Repelling };
enum class FixedPointCase { One = 1, Two = 2, Three = 3 };

const char* to_string(Stability s);
const char* to_string(FixedPointCase c);

struct FixedPoint {
    double b;
    double psi_prime;
    Stability stability;
};

struct FixedPointReport {
    double h;
    ModelParams params;
    std::vector<FixedPoint> points;  // ascending
    FixedPointCase case_label;
};

inline constexpr double kFixedPointResidual = 1e-10;
inline constexpr double kSaddleBand = 1e-6;
inline constexpr double kStabilityMargin = 1e-9;
inline constexpr double kTangencyBand = 1e-9;  // relative to max(1, h_c)
inline constexpr int kBracketCells = 4096;

// True when theta > 1/d and ||h| - h_c| <= kTangencyBand * max(1, h_c).
bool in_tangency_band(double h, const ModelParams& params);

Stability classify_stability(double psi_prime);

// All real solutions of psi(b) = b.
FixedPointReport fixed_points(double h, const ModelParams& params);

// Smallest and largest fixed points; CaseError when only one exists.
std::pair<double, double> extremal_pair(double h, const ModelParams& params);

// The two fixed points of psi at h = -h_c: b_minus attracting, b_plus the saddle.
struct CriticalPair {
    double h_c;
    double b_minus;
    double b_plus;
};
CriticalPair critical_pair(const ModelParams& params);

}  // namespace cayley
