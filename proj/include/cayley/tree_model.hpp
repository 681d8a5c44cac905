#pragma once

// Model parameters, Cayley-tree geometry and generation-indexed field profiles.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "cayley/errors.hpp"

namespace cayley {

// Ferromagnetic Ising parameters on the Cayley tree of order d.
// theta = tanh(beta * J) is cached at construction; instances are immutable.
class ModelParams {
public:
    int d() const noexcept { return d_; }
    double J() const noexcept { return J_; }
    double beta() const noexcept { return beta_; }
    double theta() const noexcept { return theta_; }

    friend ModelParams make_params(int d, double J, double beta);
    friend ModelParams make_params_from_theta(int d, double J, double theta);

private:
    ModelParams(int d, double J, double beta, double theta) : d_(d), J_(J), beta_(beta), theta_(theta) {}

    int d_;
    double J_;
    double beta_;
    double theta_;
};

// Throws DomainError for d < 2, J <= 0 or beta <= 0 (or non-finite inputs).
ModelParams make_params(int d, double J, double beta);

// Stores theta exactly as given and back-solves beta = arctanh(theta) / J.
ModelParams make_params_from_theta(int d, double J, double theta);

// ---------------------------------------------------------------------------
// Perturbation families eps_n, n >= 1.

struct PowerLaw {
    double gamma;  // eps_n = n^-gamma
};

struct Geometric {
    double ratio;      // 0 < r < 1
    double amplitude;  // eps_n = a * r^(n-1)
};

// Explicit prefix eps_1..eps_L; eps_n = 0 for n > L.
struct CustomList {
    std::vector<double> values;
};

class EpsilonFamily {
public:
    using Kind = std::variant<PowerLaw, Geometric, CustomList>;

    static EpsilonFamily power_law(double gamma);
    static EpsilonFamily geometric(double ratio, double amplitude);
    // Values must be positive and non-increasing, or all zero.
    static EpsilonFamily custom(std::vector<double> values);

    double at(std::int64_t n) const;

    // Throws MonotonicityError unless eps_1..eps_n is positive and non-increasing.
    // The all-zero custom list is accepted as the unperturbed degenerate case.
    void validate_prefix(std::int64_t n) const;

    bool is_zero() const;
    const Kind& kind() const noexcept { return kind_; }
    std::string describe() const;

private:
    explicit EpsilonFamily(Kind kind) : kind_(std::move(kind)) {}
    Kind kind_;
};

// ---------------------------------------------------------------------------
// Generation-dependent external fields h_n, n >= 1.

struct Homogeneous {
    double h;
};

// h_n = -h_c(params) - eps_n
struct CriticalMinusPerturbation {
    EpsilonFamily epsilon;
};

// h_1..h_L given explicitly; evaluating beyond L is an IndexError.
struct ExplicitList {
    std::vector<double> values;
};

class FieldProfile {
public:
    using Kind = std::variant<Homogeneous, CriticalMinusPerturbation, ExplicitList>;

    static FieldProfile homogeneous(double h) { return FieldProfile(Homogeneous{h}); }
    static FieldProfile critical_minus(EpsilonFamily eps) { return FieldProfile(CriticalMinusPerturbation{std::move(eps)}); }
    static FieldProfile explicit_list(std::vector<double> values) { return FieldProfile(ExplicitList{std::move(values)}); }

    const Kind& kind() const noexcept { return kind_; }

    // Perturbation family when this is a critical-minus profile, nullptr otherwise.
    const EpsilonFamily* epsilon() const noexcept;

    std::string describe() const;

private:
    explicit FieldProfile(Kind kind) : kind_(std::move(kind)) {}
    Kind kind_;
};

// Field at generation n >= 1. Critical-minus profiles need theta > 1/d.
double field_at(const FieldProfile& profile, const ModelParams& params, std::int64_t n);

// Evaluates a profile repeatedly with h_c computed once.
class FieldEvaluator {
public:
    FieldEvaluator(const FieldProfile& profile, const ModelParams& params);
    double operator()(std::int64_t n) const;

private:
    const FieldProfile* profile_;
    double critical_ = 0.0;
};

// ---------------------------------------------------------------------------
// Finite Cayley-tree volumes. Vertices are numbered breadth first: the root
// is 0 and generation k occupies a contiguous index range.

class TreeGeometry {
public:
    // Proper Cayley tree: the root has d+1 children, every other vertex d.
    TreeGeometry(int d, int depth, bool root_included = true);

    // Rooted d-ary subtree hanging below a vertex (root has d children).
    static TreeGeometry cavity(int d, int depth);

    int d() const noexcept { return d_; }
    int depth() const noexcept { return depth_; }
    bool root_included() const noexcept { return root_included_; }
    int root_children() const noexcept { return root_children_; }

    // |W_k|
    std::int64_t generation_size(int k) const;
    // Vertices of generations 0..depth (excluding the root when !root_included).
    std::int64_t total_vertices() const;
    static std::int64_t total_vertices(int d, int depth, bool root_included = true);

    // Index range [first, last) of generation k.
    std::int64_t generation_begin(int k) const;
    std::int64_t generation_end(int k) const { return generation_begin(k) + generation_size(k); }

    std::vector<int> parents() const;  // parent of each vertex, -1 for the root

private:
    TreeGeometry(int d, int depth, int root_children, bool root_included);

    int d_;
    int depth_;
    int root_children_;
    bool root_included_;
};

}  // namespace cayley
