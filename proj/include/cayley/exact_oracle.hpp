#pragma once

// Brute-force finite-volume Gibbs measures on small Cayley trees. Used as
// ground truth for the compatibility recursion; shares nothing with the
// recursion code except the parameter types.

#include <cstdint>
#include <optional>
#include <vector>

#include "cayley/tree_model.hpp"

namespace cayley {

inline constexpr int kVertexCap = 24;

// Field assignment for a depth-n volume: h_1..h_{n-1} on the interior
// generations, b_n on the last generation and h_root on the root.
struct VolumeFields {
    std::vector<double> interior;  // interior[k-1] = h_k, k = 1..n-1
    double boundary = 0.0;         // b_n
    double root = 0.0;             // h_root
};

// Per-configuration log Boltzmann weights. Bit v of the configuration index is
// set when vertex v has spin +1. Generation-n vertices occupy the high bits.
struct FiniteGibbsTable {
    TreeGeometry geometry;
    ModelParams params;
    VolumeFields fields;
    std::vector<double> log_weights;
    double log_Z = 0.0;

    double probability(std::uint64_t config) const;
    std::uint64_t size() const noexcept { return log_weights.size(); }
};

// Exact table by full enumeration; SizeError beyond max_vertices (itself capped at kVertexCap).
FiniteGibbsTable enumerate(const TreeGeometry& geometry, const ModelParams& params, const VolumeFields& fields,
                           int workers = 1, int max_vertices = kVertexCap);

struct CompatibilityReport {
    int depth;
    double b_n;
    double b_prev;        // b_{n-1} used to build the coarser measure
    double max_residual;  // max_sigma |sum_omega mu_n(sigma v omega) - mu_{n-1}(sigma)|
};

inline constexpr double kCompatibilityTolerance = 1e-11;

// Marginalizes mu_n over W_n and compares it to mu_{n-1} built with
// b_{n-1} = h_{n-1} + d F(b_n). A b_prev_override replaces that value
// (used to check the comparison is sensitive).
CompatibilityReport verify_compatibility(const TreeGeometry& geometry, const ModelParams& params,
                                         const VolumeFields& fields, int workers = 1,
                                         std::optional<double> b_prev_override = std::nullopt);

struct RootMagnetization {
    double recursion;
    std::optional<double> enumeration;  // present when the volume fits the cap
};

// m = tanh(h_root + (d+1) F(b_1)) with b_1 from the backward recursion, and
// the enumerated <sigma_root> when the tree is small enough.
RootMagnetization root_magnetization(const TreeGeometry& geometry, const ModelParams& params,
                                     const VolumeFields& fields, int workers = 1);

// <sigma_x> for one vertex of the enumerated table.
double site_magnetization(const FiniteGibbsTable& table, int vertex);

// Effective field at a generation-k vertex (1 <= k <= n-1) read off by enumerating
// the subtree below it with its parent edge cut: arctanh(<sigma_x>).
double cavity_field(const ModelParams& params, const VolumeFields& fields, int depth, int k);

// Volume fields for a depth-n tree from a field profile (root field 0 unless given).
VolumeFields fields_from_profile(const FieldProfile& profile, const ModelParams& params, int depth, double boundary,
                                 double root = 0.0);

}  // namespace cayley
