#include "cayley/exact_oracle.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <thread>

#include "cayley/recursion.hpp"

namespace cayley {

namespace {

struct ChunkSum {
    double max = -INFINITY;
    double scaled = 0.0;  // sum exp(lw - max)
};

double log_add(const ChunkSum& c) { return c.max + std::log(c.scaled); }

// Precomputed masks for the edge and field terms of the log weight.
struct WeightModel {
    struct Internal {
        int vertex;
        std::uint64_t children;
        int fan;
    };
    std::vector<Internal> internal;
    std::vector<std::uint64_t> generation_mask;
    std::vector<int> generation_size;
    std::vector<double> generation_field;
    double coupling;  // beta * J

    double operator()(std::uint64_t config) const {
        int alignment = 0;  // sum over edges of sigma_x sigma_y
        for (const Internal& u : internal) {
            const int up = std::popcount(config & u.children);
            const int agree = ((config >> u.vertex) & 1U) ? up : u.fan - up;
            alignment += 2 * agree - u.fan;
        }
        double lw = coupling * alignment;
        for (std::size_t k = 0; k < generation_mask.size(); ++k) {
            const int magnetization = 2 * std::popcount(config & generation_mask[k]) - generation_size[k];
            lw += generation_field[k] * magnetization;
        }
        return lw;
    }
};

WeightModel build_model(const TreeGeometry& geometry, const ModelParams& params, const VolumeFields& fields) {
    const int depth = geometry.depth();
    WeightModel model;
    model.coupling = params.beta() * params.J();
    const std::vector<int> parent = geometry.parents();
    std::vector<std::uint64_t> children(parent.size(), 0);
    std::vector<int> fan(parent.size(), 0);
    for (std::size_t v = 1; v < parent.size(); ++v) {
        children[static_cast<std::size_t>(parent[v])] |= std::uint64_t{1} << v;
        ++fan[static_cast<std::size_t>(parent[v])];
    }
    for (std::size_t v = 0; v < parent.size(); ++v)
        if (fan[v] > 0) model.internal.push_back({static_cast<int>(v), children[v], fan[v]});

    for (int k = 0; k <= depth; ++k) {
        std::uint64_t mask = 0;
        for (auto v = geometry.generation_begin(k); v < geometry.generation_end(k); ++v) mask |= std::uint64_t{1} << v;
        model.generation_mask.push_back(mask);
        model.generation_size.push_back(static_cast<int>(geometry.generation_size(k)));
        double field = 0.0;
        if (k == 0) field = fields.root;
        else if (k == depth) field = fields.boundary;
        else field = fields.interior[static_cast<std::size_t>(k - 1)];
        model.generation_field.push_back(field);
    }
    return model;
}

void check_volume(const TreeGeometry& geometry, const VolumeFields& fields, int max_vertices) {
    if (!geometry.root_included()) throw DomainError("enumeration requires the root to be part of the volume");
    if (geometry.depth() < 1) throw DomainError("enumeration requires depth >= 1");
    const int cap = std::min(max_vertices, kVertexCap);
    if (geometry.total_vertices() > cap)
        throw SizeError("volume has " + std::to_string(geometry.total_vertices()) + " vertices; enumeration cap is " +
                        std::to_string(cap));
    if (fields.interior.size() != static_cast<std::size_t>(geometry.depth() - 1))
        throw DomainError("expected " + std::to_string(geometry.depth() - 1) + " interior generation fields");
}

// Runs body(chunk) for chunk = 0..count-1 over a fixed pool of workers.
template <class Body>
void for_each_chunk(int count, int workers, Body&& body) {
    workers = std::clamp(workers, 1, count);
    if (workers == 1) {
        for (int c = 0; c < count; ++c) body(c);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int c = next++; c < count; c = next++) body(c);
        });
}

}  // namespace

double FiniteGibbsTable::probability(std::uint64_t config) const {
    return std::exp(log_weights.at(config) - log_Z);
}

FiniteGibbsTable enumerate(const TreeGeometry& geometry, const ModelParams& params, const VolumeFields& fields,
                           int workers, int max_vertices) {
    check_volume(geometry, fields, max_vertices);
    const WeightModel model = build_model(geometry, params, fields);
    const auto vertices = static_cast<int>(geometry.total_vertices());
    const std::uint64_t configs = std::uint64_t{1} << vertices;

    FiniteGibbsTable table{geometry, params, fields, std::vector<double>(configs), 0.0};

    // The chunking depends only on the volume, so the reduction order (and the
    // result bits) do not depend on the worker count.
    const int chunk_bits = std::min(vertices, 6);
    const int chunks = 1 << chunk_bits;
    const std::uint64_t per_chunk = configs >> chunk_bits;
    std::vector<ChunkSum> partial(static_cast<std::size_t>(chunks));
    for_each_chunk(chunks, workers, [&](int c) {
        const std::uint64_t first = static_cast<std::uint64_t>(c) * per_chunk;
        ChunkSum sum;
        for (std::uint64_t s = first; s < first + per_chunk; ++s) {
            const double lw = model(s);
            table.log_weights[s] = lw;
            sum.max = std::max(sum.max, lw);
        }
        for (std::uint64_t s = first; s < first + per_chunk; ++s) sum.scaled += std::exp(table.log_weights[s] - sum.max);
        partial[static_cast<std::size_t>(c)] = sum;
    });

    double global_max = -INFINITY;
    for (const ChunkSum& c : partial) global_max = std::max(global_max, c.max);
    double total = 0.0;
    for (const ChunkSum& c : partial) total += std::exp(log_add(c) - global_max);
    table.log_Z = global_max + std::log(total);
    return table;
}

double site_magnetization(const FiniteGibbsTable& table, int vertex) {
    double m = 0.0;
    for (std::uint64_t s = 0; s < table.size(); ++s) {
        const double p = table.probability(s);
        m += ((s >> vertex) & 1U) ? p : -p;
    }
    return m;
}

CompatibilityReport verify_compatibility(const TreeGeometry& geometry, const ModelParams& params,
                                         const VolumeFields& fields, int workers,
                                         std::optional<double> b_prev_override) {
    const int n = geometry.depth();
    if (n < 2) throw DomainError("compatibility check needs depth >= 2");
    check_volume(geometry, fields, kVertexCap);

    const double h_prev = fields.interior[static_cast<std::size_t>(n - 2)];
    const double b_prev = b_prev_override.value_or(psi(fields.boundary, h_prev, params));

    const TreeGeometry coarse_geometry(geometry.d(), n - 1);
    VolumeFields coarse{std::vector<double>(fields.interior.begin(), fields.interior.end() - 1), b_prev, fields.root};

    const FiniteGibbsTable fine_table = enumerate(geometry, params, fields, workers);
    const FiniteGibbsTable coarse_table = enumerate(coarse_geometry, params, coarse, workers);

    const auto low_bits = static_cast<int>(coarse_geometry.total_vertices());
    const std::uint64_t outer = std::uint64_t{1} << (geometry.total_vertices() - low_bits);
    double worst = 0.0;
    for (std::uint64_t sigma = 0; sigma < coarse_table.size(); ++sigma) {
        double top = -INFINITY;
        for (std::uint64_t omega = 0; omega < outer; ++omega)
            top = std::max(top, fine_table.log_weights[sigma | (omega << low_bits)]);
        double scaled = 0.0;
        for (std::uint64_t omega = 0; omega < outer; ++omega)
            scaled += std::exp(fine_table.log_weights[sigma | (omega << low_bits)] - top);
        const double marginal = std::exp(top + std::log(scaled) - fine_table.log_Z);
        worst = std::max(worst, std::abs(marginal - coarse_table.probability(sigma)));
    }
    return CompatibilityReport{n, fields.boundary, b_prev, worst};
}

RootMagnetization root_magnetization(const TreeGeometry& geometry, const ModelParams& params,
                                     const VolumeFields& fields, int workers) {
    if (geometry.depth() < 1) throw DomainError("root magnetization needs depth >= 1");
    if (fields.interior.size() != static_cast<std::size_t>(geometry.depth() - 1))
        throw DomainError("expected " + std::to_string(geometry.depth() - 1) + " interior generation fields");

    double b = fields.boundary;
    for (int k = geometry.depth() - 1; k >= 1; --k) b = psi(b, fields.interior[static_cast<std::size_t>(k - 1)], params);
    RootMagnetization out{std::tanh(fields.root + geometry.root_children() * kernel_F(b, params.theta())), std::nullopt};

    if (geometry.total_vertices() <= kVertexCap)
        out.enumeration = site_magnetization(enumerate(geometry, params, fields, workers), 0);
    return out;
}

double cavity_field(const ModelParams& params, const VolumeFields& fields, int depth, int k) {
    if (k < 1 || k >= depth) throw DomainError("cavity field needs 1 <= k <= depth - 1");
    if (fields.interior.size() != static_cast<std::size_t>(depth - 1))
        throw DomainError("expected " + std::to_string(depth - 1) + " interior generation fields");
    const TreeGeometry subtree = TreeGeometry::cavity(params.d(), depth - k);
    VolumeFields sub{std::vector<double>(fields.interior.begin() + k, fields.interior.end()), fields.boundary,
                     fields.interior[static_cast<std::size_t>(k - 1)]};
    const double m = site_magnetization(enumerate(subtree, params, sub), 0);
    return std::atanh(m);
}

VolumeFields fields_from_profile(const FieldProfile& profile, const ModelParams& params, int depth, double boundary,
                                 double root) {
    if (depth < 1) throw DomainError("depth must be >= 1");
    VolumeFields out{{}, boundary, root};
    for (int k = 1; k < depth; ++k) out.interior.push_back(field_at(profile, params, k));
    return out;
}

}  // namespace cayley
