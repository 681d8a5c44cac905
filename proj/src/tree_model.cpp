#include "cayley/tree_model.hpp"

#include <cmath>
#include <sstream>

#include "cayley/criticality.hpp"

namespace cayley {

namespace {

void check_model_inputs(int d, double J) {
    if (d < 2) throw DomainError("tree order d must be >= 2");
    if (!(J > 0.0) || !std::isfinite(J)) throw DomainError("coupling J must be positive and finite");
}

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

ModelParams make_params(int d, double J, double beta) {
    check_model_inputs(d, J);
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("inverse temperature beta must be positive and finite");
    const double theta = std::tanh(beta * J);
    if (!(theta < 1.0)) throw DomainError("beta * J too large: tanh(beta J) rounds to 1");
    return ModelParams(d, J, beta, theta);
}

ModelParams make_params_from_theta(int d, double J, double theta) {
    check_model_inputs(d, J);
    if (!(theta > 0.0 && theta < 1.0)) throw DomainError("theta must lie in (0, 1)");
    return ModelParams(d, J, std::atanh(theta) / J, theta);
}

// ---------------------------------------------------------------------------

EpsilonFamily EpsilonFamily::power_law(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("power-law exponent gamma must be positive");
    return EpsilonFamily(PowerLaw{gamma});
}

EpsilonFamily EpsilonFamily::geometric(double ratio, double amplitude) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw DomainError("geometric ratio must lie in (0, 1)");
    if (!(amplitude > 0.0) || !std::isfinite(amplitude)) throw DomainError("geometric amplitude must be positive");
    return EpsilonFamily(Geometric{ratio, amplitude});
}

EpsilonFamily EpsilonFamily::custom(std::vector<double> values) {
    EpsilonFamily family(CustomList{std::move(values)});
    family.validate_prefix(static_cast<std::int64_t>(std::get<CustomList>(family.kind_).values.size()));
    return family;
}

double EpsilonFamily::at(std::int64_t n) const {
    if (n < 1) throw DomainError("generation index must be >= 1");
    return std::visit(Overloaded{
                          [n](const PowerLaw& p) { return std::pow(static_cast<double>(n), -p.gamma); },
                          [n](const Geometric& g) { return g.amplitude * std::pow(g.ratio, static_cast<double>(n - 1)); },
                          [n](const CustomList& c) {
                              return n <= static_cast<std::int64_t>(c.values.size())
                                         ? c.values[static_cast<std::size_t>(n - 1)]
                                         : 0.0;
                          },
                      },
                      kind_);
}

bool EpsilonFamily::is_zero() const {
    const auto* list = std::get_if<CustomList>(&kind_);
    if (list == nullptr) return false;
    for (double v : list->values)
        if (v != 0.0) return false;
    return true;
}

void EpsilonFamily::validate_prefix(std::int64_t n) const {
    if (is_zero()) return;
    double previous = 0.0;
    for (std::int64_t i = 1; i <= n; ++i) {
        const double e = at(i);
        if (!std::isfinite(e) || !(e > 0.0)) {
            std::ostringstream msg;
            msg << "perturbation eps_" << i << " = " << e << " is not positive";
            throw MonotonicityError(msg.str());
        }
        if (i > 1 && e > previous) {
            std::ostringstream msg;
            msg << "perturbation increases at n = " << i << " (" << previous << " -> " << e << ")";
            throw MonotonicityError(msg.str());
        }
        previous = e;
    }
}

std::string EpsilonFamily::describe() const {
    std::ostringstream out;
    std::visit(Overloaded{
                   [&](const PowerLaw& p) { out << "power-law(gamma=" << p.gamma << ")"; },
                   [&](const Geometric& g) { out << "geometric(r=" << g.ratio << ", a=" << g.amplitude << ")"; },
                   [&](const CustomList& c) { out << "custom(" << c.values.size() << " values)"; },
               },
               kind_);
    return out.str();
}

// ---------------------------------------------------------------------------

const EpsilonFamily* FieldProfile::epsilon() const noexcept {
    const auto* p = std::get_if<CriticalMinusPerturbation>(&kind_);
    return p ? &p->epsilon : nullptr;
}

std::string FieldProfile::describe() const {
    std::ostringstream out;
    std::visit(Overloaded{
                   [&](const Homogeneous& h) { out << "homogeneous(h=" << h.h << ")"; },
                   [&](const CriticalMinusPerturbation& c) { out << "-h_c - " << c.epsilon.describe(); },
                   [&](const ExplicitList& e) { out << "explicit(" << e.values.size() << " values)"; },
               },
               kind_);
    return out.str();
}

namespace {

double perturbed_critical(const ModelParams& params) {
    if (!(params.theta() * params.d() > 1.0))
        throw CriticalityError("perturbed critical field requires theta > 1/d");
    return critical_field(params);
}

}  // namespace

double field_at(const FieldProfile& profile, const ModelParams& params, std::int64_t n) {
    if (n < 1) throw DomainError("generation index must be >= 1");
    return std::visit(Overloaded{
                          [](const Homogeneous& h) { return h.h; },
                          [&](const CriticalMinusPerturbation& c) { return -perturbed_critical(params) - c.epsilon.at(n); },
                          [n](const ExplicitList& e) {
                              if (n > static_cast<std::int64_t>(e.values.size()))
                                  throw IndexError("generation " + std::to_string(n) + " beyond explicit field list of length " +
                                                   std::to_string(e.values.size()));
                              return e.values[static_cast<std::size_t>(n - 1)];
                          },
                      },
                      profile.kind());
}

FieldEvaluator::FieldEvaluator(const FieldProfile& profile, const ModelParams& params) : profile_(&profile) {
    if (profile.epsilon() != nullptr) critical_ = perturbed_critical(params);
}

double FieldEvaluator::operator()(std::int64_t n) const {
    if (n < 1) throw DomainError("generation index must be >= 1");
    return std::visit(Overloaded{
                          [](const Homogeneous& h) { return h.h; },
                          [&](const CriticalMinusPerturbation& c) { return -critical_ - c.epsilon.at(n); },
                          [n](const ExplicitList& e) {
                              if (n > static_cast<std::int64_t>(e.values.size()))
                                  throw IndexError("generation " + std::to_string(n) + " beyond explicit field list of length " +
                                                   std::to_string(e.values.size()));
                              return e.values[static_cast<std::size_t>(n - 1)];
                          },
                      },
                      profile_->kind());
}

// ---------------------------------------------------------------------------

TreeGeometry::TreeGeometry(int d, int depth, bool root_included) : TreeGeometry(d, depth, d + 1, root_included) {}

TreeGeometry::TreeGeometry(int d, int depth, int root_children, bool root_included)
    : d_(d), depth_(depth), root_children_(root_children), root_included_(root_included) {
    if (d < 2) throw DomainError("tree order d must be >= 2");
    if (depth < 0) throw DomainError("depth must be non-negative");
}

TreeGeometry TreeGeometry::cavity(int d, int depth) { return TreeGeometry(d, depth, d, true); }

std::int64_t TreeGeometry::generation_size(int k) const {
    if (k < 0 || k > depth_) throw IndexError("generation outside the volume");
    if (k == 0) return 1;
    std::int64_t size = root_children_;
    for (int i = 1; i < k; ++i) size *= d_;
    return size;
}

std::int64_t TreeGeometry::total_vertices() const {
    std::int64_t total = root_included_ ? 1 : 0;
    for (int k = 1; k <= depth_; ++k) total += generation_size(k);
    return total;
}

std::int64_t TreeGeometry::total_vertices(int d, int depth, bool root_included) {
    if (d < 2) throw DomainError("tree order d must be >= 2");
    std::int64_t power = 1;
    for (int i = 0; i < depth; ++i) power *= d;
    return (root_included ? 1 : 0) + (d + 1) * (power - 1) / (d - 1);
}

std::int64_t TreeGeometry::generation_begin(int k) const {
    if (k < 0 || k > depth_) throw IndexError("generation outside the volume");
    std::int64_t begin = 0;
    for (int i = 0; i < k; ++i) begin += generation_size(i);
    return begin;
}

std::vector<int> TreeGeometry::parents() const {
    std::vector<int> parent(static_cast<std::size_t>(total_vertices() + (root_included_ ? 0 : 1)), -1);
    // Children of generation k-1 are laid out in parent order.
    for (int k = 1; k <= depth_; ++k) {
        const std::int64_t first_parent = generation_begin(k - 1);
        const std::int64_t first = generation_begin(k);
        const std::int64_t fan = (k == 1) ? root_children_ : d_;
        for (std::int64_t i = 0; i < generation_size(k); ++i)
            parent[static_cast<std::size_t>(first + i)] = static_cast<int>(first_parent + i / fan);
    }
    return parent;
}

}  // namespace cayley
