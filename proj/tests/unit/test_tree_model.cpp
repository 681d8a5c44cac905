#include <doctest.h>

#include <cmath>

#include "cayley/criticality.hpp"
#include "cayley/tree_model.hpp"

using namespace cayley;

TEST_CASE("make_params caches theta = tanh(beta J)") {
    // tanh(1) to 40 digits: 0.76159415595576488811945828260479...
    const ModelParams p = make_params(2, 1.0, 1.0);
    CHECK(p.theta() == doctest::Approx(0.7615941559557649).epsilon(1e-15));
    CHECK(std::abs(std::tanh(p.beta() * p.J()) - p.theta()) <= 4e-16);

    const ModelParams q = make_params(3, 2.0, 0.5);
    CHECK(q.theta() == doctest::Approx(0.7615941559557649).epsilon(1e-15));
    CHECK(q.d() == 3);
}

TEST_CASE("make_params rejects invalid inputs") {
    CHECK_THROWS_AS(make_params(2, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(make_params(2, 1.0, -1.0), DomainError);
    CHECK_THROWS_AS(make_params(1, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(make_params(2, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(make_params(2, -1.0, 1.0), DomainError);
    CHECK_THROWS_AS(make_params_from_theta(2, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(make_params_from_theta(2, 1.0, 0.0), DomainError);
}

TEST_CASE("make_params_from_theta stores theta verbatim") {
    const ModelParams p = make_params_from_theta(2, 1.5, 0.8);
    CHECK(p.theta() == 0.8);
    CHECK(std::abs(std::tanh(p.beta() * p.J()) - 0.8) <= 4e-16);
}

TEST_CASE("field_at for the three profile kinds") {
    const ModelParams p = make_params_from_theta(2, 1.0, 0.8);
    const double H = critical_field(p);

    const auto flat = FieldProfile::homogeneous(0.3);
    for (int n : {1, 2, 17, 4000}) CHECK(field_at(flat, p, n) == 0.3);

    const auto square = FieldProfile::critical_minus(EpsilonFamily::power_law(2.0));
    CHECK(field_at(square, p, 2) == doctest::Approx(-H - 0.25).epsilon(1e-15));

    const auto critical_power = FieldProfile::critical_minus(EpsilonFamily::power_law(1.5));
    CHECK(field_at(critical_power, p, 4) == doctest::Approx(-H - 0.125).epsilon(1e-15));

    const auto list = FieldProfile::explicit_list({0.1, -0.2});
    CHECK(field_at(list, p, 2) == -0.2);
    CHECK_THROWS_AS(field_at(list, p, 3), IndexError);
    CHECK_THROWS_AS(field_at(list, p, 0), DomainError);
}

TEST_CASE("perturbed profiles require theta > 1/d") {
    const auto square = FieldProfile::critical_minus(EpsilonFamily::power_law(2.0));
    CHECK_THROWS_AS(field_at(square, make_params_from_theta(2, 1.0, 0.4), 1), CriticalityError);
    CHECK_THROWS_AS(field_at(square, make_params_from_theta(2, 1.0, 0.5), 1), CriticalityError);
    CHECK_NOTHROW(field_at(FieldProfile::homogeneous(0.1), make_params_from_theta(2, 1.0, 0.4), 1));
}

TEST_CASE("field evaluation is deterministic and matches the evaluator") {
    const ModelParams p = make_params(2, 1.0, 1.3);
    const auto profile = FieldProfile::critical_minus(EpsilonFamily::geometric(0.7, 0.2));
    const FieldEvaluator eval(profile, p);
    for (int n = 1; n <= 50; ++n) {
        const double a = field_at(profile, p, n);
        CHECK(a == field_at(profile, p, n));
        CHECK(a == eval(n));
    }
}

TEST_CASE("epsilon families") {
    SUBCASE("power law is positive and strictly decreasing") {
        for (double gamma : {0.5, 1.0, 1.5, 2.0, 3.0}) {
            const auto eps = EpsilonFamily::power_law(gamma);
            CHECK_NOTHROW(eps.validate_prefix(2000));
            for (int n = 1; n < 2000; ++n) {
                REQUIRE(eps.at(n) > 0.0);
                REQUIRE(eps.at(n + 1) < eps.at(n));
            }
        }
    }
    SUBCASE("geometric") {
        const auto eps = EpsilonFamily::geometric(0.5, 2.0);
        CHECK(eps.at(1) == 2.0);
        CHECK(eps.at(3) == 0.5);
    }
    SUBCASE("construction errors") {
        CHECK_THROWS_AS(EpsilonFamily::power_law(0.0), DomainError);
        CHECK_THROWS_AS(EpsilonFamily::geometric(1.0, 1.0), DomainError);
        CHECK_THROWS_AS(EpsilonFamily::geometric(0.5, 0.0), DomainError);
        CHECK_THROWS_AS(EpsilonFamily::custom({0.3, 0.4}), MonotonicityError);
        CHECK_THROWS_AS(EpsilonFamily::custom({0.3, 0.0}), MonotonicityError);
        CHECK_THROWS_AS(EpsilonFamily::custom({-0.1}), MonotonicityError);
    }
    SUBCASE("custom lists vanish past their end") {
        const auto eps = EpsilonFamily::custom({0.3, 0.2, 0.2});
        CHECK(eps.at(3) == 0.2);
        CHECK(eps.at(4) == 0.0);
        CHECK_FALSE(eps.is_zero());
        CHECK(EpsilonFamily::custom({0.0, 0.0}).is_zero());
    }
}

TEST_CASE("tree geometry counts") {
    CHECK(TreeGeometry(2, 1).total_vertices() == 4);
    CHECK(TreeGeometry(2, 2).total_vertices() == 10);
    CHECK(TreeGeometry(2, 3).total_vertices() == 22);
    CHECK(TreeGeometry(3, 2).total_vertices() == 17);

    for (int d = 2; d <= 5; ++d) {
        for (int depth = 1; depth <= 6; ++depth) {
            const TreeGeometry g(d, depth);
            std::int64_t sum = 0;
            for (int k = 0; k <= depth; ++k) sum += g.generation_size(k);
            CHECK(sum == TreeGeometry::total_vertices(d, depth));
            CHECK(g.total_vertices() == sum);
            CHECK(TreeGeometry(d, depth, false).total_vertices() == sum - 1);
        }
    }
}

TEST_CASE("tree geometry adjacency") {
    const TreeGeometry g(3, 3);
    const std::vector<int> parent = g.parents();
    std::vector<int> children(parent.size(), 0);
    for (std::size_t v = 1; v < parent.size(); ++v) ++children[static_cast<std::size_t>(parent[v])];
    CHECK(parent[0] == -1);
    CHECK(children[0] == 4);
    for (int k = 1; k < 3; ++k)
        for (auto v = g.generation_begin(k); v < g.generation_end(k); ++v) CHECK(children[static_cast<std::size_t>(v)] == 3);
    for (auto v = g.generation_begin(3); v < g.generation_end(3); ++v) CHECK(children[static_cast<std::size_t>(v)] == 0);
    // parents live one generation up
    for (auto v = g.generation_begin(2); v < g.generation_end(2); ++v) {
        CHECK(parent[static_cast<std::size_t>(v)] >= g.generation_begin(1));
        CHECK(parent[static_cast<std::size_t>(v)] < g.generation_end(1));
    }

    const TreeGeometry cav = TreeGeometry::cavity(2, 2);
    CHECK(cav.total_vertices() == 7);
    CHECK(cav.root_children() == 2);
}
