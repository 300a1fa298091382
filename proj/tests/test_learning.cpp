#include "doctest.h"

#include <cmath>

#include "qwalk/electric.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/learning.hpp"

using namespace qwalk;
using namespace qwalk::learning;

namespace {

std::vector<Subset> marked_subsets(const CompiledInstance& c) {
    std::vector<Subset> out;
    for (Vertex v : c.instance.marked.vertices()) out.push_back(c.subsets[v]);
    return out;
}

Input unit(int n, int i) {
    Input x(n, 0);
    x[i] = 1;
    return x;
}

LearningGraph and_path() {
    return LearningGraph(2, {{0, 0, 1.0}, {subset_of({0}), 1, 1.0}}, BooleanFunction("and", 2));
}

}  // namespace

TEST_CASE("subset helpers") {
    CHECK(subset_of({0, 2}) == 5u);
    CHECK(members(5u) == std::vector<int>{0, 2});
    CHECK(format_subset(0) == "{}");
    CHECK(format_subset(subset_of({1, 3})) == "{1,3}");
}

TEST_CASE("boolean functions") {
    BooleanFunction f_or("or", 2), f_and("and", 2), f_par("parity", 2), f_thr("threshold", 2, 2),
        f_dist("distinctness", 4, 2);
    CHECK(f_or({0, 0, 1}));
    CHECK_FALSE(f_or({0, 0, 0}));
    CHECK(f_and({1, 1}));
    CHECK_FALSE(f_and({1, 0}));
    CHECK(f_par({1, 0, 0}));
    CHECK_FALSE(f_par({1, 1, 0}));
    CHECK(f_thr({1, 0, 1}));
    CHECK_FALSE(f_thr({1, 0, 0}));
    CHECK(f_dist({0, 3, 3}));
    CHECK_FALSE(f_dist({0, 1, 2}));
    CHECK_THROWS_AS(BooleanFunction("majority-ish", 2), InvalidInstance);

    CHECK(f_or.is_certificate(subset_of({1}), {0, 1, 0}, 3));
    CHECK_FALSE(f_or.is_certificate(0, {0, 1, 0}, 3));
    CHECK_FALSE(f_or.is_certificate(subset_of({0}), {0, 1, 0}, 3));
    CHECK(f_and.is_certificate(subset_of({0, 1}), {1, 1}, 2));
    CHECK_FALSE(f_and.is_certificate(subset_of({0}), {1, 1}, 2));
}

TEST_CASE("explicit domain restricts certificates") {
    // OR is constant on this domain, so every subset is a certificate.
    BooleanFunction f("or", 2, 0, std::vector<Input>{{1, 0}, {0, 1}});
    CHECK(f.in_domain({1, 0}, 2));
    CHECK_FALSE(f.in_domain({0, 0}, 2));
    CHECK(f.is_certificate(0, {1, 0}, 2));
    auto lg = LearningGraph(2, {{0, 0, 1.0}, {0, 1, 1.0}}, f);
    CHECK_THROWS_AS(compile(lg, {0, 0}), DomainError);
    const auto c = compile(lg, {1, 0});
    CHECK(marked_subsets(c).size() == 3);
}

TEST_CASE("learning graph construction") {
    const auto lg = or_star_graph(3);
    CHECK(lg.vertices() == std::vector<Subset>{0, 1, 2, 4});
    CHECK_THROWS_AS(LearningGraph(2, {{1, 0, 1.0}}, BooleanFunction("or", 2)), InvalidInstance);  // 0 already in {0}
    CHECK_THROWS_AS(LearningGraph(2, {{0, 2, 1.0}}, BooleanFunction("or", 2)), InvalidInstance);
    CHECK_THROWS_AS(LearningGraph(2, {{0, 0, 0.0}}, BooleanFunction("or", 2)), InvalidInstance);
    CHECK_THROWS_AS(or_star_graph(0), InvalidInstance);
}

TEST_CASE("OR star marks exactly the index holding the one") {
    for (int n : {2, 4, 9}) {
        for (int i = 0; i < n; ++i) {
            const auto c = compile(or_star_graph(n), unit(n, i));
            CHECK(c.positive);
            CHECK(marked_subsets(c) == std::vector<Subset>{Subset{1} << i});
            CHECK(c.instance.graph.has_partition());
            CHECK(c.instance.sigma[0] == 1.0);
            CHECK(c.instance.graph.side(0) == Side::A);
        }
        const auto z = compile(or_star_graph(n), Input(n, 0));
        CHECK_FALSE(z.positive);
        CHECK(z.instance.marked.empty());
    }
}

TEST_CASE("AND path") {
    const auto c = compile(and_path(), {1, 1});
    CHECK(marked_subsets(c) == std::vector<Subset>{subset_of({0, 1})});
    CHECK(effective_resistance(c.instance) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(compile(and_path(), {1, 0}).instance.marked.empty());
}

TEST_CASE("OR star complexity is sqrt(n)") {
    for (int n : {2, 4, 9, 16}) {
        std::vector<Input> pos;
        for (int i = 0; i < n; ++i) pos.push_back(unit(n, i));
        CHECK(std::abs(complexity(or_star_graph(n), pos) - std::sqrt(double(n))) <= 1e-12);
    }
    CHECK_THROWS_AS(complexity(or_star_graph(2), {}), PreconditionError);
    CHECK_THROWS_AS(complexity(or_star_graph(2), {{0, 0}}), PreconditionError);
}

TEST_CASE("parallel certificate paths halve the resistance") {
    LearningGraph both(2, {{0, 0, 1.0}, {0, 1, 1.0}, {subset_of({0}), 1, 1.0}, {subset_of({1}), 0, 1.0}},
                       BooleanFunction("and", 2));
    const double single = effective_resistance(compile(and_path(), {1, 1}).instance);
    const double twin = effective_resistance(compile(both, {1, 1}).instance);
    CHECK(twin == doctest::Approx(single / 2).epsilon(1e-12));
}

TEST_CASE("pruning drops the part unreachable from the empty set") {
    LearningGraph lg(2, {{0, 0, 1.0}, {subset_of({1}), 0, 1.0}}, BooleanFunction("or", 2));
    const auto c = compile(lg, {0, 1});
    CHECK(c.instance.graph.num_vertices() == 2);
    CHECK(c.instance.marked.empty());
    CHECK(c.pruned_marked == std::vector<Subset>{subset_of({1}), subset_of({0, 1})});
}

TEST_CASE("certify OR and AND") {
    for (int n : {2, 4}) {
        std::vector<Input> pos;
        for (int i = 0; i < n; ++i) pos.push_back(unit(n, i));
        const auto report = certify_detection(or_star_graph(n), pos, {Input(n, 0)}, WalkParams{});
        CHECK(report.passed());
        CHECK(report.resistance_bound == doctest::Approx(1.0));
        CHECK(report.total_weight == doctest::Approx(n));
        for (const auto& e : report.entries) {
            CHECK(e.error.empty());
            CHECK(e.results.size() == 2);
            CHECK(e.queries == 2 * e.results[0].steps);
            CHECK(e.results[0].steps <= e.step_bound);
        }
    }
    const auto report = certify_detection(and_path(), {{1, 1}}, {{0, 0}, {1, 0}, {0, 1}}, WalkParams{});
    CHECK(report.passed());
    CHECK(report.entries.size() == 4);
}

TEST_CASE("a positive with no reachable certificate is reported, not thrown") {
    LearningGraph lg(2, {{0, 0, 1.0}}, BooleanFunction("or", 2));
    const auto report = certify_detection(lg, {{1, 0}, {0, 1}}, {{0, 0}}, WalkParams{});
    CHECK_FALSE(report.passed());
    bool saw = false;
    for (const auto& e : report.entries) {
        if (e.input == Input{0, 1}) {
            saw = true;
            CHECK_FALSE(e.passed);
            CHECK_FALSE(e.error.empty());
        }
    }
    CHECK(saw);
}
