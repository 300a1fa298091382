#include "doctest.h"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qwalk/errors.hpp"
#include "qwalk/experiment.hpp"
#include "qwalk/io.hpp"

using namespace qwalk;
using namespace qwalk::experiment;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig small_config(const std::filesystem::path& out) {
    ExperimentConfig c;
    auto sweep = [](Family f, std::vector<int> sizes, int count = 1) {
        FamilySweep s;
        s.family = f;
        s.sizes = std::move(sizes);
        s.count = count;
        return s;
    };
    c.families = {sweep(Family::Path, {1, 3}), sweep(Family::Complete, {3}), sweep(Family::RandomWeighted, {6}, 2)};
    c.out = out;
    c.threads = 2;
    return c;
}

}  // namespace

TEST_CASE("family names round-trip") {
    for (auto f : {Family::Path, Family::Cycle, Family::Grid, Family::Star, Family::Complete, Family::RandomWeighted,
                   Family::LearningOr, Family::Kdist}) {
        CHECK(parse_family(to_string(f)) == f);
    }
    CHECK_THROWS_AS(parse_family("hypercube"), PreconditionError);
}

TEST_CASE("generated instance shapes") {
    InstanceSpec path;
    path.family = Family::Path;
    path.size = 4;
    const auto p = generate(path, 1);
    CHECK(p.id == "path-L004-pos");
    CHECK(p.instance.graph.num_vertices() == 5);
    CHECK(p.instance.graph.num_edges() == 4);
    CHECK_FALSE(p.doubled);
    CHECK(p.instance.marked.size() == 1);

    path.positive = false;
    CHECK(generate(path, 1).instance.marked.empty());

    InstanceSpec complete;
    complete.family = Family::Complete;
    complete.size = 4;
    const auto k = generate(complete, 1);
    CHECK(k.doubled);
    CHECK(k.instance.graph.num_vertices() == 8);
    CHECK(k.instance.graph.num_edges() == 12);
    CHECK(total_weight(k.instance.graph) == doctest::Approx(12.0));
    CHECK(k.origin.size() == 8);
}

TEST_CASE("random instances are deterministic in the seed") {
    InstanceSpec spec;
    spec.family = Family::RandomWeighted;
    spec.size = 9;
    spec.variant = 3;
    const auto a = io::instance_to_json(generate(spec, 42).instance);
    const auto b = io::instance_to_json(generate(spec, 42).instance);
    const auto c = io::instance_to_json(generate(spec, 43).instance);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("instance JSON round-trip") {
    InstanceSpec spec;
    spec.family = Family::Grid;
    spec.size = 2;
    spec.width = 3;
    const auto g = generate(spec, 1);
    const auto j = io::instance_to_json(g.instance);
    CHECK(io::instance_to_json(io::instance_from_json(j)) == j);
    auto broken = j;
    broken.erase("edges");
    CHECK_THROWS_AS(io::instance_from_json(broken), InvalidInstance);
}

TEST_CASE("config JSON round-trip") {
    const auto c = ExperimentConfig::acceptance_suite();
    CHECK(to_json(config_from_json(to_json(c))) == to_json(c));
    CHECK(expand(c).size() % 2 == 0);
}

TEST_CASE("suite output is deterministic") {
    const auto root = std::filesystem::temp_directory_path() / "qwalk-test-experiment";
    std::filesystem::remove_all(root);
    std::ostringstream log;
    const auto first = run_suite(small_config(root / "a"), log);
    const auto second = run_suite(small_config(root / "b"), log);
    CHECK(first.passed());
    CHECK(first.cases.size() == 10);
    const auto csv = slurp(root / "a" / "results.csv");
    CHECK(csv == slurp(root / "b" / "results.csv"));
    CHECK(csv.rfind("instance-id,n,W,R,theta,steps,model,accept-prob,is-positive\n", 0) == 0);
    CHECK(std::filesystem::exists(root / "a" / "metadata.json"));
    CHECK(std::filesystem::exists(root / "a" / "instances" / "path-L001-pos.json"));
    std::filesystem::remove_all(root);
}

TEST_CASE("least-squares slope") {
    CHECK(fit_slope({0, 1, 2, 3}, {1, 3, 5, 7}) == doctest::Approx(2.0));
    CHECK(fit_slope({1, 2, 3}, {4, 4, 4}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(fit_slope({1}, {1}), PreconditionError);
}

TEST_CASE("path scaling is linear in sqrt(RW)") {
    const auto res = scaling_study({2, 4, 8, 16}, 8.0, 4.0);
    CHECK(res.points.size() == 4);
    CHECK(res.slope >= 0.85);
    CHECK(res.slope <= 1.15);
}

TEST_CASE("parallel_for visits every index and rethrows") {
    std::atomic<int> sum{0};
    parallel_for(100, 4, [&](std::size_t i) { sum += int(i); });
    CHECK(sum == 4950);
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                        if (i == 7) throw PreconditionError("boom");
                    }),
                    PreconditionError);
}
