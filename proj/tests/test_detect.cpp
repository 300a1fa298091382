#include "doctest.h"

#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "qwalk/detect.hpp"
#include "qwalk/electric.hpp"
#include "qwalk/errors.hpp"
#include "test_support.hpp"

using namespace qwalk;
using namespace qwalk::testing;

namespace {

constexpr DetectionModel kBoth[] = {DetectionModel::IdealThreshold, DetectionModel::QpeKernel};

/// Kernel acceptance from the symmetric part of U: F_t is even in the phase,
/// so the +-theta pairs can be merged into the cos(theta) eigenspaces.
double oracle_kernel_accept(const Eigen::MatrixXd& u, const Eigen::VectorXd& state, int t, double above = -1.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (u + u.transpose()));
    double total = 0.0;
    for (Eigen::Index j = 0; j < u.rows(); ++j) {
        const double theta = std::acos(std::clamp(es.eigenvalues()(j), -1.0, 1.0));
        if (theta <= above) continue;
        const double overlap = es.eigenvectors().col(j).dot(state);
        total += overlap * overlap * oracle_zero_bucket(theta, t);
    }
    return total;
}

Spectrum diagonal_spectrum(std::vector<double> phases) {
    const auto n = static_cast<Eigen::Index>(phases.size());
    Spectrum s;
    s.phases = Eigen::Map<Eigen::VectorXd>(phases.data(), n);
    s.vectors = Eigen::MatrixXcd::Identity(n, n);
    return s;
}

}  // namespace

TEST_CASE("model names") {
    CHECK(parse_model("ideal") == DetectionModel::IdealThreshold);
    CHECK(parse_model("qpe-kernel") == DetectionModel::QpeKernel);
    CHECK(to_string(DetectionModel::QpeKernel) == "qpe-kernel");
    CHECK_THROWS_AS(parse_model("exact"), PreconditionError);
}

TEST_CASE("support measurement") {
    auto none = measure_support_marked(SourceDistribution::point_mass(3, 0), mark(3, {2}));
    CHECK(none.p_marked == 0.0);
    REQUIRE(none.collapsed);
    CHECK((*none.collapsed)[0] == 1.0);

    auto all = measure_support_marked(SourceDistribution::point_mass(3, 2), mark(3, {2}));
    CHECK(all.p_marked == 1.0);
    CHECK_FALSE(all.collapsed);

    auto half = measure_support_marked(SourceDistribution({0.5, 0.5, 0.0}), mark(3, {0}));
    CHECK(half.p_marked == doctest::Approx(0.5));
    REQUIRE(half.collapsed);
    CHECK((*half.collapsed)[1] == doctest::Approx(1.0));
    CHECK((*half.collapsed)[0] == 0.0);
}

TEST_CASE("zero bucket closed form matches the geometric sum") {
    for (int t = 0; t <= 8; ++t) {
        for (double theta = -3.1; theta < 3.14; theta += 0.173) {
            CHECK(zero_bucket_probability(theta, t) == doctest::Approx(oracle_zero_bucket(theta, t)).epsilon(1e-9));
        }
        CHECK(zero_bucket_probability(0.0, t) == 1.0);
    }
    for (int m = 1; m < 8; ++m) CHECK(zero_bucket_probability(2.0 * std::numbers::pi * m / 8.0, 3) <= 1e-28);
    CHECK(kernel_bits(0.25) == 2);
    CHECK(kernel_bits(0.2) == 3);
    CHECK(kernel_bits(1.5) == 0);
    CHECK(step_count(0.2, DetectionModel::IdealThreshold) == 5);
    CHECK(step_count(0.2, DetectionModel::QpeKernel) == 8);
}

TEST_CASE("phase estimation acceptance on explicit spectra") {
    auto s = diagonal_spectrum({0.0, 2.0 * std::numbers::pi / 8.0, -0.05, 2.0});
    Eigen::VectorXd e0 = Eigen::VectorXd::Unit(4, 0);
    Eigen::VectorXd e1 = Eigen::VectorXd::Unit(4, 1);
    for (auto m : kBoth) CHECK(qpe_accept_probability(s, e0, 0.1, m) == doctest::Approx(1.0));
    CHECK(qpe_accept_probability(s, e1, 0.125, DetectionModel::QpeKernel) <= 1e-28);

    Eigen::VectorXd mix = Eigen::VectorXd::Constant(4, 0.5);
    CHECK(qpe_accept_probability(s, mix, 0.1, DetectionModel::IdealThreshold) == doctest::Approx(0.5));
    CHECK_THROWS_AS(qpe_accept_probability(s, Eigen::VectorXd(2.0 * mix), 0.1, DetectionModel::IdealThreshold),
                    UnnormalizedStateError);
    CHECK_THROWS_AS(qpe_accept_probability(s, mix, 0.0, DetectionModel::IdealThreshold), PreconditionError);
    CHECK_THROWS_AS(qpe_accept_probability(s, mix, 4.0, DetectionModel::QpeKernel), PreconditionError);
}

TEST_CASE("sources fully marked accept immediately") {
    Instance in{path_graph(2), SourceDistribution::point_mass(3, 0), mark(3, {0})};
    for (auto r : detect(in, {}, kBoth)) {
        CHECK(r.total_accept_prob == 1.0);
        CHECK(r.steps == 0);
    }
}

TEST_CASE("single edge") {
    ElectricNetwork g(2, {{0, 1, 1.0}});
    auto sigma = SourceDistribution::point_mass(2, 0);
    WalkParams params;  // c1 = 8, c2 = 4, R = 1 = R_{s,t}

    auto pos = detect(Instance{g, sigma, mark(2, {1})}, params, DetectionModel::IdealThreshold);
    CHECK(pos.phase_accept_prob >= 8.0 / 9.0 - 1e-12);
    CHECK(pos.early_accept_prob == 0.0);
    CHECK_FALSE(pos.doubled);
    CHECK(pos.steps == static_cast<long long>(std::ceil(1.0 / params.theta(1.0))));

    for (auto r : detect(Instance{g, sigma, MarkedSet::none(2)}, params, kBoth)) {
        CHECK(r.total_accept_prob <= 1.0 / 64.0 + (r.model == DetectionModel::QpeKernel ? 0.02 : 0.0));
    }
    auto ideal = detect(Instance{g, sigma, MarkedSet::none(2)}, params, DetectionModel::IdealThreshold);
    CHECK(ideal.total_accept_prob <= 1.0 / 64.0);
}

TEST_CASE("resistance bound is verified") {
    Instance in{path_graph(4), SourceDistribution::point_mass(5, 0), mark(5, {4})};
    WalkParams low;
    low.resistance_bound = 2.0;
    CHECK_THROWS_AS(detect(in, low, DetectionModel::IdealThreshold), PreconditionError);
    CHECK_NOTHROW(detect(in, low, DetectionModel::IdealThreshold, DetectOptions{false}));
}

TEST_CASE("path family") {
    for (int len : {2, 4, 8, 16}) {
        WalkParams params;
        params.resistance_bound = len;
        auto sigma = SourceDistribution::point_mass(len + 1, 0);

        Instance neg{path_graph(len), sigma, MarkedSet::none(len + 1)};
        auto ready = prepare_for_walk(neg).instance;
        auto op = build_walk_operator(ready, params);
        const double theta = params.theta(op.total_weight());
        const int t = kernel_bits(theta);
        const double tail = oracle_kernel_accept(op.step(), op.start_state(), t, theta);

        auto results = detect(neg, params, kBoth);
        CHECK(results[0].total_accept_prob <= 1.0 / 64.0);
        CHECK(results[0].total_accept_prob ==
              doctest::Approx(oracle_ideal_accept(op.step(), op.start_state(), theta)).scale(1e-9));
        CHECK(results[1].total_accept_prob <= 1.0 / 64.0 + tail + 1e-12);
        CHECK(results[1].total_accept_prob ==
              doctest::Approx(oracle_kernel_accept(op.step(), op.start_state(), t)).scale(1e-9));
        CHECK(results[1].steps == (1LL << t));

        Instance pos{path_graph(len), sigma, mark(len + 1, {len})};
        for (auto r : detect(pos, params, kBoth)) {
            CHECK(r.total_accept_prob >= 2.0 / 3.0);
            CHECK(r.steps <= 2 * static_cast<long long>(std::ceil(params.c() * std::sqrt(len * double(len)))));
        }
    }
}

TEST_CASE("ideal acceptance is monotone in the precision") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 4 + trial;
        auto g = random_connected_graph(n, rng);
        auto in = prepare_for_walk(Instance{g, SourceDistribution::point_mass(n, 0), mark(n, {n - 1})}).instance;
        WalkParams params;
        params.resistance_bound = effective_resistance(in);
        auto op = build_walk_operator(in, params);
        double prev = 0.0;
        for (double delta = 0.01; delta < 3.1; delta *= 1.3) {
            const double a = qpe_accept_probability(op.spectrum(), op.start_state(), delta,
                                                    DetectionModel::IdealThreshold);
            CHECK(a >= prev - 1e-12);
            prev = a;
        }
    }
}

TEST_CASE("kernel model converges and is dominated near the threshold") {
    std::mt19937_64 rng(67);
    auto g = random_connected_graph(6, rng);
    auto in = prepare_for_walk(Instance{g, SourceDistribution::point_mass(6, 0), MarkedSet::none(6)}).instance;
    WalkParams params;
    params.resistance_bound = 2.0;
    auto op = build_walk_operator(in, params);
    const Eigen::VectorXcd state = op.start_state().cast<std::complex<double>>();
    const Eigen::VectorXd weights = op.spectrum().weights(state);

    // Acceptance with t bits approaches the eigenvalue-1 mass as t grows.
    double unit_mass = 0.0;
    for (Eigen::Index j = 0; j < weights.size(); ++j) {
        if (std::abs(op.spectrum().phases(j)) <= kUnitPhaseThreshold) unit_mass += weights(j);
    }
    double prev_gap = 1.0;
    for (int t = 6; t <= 20; t += 2) {
        double a = 0.0;
        for (Eigen::Index j = 0; j < weights.size(); ++j) a += weights(j) * zero_bucket_probability(op.spectrum().phases(j), t);
        const double gap = std::abs(a - unit_mass);
        CHECK(gap <= prev_gap + 1e-12);
        prev_gap = gap;
    }
    CHECK(prev_gap <= 1e-3);

    for (double delta : {0.02, 0.05, 0.1, 0.3, 0.9}) {
        const int t = kernel_bits(delta);
        double inside = 0.0, weighted = 0.0;
        for (Eigen::Index j = 0; j < weights.size(); ++j) {
            const double theta = op.spectrum().phases(j);
            if (std::abs(theta) > delta) continue;
            const double f = zero_bucket_probability(theta, t);
            CHECK(f >= 4.0 / (std::numbers::pi * std::numbers::pi));
            inside += weights(j);
            weighted += weights(j) * f;
        }
        CHECK(qpe_accept_probability(op.spectrum(), state, delta, DetectionModel::IdealThreshold) ==
              doctest::Approx(inside));
        CHECK(inside >= weighted - 1e-15);
    }
}

TEST_CASE("total acceptance combines the two branches") {
    Instance in{path_graph(3), SourceDistribution({0.25, 0.0, 0.0, 0.75}), mark(4, {0})};
    WalkParams params;
    params.resistance_bound = 9.0 * effective_resistance(in);
    for (auto r : detect(in, params, kBoth)) {
        CHECK(r.early_accept_prob == doctest::Approx(0.25));
        CHECK(r.total_accept_prob ==
              doctest::Approx(r.early_accept_prob + (1.0 - r.early_accept_prob) * r.phase_accept_prob));
        CHECK(r.phase_accept_prob >= 0.0);
        CHECK(r.phase_accept_prob <= 1.0);
    }
    auto j = to_json(detect(in, params, DetectionModel::QpeKernel));
    CHECK(j["model"] == "qpe-kernel");
    CHECK(j.contains("theta_used"));
}

TEST_CASE("collapse resistance") {
    Instance disjoint{path_graph(2), SourceDistribution::point_mass(3, 0), mark(3, {2})};
    CHECK(collapse_resistance_check(disjoint) == 1.0);

    Instance half{path_graph(2), SourceDistribution({0.5, 0.0, 0.5}), mark(3, {0})};
    const double ratio = collapse_resistance_check(half);
    const double oracle = oracle_resistance(half.graph, SourceDistribution::point_mass(3, 2), half.marked) /
                          oracle_resistance(half.graph, half.sigma, half.marked);
    CHECK(ratio == doctest::Approx(oracle));
    CHECK(ratio <= 9.0);

    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 4 + trial % 8;
        auto g = random_connected_graph(n, rng);
        std::vector<double> p(n, 0.0);
        p[0] = 0.5;
        p[1] = 0.5;
        Instance in{g, SourceDistribution(p), mark(n, {0, n - 1})};
        CHECK(collapse_resistance_check(in) <= 9.0);
    }

    Instance heavy{path_graph(2), SourceDistribution({0.7, 0.0, 0.3}), mark(3, {0})};
    CHECK_THROWS_AS(collapse_resistance_check(heavy), PreconditionError);
    CHECK_THROWS_AS(collapse_resistance_check(Instance{path_graph(2), SourceDistribution::point_mass(3, 0),
                                                       MarkedSet::none(3)}),
                    PreconditionError);
}
