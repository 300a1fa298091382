#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "qwalk/network.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

enum class DetectionModel { IdealThreshold, QpeKernel };

std::string to_string(DetectionModel m);
/// Accepts "ideal" / "ideal-threshold" and "kernel" / "qpe-kernel".
DetectionModel parse_model(const std::string& s);

/// Outcome of the detection algorithm with exact probabilities.
struct DetectionResult {
    double early_accept_prob = 0.0;  // marked-support measurement fires
    double phase_accept_prob = 0.0;  // phase estimation accepts, given the measurement said "not marked"
    double total_accept_prob = 0.0;
    long long steps = 0;             // controlled applications of U
    double theta_used = 0.0;
    DetectionModel model = DetectionModel::IdealThreshold;

    // Instance metadata.
    int walk_vertices = 0;
    double walk_total_weight = 0.0;
    double resistance_bound = 0.0;
    Eigen::Index dimension = 0;
    bool doubled = false;
};

nlohmann::json to_json(const DetectionResult& r);

struct SupportMeasurement {
    double p_marked = 0.0;
    /// sigma restricted to S \ M and renormalized; empty when p_marked == 1.
    std::optional<SourceDistribution> collapsed;
};

SupportMeasurement measure_support_marked(const SourceDistribution& sigma, const MarkedSet& marked);

/// Number of phase-estimation ancillas for precision delta: max(0, ceil(log2(1/delta))).
int kernel_bits(double delta);

/// Probability that t-bit phase estimation outputs bucket 0 on eigenphase theta:
/// |2^-t sum_{m < 2^t} e^{i m theta}|^2.
double zero_bucket_probability(double theta, int t);

/// Acceptance probability of phase estimation on `state` (normalized to 1e-9).
double qpe_accept_probability(const Spectrum& spectrum, const Eigen::VectorXcd& state, double delta,
                              DetectionModel model);
double qpe_accept_probability(const Spectrum& spectrum, const Eigen::VectorXd& state, double delta,
                              DetectionModel model);

long long step_count(double delta, DetectionModel model);

struct DetectOptions {
    /// Verify params.resistance_bound >= R_{sigma,M} when M is nonempty.
    bool verify_resistance_bound = true;
};

/// Runs the detection algorithm for every requested model on one walk operator.
std::vector<DetectionResult> detect(const Instance& instance, const WalkParams& params,
                                    std::span<const DetectionModel> models, const DetectOptions& options = {});
DetectionResult detect(const Instance& instance, const WalkParams& params, DetectionModel model,
                       const DetectOptions& options = {});

/// R_{sigma',M} / R_{sigma,M} for the collapsed distribution; throws if it exceeds 9.
double collapse_resistance_check(const Instance& instance);

}  // namespace qwalk
