#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wim/analyze.hpp"
#include "wim/errors.hpp"
#include "wim/rating_scale.hpp"

namespace wim {

/// Context-free log-probabilities of one response under the current and
/// reference policies.
struct LogProbPair {
    double logp_theta = 0.0;
    double logp_ref = 0.0;
};

/// Tabular categorical policy over a fixed candidate set: softmax of
/// logits / temperature.
struct ToyPolicy {
    std::vector<double> logits;
    double temperature = 1.0;

    std::vector<double> probs() const;
    std::vector<double> log_probs() const;
    double entropy() const;  // Shannon entropy in nats
};

double sigmoid(double x);
double softplus(double x);  // ln(1 + e^x), stable for large |x|

/// beta * (logp_theta - logp_ref).
double implicit_reward(const LogProbPair& lp, double beta);

/// Winner implicit reward minus loser implicit reward.
double reward_advantage(double reward_winner, double reward_loser);

/// -ln sigmoid(advantage), computed as softplus(-advantage).
double dpo_loss(double advantage);

/// sigmoid(reward_loser - reward_winner): the gradient magnitude factor,
/// larger when the current reward estimate ranks the pair wrongly.
double dpo_gradient_weight(double reward_winner, double reward_loser);

/// Negative log-softmax of rewards[chosen_idx], max-subtracted for
/// stability. Throws InputError on a bad index or fewer than 2 rewards.
double reward_model_loss(const std::vector<double>& rewards,
                         std::size_t chosen_idx);

/// One exact gradient-descent step of the pairwise loss on the policy
/// logits. The reference policy is left untouched. Throws InputError when
/// winner_idx == loser_idx or indices are out of range.
ToyPolicy toy_dpo_step(const ToyPolicy& policy, const ToyPolicy& reference,
                       std::size_t winner_idx, std::size_t loser_idx,
                       double beta, double learning_rate);

/// Counter-based deterministic RNG: output depends only on
/// (seed, stream, counter), never on call order.
struct CounterRng {
    std::uint64_t seed = 0;

    double uniform01(std::uint64_t stream, std::uint64_t counter) const;
    // Standard normal via Box-Muller on two counter-derived uniforms.
    double normal(std::uint64_t stream, std::uint64_t counter) const;
};

std::uint64_t hash_stream(const std::string& name);

enum class SynthJudgeMode { discrete, continuous };

/// Synthetic judge: latent quality plus Gaussian noise plus per-step drift,
/// rounded to the integer scale in discrete mode or clamped to [-1, 1] in
/// continuous mode.
struct SyntheticJudgeConfig {
    SynthJudgeMode mode = SynthJudgeMode::discrete;
    double noise_sd = 0.25;
    double drift_per_step = 0.0;  // 0 models the fixed judge
    RatingScale scale;
    std::uint64_t seed = 0;
};

/// Deterministic given (cfg.seed, stream, step). Discrete mode returns an
/// integer-valued double on the scale; continuous mode a real in [-1, 1].
double synth_judge(double quality, const SyntheticJudgeConfig& cfg,
                   std::uint64_t step, std::uint64_t stream);

struct ExperimentConfig {
    std::size_t n_prompts = 20;
    std::size_t k_candidates = 4;
    std::size_t steps = 500;
    double beta = 0.1;
    double learning_rate = 0.5;
    double temperature = 1.0;
    std::uint64_t seed = 1;
    RatingScale scale;
    // Latent candidate quality distribution (clamped to [0, 1]).
    double quality_mean = 2.0 / 3.0;
    double quality_sd = 0.03;
    // Judge noise. The continuous value is the discrete one divided by the
    // half-span so both judges see the same spread on the display scale.
    double discrete_noise_sd = 0.25;
    double continuous_noise_sd = 0.055;
    double moving_drift_per_step = 0.002;

    void validate() const;
};

/// Per-arm outcome of the synthetic learning-signal experiment.
struct SignalReport {
    std::string method;
    DeltaStats delta_stats;  // deltas on the display scale
    std::vector<double> loss_trajectory;
    std::vector<double> advantage_trajectory;
    std::vector<double> entropy_trajectory;
};

constexpr const char* kArmRandom = "random";
constexpr const char* kArmNumerical = "numerical";
constexpr const char* kArmWimFixed = "wim-fixed";
constexpr const char* kArmWimMoving = "wim-moving";

/// Runs one arm: judge, rank best-vs-worst, train the tabular policy on
/// non-tie pairs, and record per-step loss / advantage / entropy.
SignalReport run_signal_arm(const std::string& arm,
                            const ExperimentConfig& config);

/// All four arms: random, numerical, wim-fixed, wim-moving.
std::vector<SignalReport> run_signal_experiment(const ExperimentConfig& cfg);

/// CSV serialization: `step,loss,advantage,entropy` rows. Byte-deterministic.
std::string signal_report_csv(const SignalReport& report);

}  // namespace wim
