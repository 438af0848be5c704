#include "wim/dpomath.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <sstream>

#include "wim/scoring.hpp"

namespace wim {

namespace {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

std::vector<double> ToyPolicy::probs() const {
    std::vector<double> p = log_probs();
    for (double& v : p) v = std::exp(v);
    return p;
}

std::vector<double> ToyPolicy::log_probs() const {
    std::vector<double> lp(logits.size());
    const double t = temperature;
    double max_logit = -std::numeric_limits<double>::infinity();
    for (double l : logits) max_logit = std::max(max_logit, l / t);
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        lp[i] = logits[i] / t - max_logit;
        sum += std::exp(lp[i]);
    }
    const double log_z = std::log(sum);
    for (double& v : lp) v -= log_z;
    return lp;
}

double ToyPolicy::entropy() const {
    double h = 0.0;
    for (double lp : log_probs()) {
        const double p = std::exp(lp);
        if (p > 0.0) h -= p * lp;
    }
    return h;
}

double sigmoid(double x) {
    // The positive branch is 1 minus the negative one so that
    // sigmoid(x) + sigmoid(-x) sums to exactly 1.0.
    const double e = std::exp(-std::abs(x));
    const double smaller = e / (1.0 + e);
    return x < 0.0 ? smaller : 1.0 - smaller;
}

double softplus(double x) {
    // ln(1 + e^x) = max(x, 0) + ln(1 + e^-|x|)
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double implicit_reward(const LogProbPair& lp, double beta) {
    if (beta <= 0.0) {
        throw ConfigError("implicit_reward requires beta > 0");
    }
    return beta * (lp.logp_theta - lp.logp_ref);
}

double reward_advantage(double reward_winner, double reward_loser) {
    return reward_winner - reward_loser;
}

double dpo_loss(double advantage) { return softplus(-advantage); }

double dpo_gradient_weight(double reward_winner, double reward_loser) {
    return sigmoid(reward_loser - reward_winner);
}

double reward_model_loss(const std::vector<double>& rewards,
                         std::size_t chosen_idx) {
    if (rewards.size() < 2) {
        throw InputError("reward_model_loss requires at least 2 rewards");
    }
    if (chosen_idx >= rewards.size()) {
        throw InputError("reward_model_loss chosen_idx out of range");
    }
    const double max_r = *std::max_element(rewards.begin(), rewards.end());
    double sum = 0.0;
    for (double r : rewards) sum += std::exp(r - max_r);
    return -(rewards[chosen_idx] - max_r - std::log(sum));
}

ToyPolicy toy_dpo_step(const ToyPolicy& policy, const ToyPolicy& reference,
                       std::size_t winner_idx, std::size_t loser_idx,
                       double beta, double learning_rate) {
    const std::size_t k = policy.logits.size();
    if (reference.logits.size() != k) {
        throw InputError("toy_dpo_step: policy and reference candidate sets "
                         "differ in size");
    }
    if (winner_idx >= k || loser_idx >= k) {
        throw InputError("toy_dpo_step: pair index out of range");
    }
    if (winner_idx == loser_idx) {
        throw InputError("toy_dpo_step: degenerate pair (winner == loser)");
    }

    const std::vector<double> lp = policy.log_probs();
    const std::vector<double> lp_ref = reference.log_probs();
    const double advantage =
        beta * (lp[winner_idx] - lp_ref[winner_idx]) -
        beta * (lp[loser_idx] - lp_ref[loser_idx]);

    // d loss / d logits_j of softplus(-A): the softmax probability terms of
    // winner and loser log-probs cancel, leaving only the direct terms.
    const double weight = sigmoid(-advantage);
    const double step = learning_rate * weight * beta / policy.temperature;

    ToyPolicy updated = policy;
    updated.logits[winner_idx] += step;
    updated.logits[loser_idx] -= step;
    return updated;
}

double CounterRng::uniform01(std::uint64_t stream,
                             std::uint64_t counter) const {
    const std::uint64_t h = mix64(seed ^ mix64(stream ^ mix64(counter)));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t stream, std::uint64_t counter) const {
    double u1 = uniform01(stream, 2 * counter);
    const double u2 = uniform01(stream, 2 * counter + 1);
    u1 = std::max(u1, 1e-300);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t hash_stream(const std::string& name) {
    std::uint64_t h = mix64(0x5851f42d4c957f2dULL);
    for (unsigned char c : name) h = mix64(h ^ c);
    return h;
}

double synth_judge(double quality, const SyntheticJudgeConfig& cfg,
                   std::uint64_t step, std::uint64_t stream) {
    if (quality < 0.0 || quality > 1.0) {
        throw InputError("synth_judge quality must lie in [0, 1]");
    }
    const CounterRng rng{cfg.seed};
    const double noise = cfg.noise_sd > 0.0
                             ? cfg.noise_sd * rng.normal(stream, step)
                             : 0.0;
    const double drift = cfg.drift_per_step * static_cast<double>(step);
    if (cfg.mode == SynthJudgeMode::discrete) {
        const double raw =
            cfg.scale.min + quality * cfg.scale.span() + noise + drift;
        // round half away from zero, then clamp to the scale
        const double rounded = std::round(raw);
        return std::clamp(rounded, static_cast<double>(cfg.scale.min),
                          static_cast<double>(cfg.scale.max));
    }
    return std::clamp(2.0 * quality - 1.0 + noise + drift, -1.0, 1.0);
}

void ExperimentConfig::validate() const {
    scale.validate();
    if (k_candidates < 2) throw ConfigError("experiment requires k >= 2");
    if (steps < 1) throw ConfigError("experiment requires steps >= 1");
    if (n_prompts < 1) throw ConfigError("experiment requires n_prompts >= 1");
    if (beta <= 0.0) throw ConfigError("experiment requires beta > 0");
    if (learning_rate < 0.0) {
        throw ConfigError("experiment requires learning_rate >= 0");
    }
    if (quality_sd < 0.0 || discrete_noise_sd < 0.0 ||
        continuous_noise_sd < 0.0) {
        throw ConfigError("experiment noise parameters must be nonnegative");
    }
}

namespace {

struct JudgedCandidate {
    double reward = 0.0;   // value used for ranking
    double display = 0.0;  // value on the display scale, for delta stats
};

}  // namespace

SignalReport run_signal_arm(const std::string& arm,
                            const ExperimentConfig& config) {
    config.validate();
    const bool is_random = arm == kArmRandom;
    const bool is_numerical = arm == kArmNumerical;
    const bool is_wim_fixed = arm == kArmWimFixed;
    const bool is_wim_moving = arm == kArmWimMoving;
    if (!is_random && !is_numerical && !is_wim_fixed && !is_wim_moving) {
        throw ConfigError("unknown experiment arm: " + arm);
    }

    const std::size_t n = config.n_prompts;
    const std::size_t k = config.k_candidates;
    const CounterRng rng{config.seed};

    // Latent candidate qualities, shared across arms for a given seed.
    std::vector<std::vector<double>> quality(n, std::vector<double>(k));
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t c = 0; c < k; ++c) {
            quality[p][c] = clamp01(config.quality_mean +
                                    config.quality_sd *
                                        rng.normal(1000 + p, c));
        }
    }

    SyntheticJudgeConfig judge;
    judge.scale = config.scale;
    judge.seed = config.seed;
    if (is_numerical) {
        judge.mode = SynthJudgeMode::discrete;
        judge.noise_sd = config.discrete_noise_sd;
    } else {
        judge.mode = SynthJudgeMode::continuous;
        judge.noise_sd = config.continuous_noise_sd;
        judge.drift_per_step =
            is_wim_moving ? config.moving_drift_per_step : 0.0;
    }
    const double tie_tolerance = is_numerical ? 0.0 : kContinuousTieTolerance;

    ToyPolicy init;
    init.logits.assign(k, 0.0);
    init.temperature = config.temperature;
    std::vector<ToyPolicy> policy(n, init);
    const ToyPolicy reference = init;

    const std::uint64_t arm_stream = hash_stream(arm);

    SignalReport report;
    report.method = arm;
    report.loss_trajectory.reserve(config.steps);
    report.advantage_trajectory.reserve(config.steps);
    report.entropy_trajectory.reserve(config.steps);
    std::vector<std::pair<double, double>> rating_pairs;
    rating_pairs.reserve(config.steps * n);

    for (std::size_t t = 0; t < config.steps; ++t) {
        double loss_sum = 0.0;
        double adv_sum = 0.0;
        double ent_sum = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            std::vector<JudgedCandidate> judged(k);
            for (std::size_t c = 0; c < k; ++c) {
                const std::uint64_t stream =
                    arm_stream ^ (7777 + p * 131 + c);
                JudgedCandidate jc;
                if (is_random) {
                    jc.reward = 2.0 * rng.uniform01(stream, t) - 1.0;
                    jc.display = display_scale(jc.reward, config.scale);
                } else if (is_numerical) {
                    const double rating =
                        synth_judge(quality[p][c], judge, t, stream);
                    jc.display = rating;
                    jc.reward = normalize_numeric(
                        static_cast<int>(rating), config.scale);
                } else {
                    jc.reward = synth_judge(quality[p][c], judge, t, stream);
                    jc.display = display_scale(jc.reward, config.scale);
                }
                judged[c] = jc;
            }

            // best-vs-worst pair, lowest index winning ties
            std::vector<std::size_t> order(k);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) {
                                 return judged[a].reward > judged[b].reward;
                             });
            const std::size_t w = order.front();
            const std::size_t l = order.back();
            rating_pairs.emplace_back(judged[w].display, judged[l].display);
            const bool tie =
                std::abs(judged[w].reward - judged[l].reward) <= tie_tolerance;

            const std::vector<double> lp = policy[p].log_probs();
            const std::vector<double> lp_ref = reference.log_probs();
            const double advantage = reward_advantage(
                implicit_reward({lp[w], lp_ref[w]}, config.beta),
                implicit_reward({lp[l], lp_ref[l]}, config.beta));
            loss_sum += dpo_loss(advantage);
            adv_sum += advantage;
            ent_sum += policy[p].entropy();

            // Tie pairs carry no learning signal and are not trained on.
            if (!tie && config.learning_rate > 0.0) {
                policy[p] = toy_dpo_step(policy[p], reference, w, l,
                                         config.beta, config.learning_rate);
            }
        }
        const double dn = static_cast<double>(n);
        report.loss_trajectory.push_back(loss_sum / dn);
        report.advantage_trajectory.push_back(adv_sum / dn);
        report.entropy_trajectory.push_back(ent_sum / dn);
    }

    report.delta_stats = pair_deltas(rating_pairs, tie_tolerance);
    return report;
}

std::vector<SignalReport> run_signal_experiment(const ExperimentConfig& cfg) {
    std::vector<SignalReport> reports;
    for (const char* arm :
         {kArmRandom, kArmNumerical, kArmWimFixed, kArmWimMoving}) {
        reports.push_back(run_signal_arm(arm, cfg));
    }
    return reports;
}

std::string signal_report_csv(const SignalReport& report) {
    std::ostringstream out;
    out << "step,loss,advantage,entropy\n";
    char buf[128];
    for (std::size_t t = 0; t < report.loss_trajectory.size(); ++t) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", t,
                      report.loss_trajectory[t],
                      report.advantage_trajectory[t],
                      report.entropy_trajectory[t]);
        out << buf;
    }
    return out.str();
}

}  // namespace wim
