// Acceptance harness: one pass/fail line per criterion, nonzero exit when
// any criterion fails. Criterion 10 needs a live embedding endpoint and is
// skipped unless WIM_EMBED_ENDPOINT (host:port) is set.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wim/dpomath.hpp"
#include "wim/embedding.hpp"
#include "wim/judge.hpp"
#include "wim/pipeline.hpp"
#include "wim/scoring.hpp"

using namespace wim;

namespace {

int failures = 0;

void report(int criterion, const std::string& label, bool ok) {
    std::cout << "criterion " << criterion << ": "
              << (ok ? "PASS" : "FAIL") << " - " << label << std::endl;
    if (!ok) ++failures;
}

void report_skip(int criterion, const std::string& label,
                 const std::string& reason) {
    std::cout << "criterion " << criterion << ": SKIP - " << label << " ("
              << reason << ")" << std::endl;
}

template <typename Fn>
void criterion(int number, const std::string& label, Fn&& fn) {
    bool ok = false;
    try {
        ok = fn();
    } catch (const std::exception& e) {
        std::cout << "criterion " << number << ": exception: " << e.what()
                  << std::endl;
        ok = false;
    }
    report(number, label, ok);
}

EmbeddingVector random_vector(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    EmbeddingVector vec;
    vec.values.resize(dim);
    for (double& v : vec.values) v = gauss(rng);
    return vec;
}

bool geometry_suite() {
    std::mt19937_64 rng(11);
    for (std::size_t dim : {2u, 8u, 64u, 768u}) {
        for (int trial = 0; trial < 1000; ++trial) {
            EmbeddingVector s1 = random_vector(rng, dim);
            EmbeddingVector s2 = random_vector(rng, dim);
            if (s1.norm() == 0.0 || s2.norm() == 0.0) continue;
            const double cos = cosine_similarity(s1, s2);
            if (cos < -1.0 || cos > 1.0) return false;

            const Decomposition d = decompose(s1, s2);
            const double par = d.parallel.norm();
            const double orth = d.orthogonal.norm();
            if (std::abs(par * par + orth * orth -
                         s2.norm() * s2.norm()) > 1e-9) {
                return false;
            }
            if (std::abs(missingness_magnitude(s2.norm(), cos) - orth) >
                1e-9) {
                return false;
            }
        }
    }
    return true;
}

bool projection_fixture() {
    const Decomposition d =
        decompose(EmbeddingVector{{1.0, 0.5}}, EmbeddingVector{{0.3, 1.0}});
    return std::abs(d.parallel[0] - 0.64) <= 1e-12 &&
           std::abs(d.parallel[1] - 0.32) <= 1e-12;
}

bool parser_suite() {
    const RatingScale scale{1, 10};
    const std::vector<std::pair<std::string, int>> fixtures = {
        {"Rating: [[7]]\nWIM: [[[The response could provide more information "
         "on the exact mechanisms of the sea snake's ability to withstand "
         "fire, such as the composition of its skin secretions.]]]",
         7},
        {"Rating: [[6]]\nWIM: [[[The response only mentions the species "
         "name, but does not provide any additional information about the "
         "sea snake's ability to stay in fire.]]]",
         6},
        {"Rating: [[8]]\nWIM: [[[The response does not discuss the role of "
         "plants in maintaining soil health, preventing erosion, or "
         "mitigating the effects of natural disasters.]]]",
         8},
        {"Rating: [[8]]\nWIM: [[[The response does not discuss the role of "
         "plants in regulating the Earth's climate, such as their ability "
         "to absorb and store carbon dioxide.]]]",
         8},
        {"Rating: [[8]]\nWIM: [[[The response does not provide a detailed "
         "explanation of the crew's current status, including their "
         "physical and mental condition after stasis.]]]",
         8},
        {"Rating: [[7]]\nWIM: [[[wim]]]", 7},
    };
    for (const auto& [raw, rating] : fixtures) {
        const JudgeVerdict v = parse_verdict(raw, scale);
        if (v.rating != rating || !v.wim_text.has_value()) return false;
    }
    const JudgeVerdict nothing =
        parse_verdict("Rating: [[9]]\nWIM: [[[]]]", scale);
    if (nothing.wim_text.has_value()) return false;
    const JudgeVerdict literal =
        parse_verdict("Rating: [[7]]\nWIM: [[[wim]]]", scale);
    return literal.wim_text.has_value() && *literal.wim_text == "wim";
}

bool mixing_suite() {
    const RatingScale scale{1, 10};
    if (std::abs(normalize_numeric(10, scale) - 9.0 / 11.0) > 1e-12) {
        return false;
    }
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> score(-1.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const double rating = score(rng);
        const double wim = score(rng);
        // endpoints select exactly one component
        if (mix_reward(rating, wim, 0.0) != rating) return false;
        if (mix_reward(rating, wim, 1.0) != wim) return false;
        // monotone in both components for any interior weight
        const double zeta = unit(rng);
        const double bump = unit(rng);
        if (mix_reward(rating + bump, wim, zeta) <
            mix_reward(rating, wim, zeta)) {
            return false;
        }
        if (mix_reward(rating, wim + bump, zeta) <
            mix_reward(rating, wim, zeta)) {
            return false;
        }
    }
    return true;
}

bool dpo_math_suite() {
    if (std::abs(dpo_loss(0.0) - std::log(2.0)) > 1e-12) return false;

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> reward(-5.0, 5.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const double rw = reward(rng);
        const double rl = reward(rng);
        if (dpo_gradient_weight(rw, rl) + dpo_gradient_weight(rl, rw) !=
            1.0) {
            return false;
        }
    }

    std::uniform_real_distribution<double> logit(-2.0, 2.0);
    std::uniform_real_distribution<double> temp(0.5, 2.0);
    std::uniform_real_distribution<double> beta_dist(0.05, 0.5);
    const double eps = 1e-6;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 2 + rng() % 5;
        ToyPolicy policy;
        ToyPolicy reference;
        policy.temperature = temp(rng);
        reference.temperature = policy.temperature;
        policy.logits.resize(k);
        reference.logits.resize(k);
        for (std::size_t i = 0; i < k; ++i) {
            policy.logits[i] = logit(rng);
            reference.logits[i] = logit(rng);
        }
        const std::size_t w = rng() % k;
        std::size_t l = rng() % k;
        if (l == w) l = (w + 1) % k;
        const double beta = beta_dist(rng);

        const ToyPolicy stepped =
            toy_dpo_step(policy, reference, w, l, beta, 1.0);
        auto loss_at = [&](const ToyPolicy& p) {
            const auto lp = p.log_probs();
            const auto lr = reference.log_probs();
            return dpo_loss(beta * (lp[w] - lr[w]) - beta * (lp[l] - lr[l]));
        };
        for (std::size_t j = 0; j < k; ++j) {
            const double analytic = policy.logits[j] - stepped.logits[j];
            ToyPolicy plus = policy;
            ToyPolicy minus = policy;
            plus.logits[j] += eps;
            minus.logits[j] -= eps;
            const double numeric =
                (loss_at(plus) - loss_at(minus)) / (2.0 * eps);
            // absolute term absorbs finite-difference roundoff on
            // exactly-zero components
            const double bound =
                1e-5 * std::max(std::abs(numeric), std::abs(analytic)) + 1e-9;
            if (std::abs(numeric - analytic) > bound) return false;
        }
    }
    return true;
}

bool reward_model_suite() {
    if (reward_model_loss({0.37, 0.37}, 1) != std::log(2.0)) return false;
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> reward(-3.0, 3.0);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> rewards(2 + rng() % 5);
        for (double& r : rewards) r = reward(rng);
        const std::size_t chosen = rng() % rewards.size();
        const double base = reward_model_loss(rewards, chosen);
        const double shift = reward(rng) * 20.0;
        for (double& r : rewards) r += shift;
        if (std::abs(reward_model_loss(rewards, chosen) - base) > 1e-12) {
            return false;
        }
    }
    return true;
}

bool signal_direction_suite() {
    ExperimentConfig config;  // 20 prompts x 500 steps = 10,000 pairs
    const SignalReport discrete = run_signal_arm(kArmNumerical, config);
    const SignalReport continuous = run_signal_arm(kArmWimFixed, config);
    std::cout << "  discrete tie rate "
              << discrete.delta_stats.tie_rate << ", continuous tie rate "
              << continuous.delta_stats.tie_rate << ", discrete avg delta "
              << discrete.delta_stats.average_delta
              << ", continuous avg delta "
              << continuous.delta_stats.average_delta << std::endl;
    if (discrete.delta_stats.tie_rate <
        10.0 * continuous.delta_stats.tie_rate) {
        return false;
    }
    return continuous.delta_stats.average_delta >
           discrete.delta_stats.average_delta;
}

bool training_direction_suite() {
    ExperimentConfig config;  // 500 steps, 4 candidates
    const auto reports = run_signal_experiment(config);
    const SignalReport& random = reports[0];
    const SignalReport& numerical = reports[1];
    const SignalReport& wim_fixed = reports[2];

    auto decrease = [](const SignalReport& r) {
        return r.loss_trajectory.front() - r.loss_trajectory.back();
    };
    std::cout << "  loss decrease: random " << decrease(random)
              << ", numerical " << decrease(numerical) << ", wim-fixed "
              << decrease(wim_fixed) << std::endl;
    if (decrease(wim_fixed) < decrease(numerical)) return false;
    if (decrease(wim_fixed) < decrease(random)) return false;
    if (numerical.advantage_trajectory.back() <= 0.0) return false;
    if (wim_fixed.advantage_trajectory.back() <= 0.0) return false;

    const auto rerun = run_signal_experiment(config);
    for (std::size_t i = 0; i < reports.size(); ++i) {
        if (signal_report_csv(reports[i]) != signal_report_csv(rerun[i])) {
            return false;
        }
    }
    return true;
}

bool audit_integrity_suite() {
    std::vector<PromptRecord> records;
    Transcript transcript;
    for (int p = 0; p < 100; ++p) {
        const std::string pid = "p" + std::to_string(p);
        PromptRecord record;
        record.prompt_id = pid;
        record.prompt = "Describe photosynthesis, variant " +
                        std::to_string(p);
        record.candidates = {
            {"a", "plants turn light water and carbon dioxide into sugar "
                  "and oxygen inside chloroplasts " + pid},
            {"b", "plants make food from sunlight " + pid},
            {"c", "it is a chemical process in leaves " + pid},
        };
        records.push_back(record);
        if (p % 10 == 0) {
            // forced tie: equal ratings and no critique leave every
            // candidate with an identical mixed reward
            for (const char* cid : {"a", "b", "c"}) {
                transcript[pid + "." + cid] = "Rating: [[7]]\nWIM: [[[]]]";
            }
        } else {
            transcript[pid + ".a"] = "Rating: [[8]]\nWIM: [[[]]]";
            transcript[pid + ".b"] =
                "Rating: [[6]]\nWIM: [[[never names the inputs or the "
                "products of the reaction]]]";
            transcript[pid + ".c"] =
                "Rating: [[4]]\nWIM: [[[no mention of light, chlorophyll, "
                "carbon dioxide, water, sugar, or oxygen]]]";
        }
    }

    RatingRunConfig config;
    config.zeta = 0.5;
    config.timestamp = "2026-08-26T00:00:00Z";
    config.retry_backoff_seconds = 0.0;
    HashingEmbeddingProvider embedder;

    RatingRunResult result;
    {
        ScriptedJudgeProvider judge(transcript);
        run_rating(config, records, judge, embedder, result);
    }
    if (result.pairs.size() != 100) return false;

    for (const auto& audit : result.audits) {
        if (recompute_mixed_reward(audit) != audit.mixed_reward) return false;
    }
    std::size_t ties = 0;
    for (const auto& pair : result.pairs) {
        if (pair.tie) ++ties;
    }
    if (ties != 10) return false;  // flagged and emitted, not dropped

    RatingRunResult rerun;
    {
        ScriptedJudgeProvider judge(transcript);
        run_rating(config, records, judge, embedder, rerun);
    }
    for (std::size_t i = 0; i < result.audits.size(); ++i) {
        if (result.audits[i].to_json_line() != rerun.audits[i].to_json_line())
            return false;
    }
    for (std::size_t i = 0; i < result.pairs.size(); ++i) {
        if (pair_to_json_line(result.pairs[i]) !=
            pair_to_json_line(rerun.pairs[i]))
            return false;
    }
    return true;
}

bool golden_fixture_suite(const std::string& endpoint) {
    RemoteEmbedderConfig config;
    const auto colon = endpoint.find(':');
    config.host = endpoint.substr(0, colon);
    if (colon != std::string::npos) {
        const auto slash = endpoint.find('/', colon);
        config.port = std::stoi(endpoint.substr(colon + 1, slash - colon - 1));
        if (slash != std::string::npos) config.path = endpoint.substr(slash);
    }
    if (const char* dim = std::getenv("WIM_EMBED_DIM")) {
        config.dim = std::stoul(dim);
    }
    RemoteEmbeddingProvider provider(config);
    const RatingScale scale{1, 10};

    auto display = [&](const std::string& response,
                       const std::string& critique) {
        return display_scale(
            wim_score(response, std::optional<std::string>(critique),
                      provider),
            scale);
    };

    const double same_1 = display(
        "The Yellow-Bellied Sea Snake (Pelamis platura) is known to be able "
        "to withstand brief periods of exposure to fire due to its "
        "specialized nervous system and skin secretions.",
        "The response could provide more information on the exact "
        "mechanisms of the sea snake's ability to withstand fire, such as "
        "the composition of its skin secretions or the specific adaptations "
        "that allow it to tolerate high temperatures.");
    const double same_2 = display(
        "Echiopsis curta",
        "The response only mentions the species name, but does not provide "
        "any additional information about the sea snake's ability to stay "
        "in fire, such as its adaptations or any scientific studies that "
        "support this claim.");

    const double diff_1 = display(
        "Plants are important for the environment because they provide "
        "oxygen through photosynthesis, absorb carbon dioxide, purify water "
        "and soil, support biodiversity, regulate the climate, and provide "
        "food, shelter, and habitat for animals.",
        "The response does not discuss the role of plants in maintaining "
        "soil health, preventing erosion, or mitigating the effects of "
        "natural disasters such as floods and droughts.");
    const double diff_2 = display(
        "Plants are vital for the environment because they produce oxygen, "
        "absorb carbon dioxide, and filter pollutants from the air. They "
        "also play a crucial role in maintaining soil quality, preventing "
        "erosion, and supporting biodiversity. Plants provide habitat and "
        "food for countless animal species, and their roots help to hold "
        "soil in place, preventing landslides and sedimentation in "
        "waterways. Additionally, plants have a significant impact on the "
        "water cycle, regulating evaporation and precipitation patterns, "
        "and helping to maintain ecosystem balance.",
        "The response does not discuss the role of plants in regulating the "
        "Earth's climate, such as their ability to absorb and store carbon "
        "dioxide, or the impact of plant loss on ecosystem resilience and "
        "climate change mitigation.");

    std::cout << "  same-rating pair scored " << same_1 << " / " << same_2
              << "; different-rating pair scored " << diff_1 << " / "
              << diff_2 << std::endl;
    if (std::abs(same_1 - 8.78) > 0.05) return false;
    if (std::abs(same_2 - 5.68) > 0.05) return false;
    return diff_2 > diff_1;
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();

    criterion(1, "geometry identities over randomized vectors",
              geometry_suite);
    criterion(2, "two-dimensional projection fixture", projection_fixture);
    criterion(3, "judge output parser fixture suite", parser_suite);
    criterion(4, "rating normalization and reward mixing", mixing_suite);
    criterion(5, "pairwise loss math and exact toy gradient", dpo_math_suite);
    criterion(6, "reward-model loss identities", reward_model_suite);
    criterion(7, "discrete vs continuous judge signal direction",
              signal_direction_suite);
    criterion(8, "toy training direction and reproducibility",
              training_direction_suite);
    criterion(9, "pipeline audit integrity over a 100-record run",
              audit_integrity_suite);

    const char* endpoint = std::getenv("WIM_EMBED_ENDPOINT");
    if (endpoint != nullptr && *endpoint != '\0') {
        criterion(10, "golden remote-embedding fixtures",
                  [&] { return golden_fixture_suite(endpoint); });
    } else {
        report_skip(10, "golden remote-embedding fixtures",
                    "set WIM_EMBED_ENDPOINT=host:port to enable");
    }

    const auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    std::cout << (failures == 0 ? "all criteria passed"
                                : "criteria failed: " +
                                      std::to_string(failures))
              << " (" << elapsed << "s)" << std::endl;
    return failures == 0 ? 0 : 1;
}
