#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wim/embedding.hpp"
#include "wim/judge.hpp"
#include "wim/rating_scale.hpp"

namespace wim {

/// How ranked candidates are turned into preference pairs.
enum class PairingPolicy { best_worst, adjacent, all_pairs };

std::string to_string(PairingPolicy policy);
PairingPolicy pairing_policy_from_string(const std::string& s);

/// A candidate response with its scores and provenance.
struct RatedCandidate {
    std::string candidate_id;
    std::string response_text;
    JudgeVerdict verdict;
    double wim_score = 1.0;          // in [-1, 1]; exactly 1 when no critique
    double normalized_rating = 0.0;  // (rating - rbar) / rbar
    double mixed_reward = 0.0;       // (1 - zeta) * R + zeta * WIM
    std::string embedder_kind;
    std::size_t embedder_dim = 0;
};

struct PreferencePair {
    std::string prompt_id;
    RatedCandidate winner;
    RatedCandidate loser;
    double reward_delta = 0.0;  // winner.mixed_reward - loser.mixed_reward
    bool tie = false;           // zero delta; emitted, never dropped
};

struct Ranking {
    std::vector<std::size_t> order;  // input indices, descending reward
    std::size_t best_idx = 0;        // lowest input index among the maxima
};

/// Cosine similarity between the response and critique embeddings; 1.0 when
/// the critique is absent or empty after trimming. Embedding failures are
/// rethrown with the response context attached.
double wim_score(const std::string& response_text,
                 const std::optional<std::string>& wim_text,
                 EmbeddingProvider& provider);

/// (rating - rbar) / rbar with rbar the scale midpoint. Throws OutOfScaleError.
double normalize_numeric(int rating, const RatingScale& scale);

/// Convex mix (1 - zeta) * normalized_rating + zeta * wim. Throws ConfigError
/// when zeta is outside [0, 1].
double mix_reward(double normalized_rating, double wim, double zeta);

/// Stable descending sort by mixed_reward; ties keep input order and
/// best_idx is the lowest input index among maximal rewards. Throws
/// InputError for fewer than 2 candidates.
Ranking rank_candidates(const std::vector<RatedCandidate>& candidates);

/// Pairs from a ranking per the policy. Zero-delta pairs are flagged tie.
std::vector<PreferencePair> to_preference_pairs(
    const std::vector<RatedCandidate>& candidates, const Ranking& ranking,
    const std::string& prompt_id,
    PairingPolicy policy = PairingPolicy::best_worst);

/// Affine map from [-1, 1] onto [scale.min, scale.max] for display.
double display_scale(double wim, const RatingScale& scale);

}  // namespace wim
