#include "wim/scoring.hpp"

#include <algorithm>
#include <numeric>

namespace wim {

std::string to_string(PairingPolicy policy) {
    switch (policy) {
        case PairingPolicy::best_worst: return "best-worst";
        case PairingPolicy::adjacent: return "adjacent";
        case PairingPolicy::all_pairs: return "all-pairs";
    }
    return "best-worst";
}

PairingPolicy pairing_policy_from_string(const std::string& s) {
    if (s == "best-worst") return PairingPolicy::best_worst;
    if (s == "adjacent") return PairingPolicy::adjacent;
    if (s == "all-pairs") return PairingPolicy::all_pairs;
    throw ConfigError("unknown pairing policy: " + s);
}

double wim_score(const std::string& response_text,
                 const std::optional<std::string>& wim_text,
                 EmbeddingProvider& provider) {
    if (response_text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw InputError("wim_score on empty response text");
    }
    if (!wim_text ||
        wim_text->find_first_not_of(" \t\r\n") == std::string::npos) {
        return 1.0;  // nothing missing
    }
    try {
        const EmbeddingVector response = provider.embed(response_text);
        const EmbeddingVector critique = provider.embed(*wim_text);
        return cosine_similarity(response, critique);
    } catch (const Error& e) {
        throw TransportError("wim_score failed for response \"" +
                             response_text.substr(0, 40) + "...\": " +
                             e.what());
    }
}

double normalize_numeric(int rating, const RatingScale& scale) {
    scale.validate();
    if (!scale.contains(rating)) {
        throw OutOfScaleError("rating " + std::to_string(rating) +
                                  " outside scale [" +
                                  std::to_string(scale.min) + ", " +
                                  std::to_string(scale.max) + "]",
                              rating);
    }
    const double rbar = scale.midpoint();
    return (rating - rbar) / rbar;
}

double mix_reward(double normalized_rating, double wim, double zeta) {
    if (zeta < 0.0 || zeta > 1.0) {
        throw ConfigError("zeta must lie in [0, 1]");
    }
    return (1.0 - zeta) * normalized_rating + zeta * wim;
}

Ranking rank_candidates(const std::vector<RatedCandidate>& candidates) {
    if (candidates.size() < 2) {
        throw InputError("rank_candidates requires at least 2 candidates");
    }
    Ranking ranking;
    ranking.order.resize(candidates.size());
    std::iota(ranking.order.begin(), ranking.order.end(), 0);
    std::stable_sort(ranking.order.begin(), ranking.order.end(),
                     [&](std::size_t a, std::size_t b) {
                         return candidates[a].mixed_reward >
                                candidates[b].mixed_reward;
                     });
    // Stable sort puts the lowest input index first among equal rewards.
    ranking.best_idx = ranking.order.front();
    return ranking;
}

std::vector<PreferencePair> to_preference_pairs(
    const std::vector<RatedCandidate>& candidates, const Ranking& ranking,
    const std::string& prompt_id, PairingPolicy policy) {
    if (ranking.order.empty()) {
        throw InputError("to_preference_pairs on empty ranking");
    }
    auto make_pair = [&](std::size_t win, std::size_t lose) {
        PreferencePair pair;
        pair.prompt_id = prompt_id;
        pair.winner = candidates[win];
        pair.loser = candidates[lose];
        pair.reward_delta =
            pair.winner.mixed_reward - pair.loser.mixed_reward;
        pair.tie = pair.reward_delta == 0.0;
        return pair;
    };

    std::vector<PreferencePair> pairs;
    const auto& order = ranking.order;
    switch (policy) {
        case PairingPolicy::best_worst:
            pairs.push_back(make_pair(order.front(), order.back()));
            break;
        case PairingPolicy::adjacent:
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                pairs.push_back(make_pair(order[i], order[i + 1]));
            }
            break;
        case PairingPolicy::all_pairs:
            for (std::size_t i = 0; i < order.size(); ++i) {
                for (std::size_t j = i + 1; j < order.size(); ++j) {
                    pairs.push_back(make_pair(order[i], order[j]));
                }
            }
            break;
    }
    return pairs;
}

double display_scale(double wim, const RatingScale& scale) {
    return scale.min + (wim + 1.0) / 2.0 * scale.span();
}

}  // namespace wim
