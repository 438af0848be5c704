#pragma once

#include "wim/errors.hpp"

namespace wim {

/// Bounded integer rating scale. Defaults to 1-10.
struct RatingScale {
    int min = 1;
    int max = 10;

    void validate() const {
        if (min >= max) {
            throw ConfigError("rating scale requires min < max");
        }
    }

    bool contains(int rating) const { return rating >= min && rating <= max; }

    // Scale midpoint r-bar = (max + min) / 2.
    double midpoint() const { return (static_cast<double>(max) + min) / 2.0; }

    int span() const { return max - min; }
};

}  // namespace wim
