#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wim/errors.hpp"
#include "wim/rating_scale.hpp"

namespace wim {

/// Binned counts. Bins are right-open; the last bin also includes its right
/// edge so edge-max samples are not lost.
struct Histogram {
    std::vector<double> bin_edges;       // strictly increasing, bins + 1 edges
    std::vector<std::size_t> counts;     // one per bin
};

/// Pairwise rating separation statistics.
struct DeltaStats {
    std::size_t n_pairs = 0;
    double tie_rate = 0.0;
    double average_delta = 0.0;
    std::vector<double> deltas;          // |a - b| per pair
};

// Tie tolerance for continuous scores; integer ratings use exact equality.
constexpr double kContinuousTieTolerance = 1e-12;

// Bin count for WIM display-scale histograms.
constexpr std::size_t kDefaultWimBins = 28;

/// Evenly spaced edges: bins bins covering [lo, hi].
std::vector<double> uniform_edges(double lo, double hi, std::size_t bins);

/// One unit-wide bin per integer rating, centered on each value.
std::vector<double> integer_edges(const RatingScale& scale);

/// Counts values into the given bins. Samples outside the edge range are an
/// InputError, as is an empty value list.
Histogram rating_histogram(const std::vector<double>& values,
                           const std::vector<double>& edges);

/// |a - b| per pair plus tie rate and mean delta. A delta at or below
/// tie_tolerance counts as a tie.
DeltaStats pair_deltas(const std::vector<std::pair<double, double>>& pairs,
                       double tie_tolerance = 0.0);

/// Mean Shannon entropy (natural log) over probability vectors. Each vector
/// must be nonnegative and sum to 1 within 1e-9.
double mean_entropy(const std::vector<std::vector<double>>& distributions);

/// `bin,count` header then one row per bin. Byte-deterministic.
std::string emit_histogram_csv(const Histogram& histogram,
                               const std::vector<std::string>& labels);

/// Labels for integer_edges bins ("1", "2", ...).
std::vector<std::string> integer_labels(const RatingScale& scale);

/// Labels for uniform_edges bins: the bin midpoint, fixed formatting.
std::vector<std::string> midpoint_labels(const std::vector<double>& edges);

}  // namespace wim
