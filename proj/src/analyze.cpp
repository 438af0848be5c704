#include "wim/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace wim {

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins) {
    if (bins == 0 || !(lo < hi)) {
        throw InputError("uniform_edges requires lo < hi and bins >= 1");
    }
    std::vector<double> edges(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) {
        edges[i] = lo + (hi - lo) * static_cast<double>(i) /
                            static_cast<double>(bins);
    }
    edges.back() = hi;  // exact upper edge
    return edges;
}

std::vector<double> integer_edges(const RatingScale& scale) {
    scale.validate();
    std::vector<double> edges;
    for (int r = scale.min; r <= scale.max + 1; ++r) {
        edges.push_back(r - 0.5);
    }
    return edges;
}

Histogram rating_histogram(const std::vector<double>& values,
                           const std::vector<double>& edges) {
    if (values.empty()) {
        throw InputError("rating_histogram on empty input");
    }
    if (edges.size() < 2 ||
        !std::is_sorted(edges.begin(), edges.end(),
                        [](double a, double b) { return a <= b; })) {
        throw InputError("rating_histogram requires >= 2 strictly "
                         "increasing bin edges");
    }

    Histogram histogram;
    histogram.bin_edges = edges;
    histogram.counts.assign(edges.size() - 1, 0);
    for (double v : values) {
        if (v < edges.front() || v > edges.back()) {
            throw InputError("sample " + std::to_string(v) +
                             " outside bin range");
        }
        // Right-open bins; the last bin is right-closed.
        auto it = std::upper_bound(edges.begin(), edges.end(), v);
        std::size_t bin = static_cast<std::size_t>(it - edges.begin());
        bin = (bin == 0) ? 0 : bin - 1;
        if (bin >= histogram.counts.size()) bin = histogram.counts.size() - 1;
        ++histogram.counts[bin];
    }
    return histogram;
}

DeltaStats pair_deltas(const std::vector<std::pair<double, double>>& pairs,
                       double tie_tolerance) {
    if (pairs.empty()) {
        throw InputError("pair_deltas on empty input");
    }
    DeltaStats stats;
    stats.n_pairs = pairs.size();
    stats.deltas.reserve(pairs.size());
    std::size_t ties = 0;
    double sum = 0.0;
    for (const auto& [a, b] : pairs) {
        const double delta = std::abs(a - b);
        stats.deltas.push_back(delta);
        sum += delta;
        if (delta <= tie_tolerance) ++ties;
    }
    stats.tie_rate = static_cast<double>(ties) /
                     static_cast<double>(stats.n_pairs);
    stats.average_delta = sum / static_cast<double>(stats.n_pairs);
    return stats;
}

double mean_entropy(const std::vector<std::vector<double>>& distributions) {
    if (distributions.empty()) {
        throw InputError("mean_entropy on empty input");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < distributions.size(); ++i) {
        const auto& p = distributions[i];
        double sum = 0.0;
        double entropy = 0.0;
        for (double pi : p) {
            if (pi < 0.0 || !std::isfinite(pi)) {
                throw InputError("distribution " + std::to_string(i) +
                                 " has a negative or non-finite probability");
            }
            sum += pi;
            if (pi > 0.0) entropy -= pi * std::log(pi);
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw InputError("distribution " + std::to_string(i) +
                             " sums to " + std::to_string(sum) + ", not 1");
        }
        total += entropy;
    }
    return total / static_cast<double>(distributions.size());
}

std::string emit_histogram_csv(const Histogram& histogram,
                               const std::vector<std::string>& labels) {
    if (labels.size() != histogram.counts.size()) {
        throw InputError("histogram has " +
                         std::to_string(histogram.counts.size()) +
                         " bins but " + std::to_string(labels.size()) +
                         " labels");
    }
    std::ostringstream out;
    out << "bin,count\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out << labels[i] << ',' << histogram.counts[i] << '\n';
    }
    return out.str();
}

std::vector<std::string> integer_labels(const RatingScale& scale) {
    std::vector<std::string> labels;
    for (int r = scale.min; r <= scale.max; ++r) {
        labels.push_back(std::to_string(r));
    }
    return labels;
}

std::vector<std::string> midpoint_labels(const std::vector<double>& edges) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f",
                      (edges[i] + edges[i + 1]) / 2.0);
        labels.emplace_back(buf);
    }
    return labels;
}

}  // namespace wim
