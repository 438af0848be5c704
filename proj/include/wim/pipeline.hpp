#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wim/analyze.hpp"
#include "wim/dpomath.hpp"
#include "wim/embedding.hpp"
#include "wim/judge.hpp"
#include "wim/scoring.hpp"

namespace wim {

struct PromptCandidate {
    std::string candidate_id;
    std::string text;
};

/// One dataset element: a prompt with >= 2 candidate responses.
struct PromptRecord {
    std::string prompt_id;
    std::string prompt;
    std::vector<PromptCandidate> candidates;
};

/// Parses one JSONL dataset line. Line numbers go into error messages.
PromptRecord parse_prompt_record(const std::string& line, std::size_t lineno);

/// Loads a JSONL dataset, order-preserving. Throws DataError with the line
/// number on malformed records and on empty files.
std::vector<PromptRecord> ingest(const std::string& path);

/// Provenance for one scored candidate. Stored components are sufficient to
/// recompute mixed_reward bit-for-bit.
struct AuditRecord {
    std::string prompt_id;
    std::string candidate_id;
    std::string raw_judge_output;
    int rating = 0;
    std::optional<std::string> wim_text;
    double wim_score = 1.0;
    double normalized_rating = 0.0;
    double mixed_reward = 0.0;
    double zeta = 0.0;
    RatingScale scale;
    std::string embedder_kind;
    std::size_t embedder_dim = 0;
    std::string judge_kind;
    std::string judge_role;
    std::string timestamp;
    std::vector<std::string> anomalies;  // sorted; see docs/interfaces.md

    std::string to_json_line() const;
    static AuditRecord from_json_line(const std::string& line,
                                      std::size_t lineno);
};

/// (1 - zeta) * normalized_rating + zeta * wim_score from the stored fields.
double recompute_mixed_reward(const AuditRecord& audit);

struct RatingRunConfig {
    double zeta = 1.0;
    RatingScale scale;
    PairingPolicy pairing = PairingPolicy::best_worst;
    std::uint64_t seed = 0;
    int concurrency = 8;
    int retry_budget = 3;
    double retry_backoff_seconds = 1.0;  // doubled per attempt
    // Filled with the current UTC time when empty. Pin it for reproducible
    // output bytes.
    std::string timestamp;

    void validate() const;
};

std::string pair_to_json_line(const PreferencePair& pair);

struct RatingRunResult {
    std::vector<PreferencePair> pairs;
    std::vector<AuditRecord> audits;
    std::vector<std::string> skipped_prompt_ids;
    std::vector<std::string> processed_prompt_ids;  // input order
};

/// Executes the rating loop per record: judge, parse, embed, score, mix,
/// rank, pair. Candidate-level judge or parse failures skip the record with
/// an audit anomaly. Provider transport failures beyond the retry budget
/// throw TransportError; result then holds the completed prefix so the
/// caller can flush partial outputs and the resumption cursor. Records
/// whose prompt_id is in already_done are not re-emitted (crash resume).
void run_rating(const RatingRunConfig& config,
                const std::vector<PromptRecord>& records,
                JudgeProvider& judge, EmbeddingProvider& embedder,
                RatingRunResult& result,
                const std::set<std::string>& already_done = {});

/// Writes pairs/audits as JSONL plus the resumption cursor (one prompt_id
/// per line). Appends when resuming.
void write_rating_outputs(const RatingRunResult& result,
                          const std::string& out_dir, bool append);

std::set<std::string> load_cursor(const std::string& out_dir);

/// Aggregated statistics over an audit stream, shaped like the plotting
/// data: rating and WIM histograms plus pairwise delta stats.
struct StatsBundle {
    Histogram hist_ratings;
    Histogram hist_wim;           // display scale, kDefaultWimBins bins
    Histogram hist_rating_delta;
    Histogram hist_response_delta;
    DeltaStats rating_deltas;
    DeltaStats wim_deltas;        // display scale
    RatingScale scale;
};

/// Pairwise deltas use all candidate pairs within each prompt. Throws
/// DataError on an empty audit set.
StatsBundle run_stats(const std::vector<AuditRecord>& audits,
                      std::size_t wim_bins = kDefaultWimBins);

std::vector<AuditRecord> load_audits(const std::string& path);

/// Writes hist_ratings.csv, hist_WIM.csv, hist_rating_delta.csv,
/// hist_response_delta.csv, and summary.json under out_dir.
void write_stats_outputs(const StatsBundle& stats,
                         const std::string& out_dir);

/// Flat key=value experiment config file; '#' starts a comment line.
ExperimentConfig load_experiment_config(const std::string& path);

/// Runs all four arms and writes report_<arm>.csv plus summary.json.
std::vector<SignalReport> run_experiment(const ExperimentConfig& config,
                                         const std::string& out_dir);

}  // namespace wim
