#include "wim/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace wim {

namespace fs = std::filesystem;
using nlohmann::json;

PromptRecord parse_prompt_record(const std::string& line, std::size_t lineno) {
    const std::string where = "line " + std::to_string(lineno);
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::exception& e) {
        throw DataError(where + ": invalid JSON: " + e.what());
    }
    PromptRecord record;
    try {
        record.prompt_id = obj.at("prompt_id").get<std::string>();
        record.prompt = obj.at("prompt").get<std::string>();
        for (const auto& c : obj.at("candidates")) {
            PromptCandidate candidate;
            candidate.candidate_id = c.at("candidate_id").get<std::string>();
            candidate.text = c.at("text").get<std::string>();
            record.candidates.push_back(std::move(candidate));
        }
    } catch (const json::exception& e) {
        throw DataError(where + ": missing or mistyped field: " + e.what());
    }
    if (record.prompt_id.empty()) {
        throw DataError(where + ": empty prompt_id");
    }
    if (record.candidates.size() < 2) {
        throw DataError(where + ": record needs at least 2 candidates, has " +
                        std::to_string(record.candidates.size()));
    }
    std::set<std::string> seen;
    for (const auto& c : record.candidates) {
        if (c.text.find_first_not_of(" \t\r\n") == std::string::npos) {
            throw DataError(where + ": empty candidate text for \"" +
                            c.candidate_id + "\"");
        }
        if (!seen.insert(c.candidate_id).second) {
            throw DataError(where + ": duplicate candidate_id \"" +
                            c.candidate_id + "\"");
        }
    }
    return record;
}

std::vector<PromptRecord> ingest(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open dataset: " + path);
    }
    std::vector<PromptRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        records.push_back(parse_prompt_record(line, lineno));
    }
    if (records.empty()) {
        throw DataError("dataset is empty: " + path);
    }
    return records;
}

std::string AuditRecord::to_json_line() const {
    json obj;
    obj["anomalies"] = anomalies;
    obj["candidate_id"] = candidate_id;
    obj["embedder_dim"] = embedder_dim;
    obj["embedder_kind"] = embedder_kind;
    obj["judge_kind"] = judge_kind;
    obj["judge_role"] = judge_role;
    obj["mixed_reward"] = mixed_reward;
    obj["normalized_rating"] = normalized_rating;
    obj["prompt_id"] = prompt_id;
    obj["rating"] = rating;
    obj["raw_judge_output"] = raw_judge_output;
    obj["scale_max"] = scale.max;
    obj["scale_min"] = scale.min;
    obj["timestamp"] = timestamp;
    if (wim_text) {
        obj["wim_text"] = *wim_text;
    } else {
        obj["wim_text"] = nullptr;
    }
    obj["wim_score"] = wim_score;
    obj["zeta"] = zeta;
    return obj.dump();
}

AuditRecord AuditRecord::from_json_line(const std::string& line,
                                        std::size_t lineno) {
    const std::string where = "audit line " + std::to_string(lineno);
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::exception& e) {
        throw DataError(where + ": invalid JSON: " + e.what());
    }
    AuditRecord audit;
    try {
        audit.anomalies = obj.at("anomalies").get<std::vector<std::string>>();
        audit.candidate_id = obj.at("candidate_id").get<std::string>();
        audit.embedder_dim = obj.at("embedder_dim").get<std::size_t>();
        audit.embedder_kind = obj.at("embedder_kind").get<std::string>();
        audit.judge_kind = obj.at("judge_kind").get<std::string>();
        audit.judge_role = obj.at("judge_role").get<std::string>();
        audit.mixed_reward = obj.at("mixed_reward").get<double>();
        audit.normalized_rating = obj.at("normalized_rating").get<double>();
        audit.prompt_id = obj.at("prompt_id").get<std::string>();
        audit.rating = obj.at("rating").get<int>();
        audit.raw_judge_output = obj.at("raw_judge_output").get<std::string>();
        audit.scale.max = obj.at("scale_max").get<int>();
        audit.scale.min = obj.at("scale_min").get<int>();
        audit.timestamp = obj.at("timestamp").get<std::string>();
        if (!obj.at("wim_text").is_null()) {
            audit.wim_text = obj.at("wim_text").get<std::string>();
        }
        audit.wim_score = obj.at("wim_score").get<double>();
        audit.zeta = obj.at("zeta").get<double>();
    } catch (const json::exception& e) {
        throw DataError(where + ": missing or mistyped field: " + e.what());
    }
    return audit;
}

double recompute_mixed_reward(const AuditRecord& audit) {
    return mix_reward(audit.normalized_rating, audit.wim_score, audit.zeta);
}

void RatingRunConfig::validate() const {
    scale.validate();
    if (zeta < 0.0 || zeta > 1.0) {
        throw ConfigError("zeta must lie in [0, 1]");
    }
    if (concurrency < 1) {
        throw ConfigError("concurrency must be >= 1");
    }
    if (retry_budget < 0) {
        throw ConfigError("retry budget must be >= 0");
    }
}

std::string pair_to_json_line(const PreferencePair& pair) {
    auto side = [](const RatedCandidate& c) {
        json obj;
        obj["candidate_id"] = c.candidate_id;
        obj["mixed_reward"] = c.mixed_reward;
        obj["rating"] = c.verdict.rating;
        obj["wim_score"] = c.wim_score;
        return obj;
    };
    json obj;
    obj["loser"] = side(pair.loser);
    obj["prompt_id"] = pair.prompt_id;
    obj["reward_delta"] = pair.reward_delta;
    obj["tie"] = pair.tie;
    obj["winner"] = side(pair.winner);
    return obj.dump();
}

namespace {

std::string utc_now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool is_blank(const std::string& s) {
    return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

// Retries the call on TransportError up to budget extra attempts with
// exponential backoff, then rethrows.
template <typename Fn>
auto with_retries(Fn&& fn, int budget, double backoff_seconds) {
    for (int attempt = 0;; ++attempt) {
        try {
            return fn();
        } catch (const TransportError&) {
            if (attempt >= budget) throw;
            if (backoff_seconds > 0.0) {
                const double delay =
                    backoff_seconds * static_cast<double>(1 << attempt);
                std::this_thread::sleep_for(
                    std::chrono::duration<double>(delay));
            }
        }
    }
}

struct RecordOutcome {
    std::string prompt_id;
    std::vector<PreferencePair> pairs;
    std::vector<AuditRecord> audits;
    bool skipped = false;
};

RecordOutcome process_record(const PromptRecord& record,
                             const RatingRunConfig& config,
                             JudgeProvider& judge,
                             EmbeddingProvider& embedder,
                             const std::string& timestamp) {
    RecordOutcome outcome;
    outcome.prompt_id = record.prompt_id;

    AuditRecord base;
    base.prompt_id = record.prompt_id;
    base.zeta = config.zeta;
    base.scale = config.scale;
    base.embedder_kind = embedder.kind();
    base.embedder_dim = embedder.dim();
    base.judge_kind = judge.kind();
    base.judge_role = to_string(judge.role());
    base.timestamp = timestamp;

    std::vector<RatedCandidate> rated;
    try {
        for (const auto& candidate : record.candidates) {
            const std::string key =
                record.prompt_id + "." + candidate.candidate_id;
            const std::string prompt = build_judge_prompt(
                record.prompt, candidate.text, config.scale);
            const std::string raw = with_retries(
                [&] { return judge.judge(key, prompt); },
                config.retry_budget, config.retry_backoff_seconds);
            const JudgeVerdict verdict = parse_verdict(raw, config.scale);

            RatedCandidate rc;
            rc.candidate_id = candidate.candidate_id;
            rc.response_text = candidate.text;
            rc.verdict = verdict;
            rc.wim_score = with_retries(
                [&] {
                    return wim_score(candidate.text, verdict.wim_text,
                                     embedder);
                },
                config.retry_budget, config.retry_backoff_seconds);
            rc.normalized_rating =
                normalize_numeric(verdict.rating, config.scale);
            rc.mixed_reward =
                mix_reward(rc.normalized_rating, rc.wim_score, config.zeta);
            rc.embedder_kind = base.embedder_kind;
            rc.embedder_dim = base.embedder_dim;
            rated.push_back(std::move(rc));
        }
    } catch (const TransportError&) {
        throw;  // outage: abort the run, not the record
    } catch (const Error& e) {
        outcome.skipped = true;
        AuditRecord audit = base;
        audit.anomalies.push_back(std::string("record-skipped: ") + e.what());
        outcome.audits.push_back(std::move(audit));
        return outcome;
    }

    const Ranking ranking = rank_candidates(rated);
    outcome.pairs = to_preference_pairs(rated, ranking, record.prompt_id,
                                        config.pairing);

    std::set<std::string> tie_ids;
    for (const auto& pair : outcome.pairs) {
        if (pair.tie) {
            tie_ids.insert(pair.winner.candidate_id);
            tie_ids.insert(pair.loser.candidate_id);
        }
    }

    for (const auto& rc : rated) {
        AuditRecord audit = base;
        audit.candidate_id = rc.candidate_id;
        audit.raw_judge_output = rc.verdict.raw;
        audit.rating = rc.verdict.rating;
        audit.wim_text = rc.verdict.wim_text;
        audit.wim_score = rc.wim_score;
        audit.normalized_rating = rc.normalized_rating;
        audit.mixed_reward = rc.mixed_reward;
        if (rc.verdict.multiple_rating_spans) {
            audit.anomalies.push_back("multiple-rating-spans");
        }
        // A one-word critique ("wim") is scored, not rejected, but flagged.
        if (rc.verdict.wim_text &&
            rc.verdict.wim_text->find_first_of(" \t\n") == std::string::npos) {
            audit.anomalies.push_back("degenerate-critique");
        }
        if (tie_ids.count(rc.candidate_id) > 0) {
            audit.anomalies.push_back("tie");
        }
        std::sort(audit.anomalies.begin(), audit.anomalies.end());
        outcome.audits.push_back(std::move(audit));
    }
    return outcome;
}

}  // namespace

void run_rating(const RatingRunConfig& config,
                const std::vector<PromptRecord>& records,
                JudgeProvider& judge, EmbeddingProvider& embedder,
                RatingRunResult& result,
                const std::set<std::string>& already_done) {
    config.validate();
    const std::string timestamp =
        config.timestamp.empty() ? utc_now_iso8601() : config.timestamp;

    std::vector<const PromptRecord*> todo;
    for (const auto& record : records) {
        if (already_done.count(record.prompt_id) == 0) {
            todo.push_back(&record);
        }
    }

    // Bounded window of async record tasks; results appended in input order.
    const std::size_t window =
        std::max<std::size_t>(1, static_cast<std::size_t>(config.concurrency));
    for (std::size_t base_idx = 0; base_idx < todo.size();
         base_idx += window) {
        const std::size_t end = std::min(todo.size(), base_idx + window);
        std::vector<std::future<RecordOutcome>> batch;
        for (std::size_t i = base_idx; i < end; ++i) {
            batch.push_back(std::async(
                std::launch::async, [&, i] {
                    return process_record(*todo[i], config, judge, embedder,
                                          timestamp);
                }));
        }
        for (auto& future : batch) {
            RecordOutcome outcome = future.get();
            result.processed_prompt_ids.push_back(outcome.prompt_id);
            if (outcome.skipped) {
                result.skipped_prompt_ids.push_back(outcome.prompt_id);
            }
            for (auto& pair : outcome.pairs) {
                result.pairs.push_back(std::move(pair));
            }
            for (auto& audit : outcome.audits) {
                result.audits.push_back(std::move(audit));
            }
        }
    }
}

void write_rating_outputs(const RatingRunResult& result,
                          const std::string& out_dir, bool append) {
    fs::create_directories(out_dir);
    const auto mode = append ? std::ios::app : std::ios::trunc;

    std::ofstream pairs(fs::path(out_dir) / "pairs.jsonl", mode);
    for (const auto& pair : result.pairs) {
        pairs << pair_to_json_line(pair) << '\n';
    }
    std::ofstream audits(fs::path(out_dir) / "audit.jsonl", mode);
    for (const auto& audit : result.audits) {
        audits << audit.to_json_line() << '\n';
    }
    std::ofstream cursor(fs::path(out_dir) / "cursor.txt", mode);
    for (const auto& id : result.processed_prompt_ids) {
        cursor << id << '\n';
    }
}

std::set<std::string> load_cursor(const std::string& out_dir) {
    std::set<std::string> done;
    std::ifstream in(fs::path(out_dir) / "cursor.txt");
    std::string line;
    while (std::getline(in, line)) {
        if (!is_blank(line)) done.insert(line);
    }
    return done;
}

std::vector<AuditRecord> load_audits(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open audit file: " + path);
    }
    std::vector<AuditRecord> audits;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (is_blank(line)) continue;
        audits.push_back(AuditRecord::from_json_line(line, lineno));
    }
    return audits;
}

StatsBundle run_stats(const std::vector<AuditRecord>& audits,
                      std::size_t wim_bins) {
    std::vector<const AuditRecord*> scored;
    for (const auto& audit : audits) {
        const bool skipped = std::any_of(
            audit.anomalies.begin(), audit.anomalies.end(),
            [](const std::string& a) {
                return a.rfind("record-skipped", 0) == 0;
            });
        if (!skipped) scored.push_back(&audit);
    }
    if (scored.empty()) {
        throw DataError("audit stream holds no scored candidates");
    }

    StatsBundle bundle;
    bundle.scale = scored.front()->scale;
    bundle.scale.validate();

    std::vector<double> ratings;
    std::vector<double> wim_display;
    for (const auto* audit : scored) {
        ratings.push_back(static_cast<double>(audit->rating));
        wim_display.push_back(display_scale(audit->wim_score, bundle.scale));
    }
    bundle.hist_ratings =
        rating_histogram(ratings, integer_edges(bundle.scale));
    bundle.hist_wim = rating_histogram(
        wim_display, uniform_edges(bundle.scale.min, bundle.scale.max,
                                   wim_bins));

    // All candidate pairs within each prompt, grouped in input order.
    std::vector<std::pair<double, double>> rating_pairs;
    std::vector<std::pair<double, double>> wim_pairs;
    std::map<std::string, std::vector<const AuditRecord*>> by_prompt;
    std::vector<std::string> prompt_order;
    for (const auto* audit : scored) {
        if (by_prompt.find(audit->prompt_id) == by_prompt.end()) {
            prompt_order.push_back(audit->prompt_id);
        }
        by_prompt[audit->prompt_id].push_back(audit);
    }
    for (const auto& prompt_id : prompt_order) {
        const auto& group = by_prompt[prompt_id];
        for (std::size_t i = 0; i < group.size(); ++i) {
            for (std::size_t j = i + 1; j < group.size(); ++j) {
                rating_pairs.emplace_back(
                    static_cast<double>(group[i]->rating),
                    static_cast<double>(group[j]->rating));
                wim_pairs.emplace_back(
                    display_scale(group[i]->wim_score, bundle.scale),
                    display_scale(group[j]->wim_score, bundle.scale));
            }
        }
    }
    if (rating_pairs.empty()) {
        throw DataError("audit stream holds no judged pairs");
    }
    bundle.rating_deltas = pair_deltas(rating_pairs, 0.0);
    bundle.wim_deltas = pair_deltas(wim_pairs, kContinuousTieTolerance);

    RatingScale delta_scale{0, bundle.scale.span()};
    bundle.hist_rating_delta =
        rating_histogram(bundle.rating_deltas.deltas,
                         integer_edges(delta_scale));
    bundle.hist_response_delta = rating_histogram(
        bundle.wim_deltas.deltas,
        uniform_edges(0.0, static_cast<double>(bundle.scale.span()),
                      wim_bins));
    return bundle;
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << content;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_stats_outputs(const StatsBundle& stats,
                         const std::string& out_dir) {
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    write_file(dir / "hist_ratings.csv",
               emit_histogram_csv(stats.hist_ratings,
                                  integer_labels(stats.scale)));
    write_file(dir / "hist_WIM.csv",
               emit_histogram_csv(stats.hist_wim,
                                  midpoint_labels(stats.hist_wim.bin_edges)));
    RatingScale delta_scale{0, stats.scale.span()};
    write_file(dir / "hist_rating_delta.csv",
               emit_histogram_csv(stats.hist_rating_delta,
                                  integer_labels(delta_scale)));
    write_file(dir / "hist_response_delta.csv",
               emit_histogram_csv(
                   stats.hist_response_delta,
                   midpoint_labels(stats.hist_response_delta.bin_edges)));

    json summary;
    summary["entropy_units"] = "nats";
    summary["n_candidates"] =
        std::accumulate(stats.hist_ratings.counts.begin(),
                        stats.hist_ratings.counts.end(), std::size_t{0});
    summary["rating"] = {{"average_delta", stats.rating_deltas.average_delta},
                         {"n_pairs", stats.rating_deltas.n_pairs},
                         {"tie_rate", stats.rating_deltas.tie_rate}};
    summary["wim"] = {{"average_delta", stats.wim_deltas.average_delta},
                      {"n_pairs", stats.wim_deltas.n_pairs},
                      {"tie_rate", stats.wim_deltas.tie_rate},
                      {"tie_note",
                       "ties include pairs where both candidates scored "
                       "exactly 1 (nothing missing on both sides)"}};
    write_file(dir / "summary.json", summary.dump(2) + "\n");
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open experiment config: " + path);
    }
    ExperimentConfig config;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string trimmed = line.substr(0, line.find('#'));
        if (is_blank(trimmed)) continue;
        const std::size_t eq = trimmed.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("experiment config line " +
                              std::to_string(lineno) +
                              ": expected key=value");
        }
        auto strip = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string()
                                          : s.substr(a, b - a + 1);
        };
        const std::string key = strip(trimmed.substr(0, eq));
        const std::string value = strip(trimmed.substr(eq + 1));
        try {
            if (key == "n_prompts") config.n_prompts = std::stoul(value);
            else if (key == "k_candidates") config.k_candidates = std::stoul(value);
            else if (key == "steps") config.steps = std::stoul(value);
            else if (key == "beta") config.beta = std::stod(value);
            else if (key == "learning_rate") config.learning_rate = std::stod(value);
            else if (key == "temperature") config.temperature = std::stod(value);
            else if (key == "seed") config.seed = std::stoull(value);
            else if (key == "scale_min") config.scale.min = std::stoi(value);
            else if (key == "scale_max") config.scale.max = std::stoi(value);
            else if (key == "quality_mean") config.quality_mean = std::stod(value);
            else if (key == "quality_sd") config.quality_sd = std::stod(value);
            else if (key == "discrete_noise_sd") config.discrete_noise_sd = std::stod(value);
            else if (key == "continuous_noise_sd") config.continuous_noise_sd = std::stod(value);
            else if (key == "moving_drift_per_step") config.moving_drift_per_step = std::stod(value);
            else {
                throw ConfigError("experiment config line " +
                                  std::to_string(lineno) +
                                  ": unknown key \"" + key + "\"");
            }
        } catch (const std::invalid_argument&) {
            throw ConfigError("experiment config line " +
                              std::to_string(lineno) + ": bad value for \"" +
                              key + "\"");
        }
    }
    config.validate();
    return config;
}

std::vector<SignalReport> run_experiment(const ExperimentConfig& config,
                                         const std::string& out_dir) {
    config.validate();
    const std::vector<SignalReport> reports = run_signal_experiment(config);

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    json summary;
    for (const auto& report : reports) {
        write_file(dir / ("report_" + report.method + ".csv"),
                   signal_report_csv(report));
        const auto& loss = report.loss_trajectory;
        json arm;
        arm["average_delta"] = format_double(report.delta_stats.average_delta);
        arm["final_advantage"] =
            format_double(report.advantage_trajectory.back());
        arm["final_entropy"] = format_double(report.entropy_trajectory.back());
        arm["final_loss"] = format_double(loss.back());
        arm["initial_loss"] = format_double(loss.front());
        arm["n_pairs"] = report.delta_stats.n_pairs;
        arm["tie_rate"] = format_double(report.delta_stats.tie_rate);
        summary[report.method] = arm;
    }
    write_file(dir / "summary.json", summary.dump(2) + "\n");
    return reports;
}

}  // namespace wim
