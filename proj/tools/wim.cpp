// Command-line front end: rate datasets, aggregate audit statistics, run the
// synthetic learning-signal experiment, and inspect a single decomposition.

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "wim/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitProvider = 2;
constexpr int kExitData = 3;

struct EmbedderOptions {
    std::string kind = "hashing";
    std::size_t dim = 0;  // 0: kind default
    std::uint64_t seed = 0;
    std::string host;
    int port = 80;
    std::string path = "/embed";

    void add_to(CLI::App& app) {
        app.add_option("--embedder", kind, "Embedding provider kind")
            ->check(CLI::IsMember({"hashing", "remote"}));
        app.add_option("--embedder-dim", dim, "Embedding dimension");
        app.add_option("--embedder-seed", seed, "Hashing embedder seed");
        app.add_option("--embedder-host", host, "Remote embedder host");
        app.add_option("--embedder-port", port, "Remote embedder port");
        app.add_option("--embedder-path", path, "Remote embedder URL path");
    }

    std::unique_ptr<wim::EmbeddingProvider> make() const {
        if (kind == "hashing") {
            return std::make_unique<wim::HashingEmbeddingProvider>(
                dim == 0 ? wim::kDefaultHashingDim : dim, seed);
        }
        wim::RemoteEmbedderConfig config;
        config.host = host;
        config.port = port;
        config.path = path;
        config.dim = dim == 0 ? wim::kDefaultRemoteDim : dim;
        return std::make_unique<wim::RemoteEmbeddingProvider>(config);
    }
};

struct JudgeOptions {
    std::string kind = "scripted";
    std::string transcript_path;
    std::string role = "fixed";
    std::string host;
    int port = 80;
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string auth_env = "WIM_JUDGE_TOKEN";

    void add_to(CLI::App& app) {
        app.add_option("--judge", kind, "Judge provider kind")
            ->check(CLI::IsMember({"scripted", "remote"}));
        app.add_option("--transcript", transcript_path,
                       "Scripted judge transcript file");
        app.add_option("--judge-role", role, "Judge role recorded in audits")
            ->check(CLI::IsMember({"fixed", "moving"}));
        app.add_option("--judge-host", host, "Remote judge host");
        app.add_option("--judge-port", port, "Remote judge port");
        app.add_option("--judge-path", path, "Remote judge URL path");
        app.add_option("--judge-model", model, "Remote judge model name");
        app.add_option("--judge-auth-env", auth_env,
                       "Env var holding the judge auth token");
    }

    std::unique_ptr<wim::JudgeProvider> make(
        const wim::RatingScale& scale) const {
        const wim::JudgeRole judge_role = wim::judge_role_from_string(role);
        if (kind == "scripted") {
            if (transcript_path.empty()) {
                throw wim::ConfigError(
                    "scripted judge requires --transcript");
            }
            return std::make_unique<wim::ScriptedJudgeProvider>(
                wim::load_transcript(transcript_path), judge_role);
        }
        wim::RemoteJudgeConfig config;
        config.host = host;
        config.port = port;
        config.path = path;
        config.model = model;
        config.auth_env_var = auth_env;
        config.role = judge_role;
        return std::make_unique<wim::RemoteJudgeProvider>(
            config, wim::judge_system_prompt(scale));
    }
};

int run_rate(const std::string& input, const std::string& out_dir,
             const wim::RatingRunConfig& config,
             const EmbedderOptions& embedder_options,
             const JudgeOptions& judge_options, bool resume) {
    auto embedder = embedder_options.make();
    auto judge = judge_options.make(config.scale);
    const std::vector<wim::PromptRecord> records = wim::ingest(input);
    const std::set<std::string> done =
        resume ? wim::load_cursor(out_dir) : std::set<std::string>{};

    wim::RatingRunResult result;
    try {
        wim::run_rating(config, records, *judge, *embedder, result, done);
    } catch (const wim::TransportError& e) {
        // Flush what completed plus the cursor so the run can resume.
        wim::write_rating_outputs(result, out_dir, resume);
        std::cerr << "provider failure: " << e.what() << "\n"
                  << "partial outputs flushed to " << out_dir
                  << "; rerun with --resume\n";
        return kExitProvider;
    }
    wim::write_rating_outputs(result, out_dir, resume);
    std::cout << "rated " << result.processed_prompt_ids.size()
              << " records (" << result.skipped_prompt_ids.size()
              << " skipped), " << result.pairs.size() << " pairs -> "
              << out_dir << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"What-is-missing feedback rating engine"};
    app.require_subcommand(1);

    // rate
    auto* rate = app.add_subcommand("rate", "Judge, score, rank a dataset");
    std::string input;
    std::string out_dir = "out";
    bool resume = false;
    wim::RatingRunConfig rating_config;
    std::string pairing = "best-worst";
    EmbedderOptions embedder_options;
    JudgeOptions judge_options;
    rate->add_option("--input", input, "JSONL dataset")->required();
    rate->add_option("--out-dir", out_dir, "Output directory");
    rate->add_option("--zeta", rating_config.zeta,
                     "Mix weight: 0 numeric only, 1 WIM only");
    rate->add_option("--scale-min", rating_config.scale.min, "Scale minimum");
    rate->add_option("--scale-max", rating_config.scale.max, "Scale maximum");
    rate->add_option("--pairing", pairing, "Pairing policy")
        ->check(CLI::IsMember({"best-worst", "adjacent", "all-pairs"}));
    rate->add_option("--seed", rating_config.seed, "Run seed");
    rate->add_option("--concurrency", rating_config.concurrency,
                     "Bounded provider window");
    rate->add_option("--retry-budget", rating_config.retry_budget,
                     "Transport retries per call");
    rate->add_option("--timestamp", rating_config.timestamp,
                     "Pin the audit timestamp (for reproducible bytes)");
    rate->add_flag("--resume", resume, "Skip prompt_ids in the cursor file");
    embedder_options.add_to(*rate);
    judge_options.add_to(*rate);

    // stats
    auto* stats = app.add_subcommand("stats", "Histograms and delta stats "
                                              "from an audit file");
    std::string audit_path;
    std::string stats_out = "out";
    std::size_t wim_bins = wim::kDefaultWimBins;
    stats->add_option("--audit", audit_path, "audit.jsonl path")->required();
    stats->add_option("--out-dir", stats_out, "Output directory");
    stats->add_option("--wim-bins", wim_bins, "WIM histogram bin count");

    // experiment
    auto* experiment =
        app.add_subcommand("experiment", "Synthetic learning-signal run");
    std::string config_path;
    std::string experiment_out = "out";
    wim::ExperimentConfig experiment_config;
    experiment->add_option("--config", config_path,
                           "key=value experiment config file");
    experiment->add_option("--out-dir", experiment_out, "Output directory");
    experiment->add_option("--seed", experiment_config.seed, "Seed");
    experiment->add_option("--steps", experiment_config.steps, "Steps");
    experiment->add_option("--prompts", experiment_config.n_prompts,
                           "Prompt count");
    experiment->add_option("--candidates", experiment_config.k_candidates,
                           "Candidates per prompt");
    experiment->add_option("--beta", experiment_config.beta, "DPO beta");
    experiment->add_option("--lr", experiment_config.learning_rate,
                           "Learning rate");

    // decompose
    auto* decompose =
        app.add_subcommand("decompose", "Missingness of one response/"
                                        "critique pair");
    std::string response_text;
    std::string critique_text;
    EmbedderOptions decompose_embedder;
    wim::RatingScale display;
    decompose->add_option("--response", response_text, "Response text")
        ->required();
    decompose->add_option("--critique", critique_text, "Critique text")
        ->required();
    decompose->add_option("--scale-min", display.min, "Display scale min");
    decompose->add_option("--scale-max", display.max, "Display scale max");
    decompose_embedder.add_to(*decompose);

    CLI11_PARSE(app, argc, argv);

    try {
        if (rate->parsed()) {
            rating_config.pairing = wim::pairing_policy_from_string(pairing);
            rating_config.validate();
            return run_rate(input, out_dir, rating_config, embedder_options,
                            judge_options, resume);
        }
        if (stats->parsed()) {
            const auto audits = wim::load_audits(audit_path);
            const wim::StatsBundle bundle = wim::run_stats(audits, wim_bins);
            wim::write_stats_outputs(bundle, stats_out);
            std::cout << "stats over " << audits.size() << " audits -> "
                      << stats_out << "\n";
            return kExitOk;
        }
        if (experiment->parsed()) {
            wim::ExperimentConfig config = experiment_config;
            if (!config_path.empty()) {
                config = wim::load_experiment_config(config_path);
                // CLI flags override file values.
                if (experiment->count("--seed")) {
                    config.seed = experiment_config.seed;
                }
                if (experiment->count("--steps")) {
                    config.steps = experiment_config.steps;
                }
                if (experiment->count("--prompts")) {
                    config.n_prompts = experiment_config.n_prompts;
                }
                if (experiment->count("--candidates")) {
                    config.k_candidates = experiment_config.k_candidates;
                }
                if (experiment->count("--beta")) {
                    config.beta = experiment_config.beta;
                }
                if (experiment->count("--lr")) {
                    config.learning_rate = experiment_config.learning_rate;
                }
            }
            const auto reports = wim::run_experiment(config, experiment_out);
            for (const auto& report : reports) {
                std::printf("%-11s tie_rate=%.4f avg_delta=%.4f "
                            "loss %.5f -> %.5f\n",
                            report.method.c_str(),
                            report.delta_stats.tie_rate,
                            report.delta_stats.average_delta,
                            report.loss_trajectory.front(),
                            report.loss_trajectory.back());
            }
            return kExitOk;
        }
        if (decompose->parsed()) {
            auto embedder = decompose_embedder.make();
            const wim::EmbeddingVector s1 = embedder->embed(response_text);
            const wim::EmbeddingVector s2 = embedder->embed(critique_text);
            const wim::Decomposition d = wim::decompose(s1, s2);
            const double missingness =
                wim::missingness_magnitude(s2.norm(), d.cos_theta);
            std::printf("cosine        %.6f\n", d.cos_theta);
            std::printf("display scale %.2f (on %d-%d)\n",
                        wim::display_scale(d.cos_theta, display), display.min,
                        display.max);
            std::printf("|parallel|    %.6f\n", d.parallel.norm());
            std::printf("|orthogonal|  %.6f (missingness %.6f)\n",
                        d.orthogonal.norm(), missingness);
            return kExitOk;
        }
    } catch (const wim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const wim::TransportError& e) {
        std::cerr << "provider failure: " << e.what() << "\n";
        return kExitProvider;
    } catch (const wim::Error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}
