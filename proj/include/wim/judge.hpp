#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "wim/errors.hpp"
#include "wim/rating_scale.hpp"

namespace wim {

/// Parsed judge output: the integer rating plus the optional
/// "what is missing" critique. wim_text absent means nothing was missing.
struct JudgeVerdict {
    int rating = 0;
    std::optional<std::string> wim_text;
    std::string raw;
    // More than one bare-integer [[n]] span was present; the first was used.
    bool multiple_rating_spans = false;
};

/// Fixed judge critiques come from the frozen reference model; moving judge
/// critiques come from the model being trained. Recorded as metadata only.
enum class JudgeRole { fixed, moving };

std::string to_string(JudgeRole role);
JudgeRole judge_role_from_string(const std::string& s);

/// System prompt instructing the judge to emit `Rating: [[n]]` followed by
/// `WIM: [[[...]]]`, with the scale bounds substituted.
std::string judge_system_prompt(const RatingScale& scale);

/// Full prompt: system instructions, then the question and the response to
/// be judged. Throws InputError when either is empty.
std::string build_judge_prompt(const std::string& question,
                               const std::string& response,
                               const RatingScale& scale);

/// Extracts the first bare-integer [[n]] span as the rating and the first
/// [[[...]]] span as the critique. An empty or whitespace-only span means
/// the critique is absent. Throws MissingRatingError, OutOfScaleError, or
/// MissingWimError.
JudgeVerdict parse_verdict(const std::string& raw, const RatingScale& scale);

/// Canonical rendering; parse_verdict(render_verdict(v)) preserves rating
/// and wim_text.
std::string render_verdict(const JudgeVerdict& verdict);

using Transcript = std::map<std::string, std::string>;

/// Returns the stored raw output for key. Throws LookupError when absent.
const std::string& scripted_judge(const Transcript& transcript,
                                  const std::string& key);

/// Transcript file format: one record per line, `key<TAB>raw` with raw
/// newline-escaped (see docs/interfaces.md).
Transcript load_transcript(const std::string& path);
void save_transcript(const Transcript& transcript, const std::string& path);

std::string escape_transcript_text(const std::string& raw);
std::string unescape_transcript_text(const std::string& escaped);

/// Source of raw judge outputs, keyed so verdicts can be re-associated with
/// candidates independent of completion order.
class JudgeProvider {
public:
    virtual ~JudgeProvider() = default;

    virtual std::string judge(const std::string& key,
                              const std::string& prompt) = 0;

    virtual std::string kind() const = 0;
    virtual JudgeRole role() const = 0;
};

/// Deterministic replay judge backed by a transcript. The prompt is ignored;
/// outputs are keyed.
class ScriptedJudgeProvider : public JudgeProvider {
public:
    explicit ScriptedJudgeProvider(Transcript transcript,
                                   JudgeRole role = JudgeRole::fixed);

    std::string judge(const std::string& key,
                      const std::string& prompt) override;
    std::string kind() const override { return "scripted"; }
    JudgeRole role() const override { return role_; }

private:
    Transcript transcript_;
    JudgeRole role_;
};

struct RemoteJudgeConfig {
    std::string host;
    int port = 80;
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string auth_env_var;   // name of the env var holding the token
    int timeout_seconds = 120;
    int max_in_flight = 8;
    JudgeRole role = JudgeRole::fixed;
};

/// HTTP chat-completion client. Payload schema in docs/interfaces.md.
class RemoteJudgeProvider : public JudgeProvider {
public:
    explicit RemoteJudgeProvider(RemoteJudgeConfig config,
                                 std::string system_prompt);
    ~RemoteJudgeProvider() override;

    std::string judge(const std::string& key,
                      const std::string& prompt) override;
    std::string kind() const override { return "remote"; }
    JudgeRole role() const override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace wim
