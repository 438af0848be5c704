#include "wim/judge.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <semaphore>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

namespace wim {

std::string to_string(JudgeRole role) {
    return role == JudgeRole::fixed ? "fixed" : "moving";
}

JudgeRole judge_role_from_string(const std::string& s) {
    if (s == "fixed") return JudgeRole::fixed;
    if (s == "moving") return JudgeRole::moving;
    throw ConfigError("unknown judge role: " + s);
}

std::string judge_system_prompt(const RatingScale& scale) {
    scale.validate();
    const std::string lo = std::to_string(scale.min);
    const std::string hi = std::to_string(scale.max);
    return
        "After providing your explanation, please rate the response on a "
        "scale of " + lo + " to " + hi + " by strictly following this "
        "format: ``[[rating]]``, for example: ``Rating: [[5]]``. Next you "
        "will provide a 1-2 sentence summary of what is missing (WIM) in "
        "their response. This should focus on the specific content and "
        "precise information they did not include. Please give this summary "
        "by strictly following this format: ``[[[wim]]]``, for example: "
        "``WIM: [[[The response does not detail how Bill C-311 would have "
        "interacted with existing provisions in the Criminal Code or "
        "explicitly explain the legal basis for claims that it might "
        "indirectly affect abortion rights. It also omits specific examples "
        "of cases or statistics that were cited to justify or oppose the "
        "bill.]]]``. DO NOT SAY ANYTHING ELSE EXCEPT THE REQUIRED RESPONSE! "
        "ALWAYS INCLUDE THE RATING IN THE CORRECT BRACKETS. THE RATING MUST "
        "NOT HAVE ANYTHING ELSE OTHER THAN A SINGLE NUMBER. ALWAYS ASSUME "
        "THAT THE ANSWER I GIVE IS CORRECT. If you believe there is nothing "
        "missing in the response, please leave the wim response as "
        "``[[[]]]``.";
}

std::string build_judge_prompt(const std::string& question,
                               const std::string& response,
                               const RatingScale& scale) {
    auto is_blank = [](const std::string& s) {
        return s.find_first_not_of(" \t\r\n") == std::string::npos;
    };
    if (is_blank(question)) throw InputError("judge prompt: empty question");
    if (is_blank(response)) throw InputError("judge prompt: empty response");

    std::ostringstream out;
    out << judge_system_prompt(scale) << "\n\n"
        << "[Question]\n" << question << "\n\n"
        << "[Response]\n" << response << "\n";
    return out.str();
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool is_bare_integer(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    return true;
}

// First [[[...]]] span, bracket-depth aware so critiques containing ]] do
// not truncate. Returns false when no complete span exists.
bool extract_wim_span(const std::string& raw, std::string* out) {
    const std::size_t open = raw.find("[[[");
    if (open == std::string::npos) return false;
    int depth = 0;
    for (std::size_t i = open + 3; i < raw.size(); ++i) {
        const char c = raw[i];
        if (c == '[') {
            ++depth;
        } else if (c == ']') {
            if (depth > 0) {
                --depth;
            } else if (raw.compare(i, 3, "]]]") == 0) {
                *out = raw.substr(open + 3, i - open - 3);
                return true;
            }
        }
    }
    return false;
}

}  // namespace

JudgeVerdict parse_verdict(const std::string& raw, const RatingScale& scale) {
    scale.validate();
    JudgeVerdict verdict;
    verdict.raw = raw;

    // Rating: first [[n]] span (not part of a [[[ opener) whose content is
    // a bare integer.
    bool found_rating = false;
    for (std::size_t i = 0; i + 3 < raw.size();) {
        const std::size_t open = raw.find("[[", i);
        if (open == std::string::npos) break;
        const bool triple = (open + 2 < raw.size() && raw[open + 2] == '[') ||
                            (open > 0 && raw[open - 1] == '[');
        if (triple) {
            i = open + 1;
            continue;
        }
        const std::size_t close = raw.find("]]", open + 2);
        if (close == std::string::npos) break;
        const std::string content = trim(raw.substr(open + 2, close - open - 2));
        if (is_bare_integer(content)) {
            if (!found_rating) {
                verdict.rating = std::stoi(content);
                found_rating = true;
            } else {
                verdict.multiple_rating_spans = true;
            }
        }
        i = close + 2;
    }
    if (!found_rating) {
        throw MissingRatingError("judge output has no [[n]] rating span");
    }
    if (!scale.contains(verdict.rating)) {
        throw OutOfScaleError("judge rating " + std::to_string(verdict.rating) +
                                  " outside scale [" +
                                  std::to_string(scale.min) + ", " +
                                  std::to_string(scale.max) + "]",
                              verdict.rating);
    }

    std::string wim_span;
    if (!extract_wim_span(raw, &wim_span)) {
        throw MissingWimError("judge output has no [[[...]]] span");
    }
    const std::string trimmed = trim(wim_span);
    if (!trimmed.empty()) {
        verdict.wim_text = trimmed;
    }
    return verdict;
}

std::string render_verdict(const JudgeVerdict& verdict) {
    std::ostringstream out;
    out << "Rating: [[" << verdict.rating << "]]\nWIM: [[["
        << (verdict.wim_text ? *verdict.wim_text : "") << "]]]";
    return out.str();
}

const std::string& scripted_judge(const Transcript& transcript,
                                  const std::string& key) {
    const auto it = transcript.find(key);
    if (it == transcript.end()) {
        throw LookupError("no transcript entry for key \"" + key + "\"");
    }
    return it->second;
}

std::string escape_transcript_text(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string unescape_transcript_text(const std::string& escaped) {
    std::string out;
    out.reserve(escaped.size());
    for (std::size_t i = 0; i < escaped.size(); ++i) {
        if (escaped[i] != '\\' || i + 1 == escaped.size()) {
            out.push_back(escaped[i]);
            continue;
        }
        switch (escaped[++i]) {
            case 'n': out.push_back('\n'); break;
            case 't': out.push_back('\t'); break;
            case 'r': out.push_back('\r'); break;
            case '\\': out.push_back('\\'); break;
            default:
                out.push_back('\\');
                out.push_back(escaped[i]);
        }
    }
    return out;
}

Transcript load_transcript(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open transcript: " + path);
    }
    Transcript transcript;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) {
            throw DataError("transcript " + path + " line " +
                            std::to_string(lineno) + ": expected key<TAB>raw");
        }
        transcript[line.substr(0, tab)] =
            unescape_transcript_text(line.substr(tab + 1));
    }
    return transcript;
}

void save_transcript(const Transcript& transcript, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write transcript: " + path);
    }
    for (const auto& [key, raw] : transcript) {
        out << key << '\t' << escape_transcript_text(raw) << '\n';
    }
}

ScriptedJudgeProvider::ScriptedJudgeProvider(Transcript transcript,
                                             JudgeRole role)
    : transcript_(std::move(transcript)), role_(role) {}

std::string ScriptedJudgeProvider::judge(const std::string& key,
                                         const std::string& /*prompt*/) {
    return scripted_judge(transcript_, key);
}

struct RemoteJudgeProvider::Impl {
    RemoteJudgeConfig config;
    std::string system_prompt;
    httplib::Client client;
    std::counting_semaphore<> in_flight;
    // httplib clients are not safe for concurrent requests
    std::mutex request_mu;

    Impl(RemoteJudgeConfig cfg, std::string sys)
        : config(std::move(cfg)),
          system_prompt(std::move(sys)),
          client(config.host, config.port),
          in_flight(std::max(1, config.max_in_flight)) {
        client.set_connection_timeout(config.timeout_seconds);
        client.set_read_timeout(config.timeout_seconds);
        if (!config.auth_env_var.empty()) {
            const char* token = std::getenv(config.auth_env_var.c_str());
            if (token != nullptr && *token != '\0') {
                client.set_bearer_token_auth(token);
            }
        }
    }
};

RemoteJudgeProvider::RemoteJudgeProvider(RemoteJudgeConfig config,
                                         std::string system_prompt)
    : impl_(std::make_unique<Impl>(std::move(config),
                                   std::move(system_prompt))) {
    if (impl_->config.host.empty()) {
        throw ConfigError("remote judge requires a host");
    }
}

RemoteJudgeProvider::~RemoteJudgeProvider() = default;

JudgeRole RemoteJudgeProvider::role() const { return impl_->config.role; }

std::string RemoteJudgeProvider::judge(const std::string& /*key*/,
                                       const std::string& prompt) {
    impl_->in_flight.acquire();
    struct Release {
        std::counting_semaphore<>& sem;
        ~Release() { sem.release(); }
    } release{impl_->in_flight};

    nlohmann::json request = {
        {"model", impl_->config.model},
        {"messages",
         {{{"role", "system"}, {"content", impl_->system_prompt}},
          {{"role", "user"}, {"content", prompt}}}},
    };
    httplib::Result res;
    {
        std::lock_guard<std::mutex> lock(impl_->request_mu);
        res = impl_->client.Post(impl_->config.path, request.dump(),
                                 "application/json");
    }
    const std::string where =
        impl_->config.host + ":" + std::to_string(impl_->config.port) +
        impl_->config.path;
    if (!res) {
        throw TransportError("judge provider unreachable at " + where);
    }
    if (res->status != 200) {
        throw TransportError("judge provider at " + where +
                             " returned status " + std::to_string(res->status));
    }
    try {
        nlohmann::json body = nlohmann::json::parse(res->body);
        return body.at("choices").at(0).at("message").at("content")
            .get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw TransportError("judge provider at " + where +
                             " returned malformed payload: " + e.what());
    }
}

}  // namespace wim
