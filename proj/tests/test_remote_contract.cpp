#include <atomic>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include "wim/embedding.hpp"
#include "wim/judge.hpp"

using namespace wim;
using nlohmann::json;

namespace {

// In-process HTTP server for exercising the remote providers end to end.
struct MockServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    ~MockServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }

    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
        REQUIRE(server.is_running());
    }
};

EmbeddingVector unit_vector(std::size_t dim, std::size_t hot) {
    EmbeddingVector vec;
    vec.values.assign(dim, 0.0);
    vec.values[hot % dim] = 1.0;
    return vec;
}

}  // namespace

TEST_CASE("remote embedder speaks the documented request schema") {
    MockServer mock;
    std::atomic<int> requests{0};
    std::string last_body;
    std::mutex mu;
    mock.server.Post("/embed", [&](const httplib::Request& req,
                                   httplib::Response& res) {
        requests.fetch_add(1);
        {
            std::lock_guard<std::mutex> lock(mu);
            last_body = req.body;
        }
        const json body = json::parse(req.body);
        const std::string text = body.at("text").get<std::string>();
        json reply;
        reply["embedding"] = unit_vector(16, text.size()).values;
        res.set_content(reply.dump(), "application/json");
    });
    mock.start();

    RemoteEmbedderConfig config;
    config.host = "127.0.0.1";
    config.port = mock.port;
    config.dim = 16;
    RemoteEmbeddingProvider provider(config);
    CHECK(provider.dim() == 16);
    CHECK(provider.kind() == "remote");

    const EmbeddingVector vec = provider.embed("orbital mechanics");
    CHECK(vec.dim() == 16);
    CHECK(vec.norm() == doctest::Approx(1.0));
    CHECK(requests.load() == 1);
    const json sent = json::parse(last_body);
    CHECK(sent.at("text") == "orbital mechanics");
    CHECK(sent.size() == 1);  // no undocumented fields

    CHECK_THROWS_AS(provider.embed("   "), InputError);
}

TEST_CASE("remote embedder rejects wrong dimensions and bad payloads") {
    MockServer mock;
    std::atomic<int> mode{0};
    mock.server.Post("/embed", [&](const httplib::Request&,
                                   httplib::Response& res) {
        switch (mode.load()) {
            case 0: {
                json reply;
                reply["embedding"] = unit_vector(8, 1).values;
                res.set_content(reply.dump(), "application/json");
                break;
            }
            case 1:
                res.set_content("not json at all", "text/plain");
                break;
            default:
                res.status = 500;
        }
    });
    mock.start();

    RemoteEmbedderConfig config;
    config.host = "127.0.0.1";
    config.port = mock.port;
    config.dim = 16;
    RemoteEmbeddingProvider provider(config);

    CHECK_THROWS_AS(provider.embed("short vector"), ShapeError);
    mode = 1;
    CHECK_THROWS_AS(provider.embed("garbled body"), TransportError);
    mode = 2;
    CHECK_THROWS_AS(provider.embed("server error"), TransportError);
}

TEST_CASE("an unreachable embedding endpoint is a transport error") {
    RemoteEmbedderConfig config;
    config.host = "127.0.0.1";
    config.port = 1;  // nothing listens here
    config.timeout_seconds = 1;
    RemoteEmbeddingProvider provider(config);
    CHECK_THROWS_AS(provider.embed("no server"), TransportError);

    RemoteEmbedderConfig hostless;
    CHECK_THROWS_AS(RemoteEmbeddingProvider{hostless}, ConfigError);
}

TEST_CASE("remote embedder serves concurrent callers") {
    MockServer mock;
    mock.server.Post("/embed", [&](const httplib::Request& req,
                                   httplib::Response& res) {
        const json body = json::parse(req.body);
        const std::string text = body.at("text").get<std::string>();
        json reply;
        reply["embedding"] = unit_vector(16, text.size()).values;
        res.set_content(reply.dump(), "application/json");
    });
    mock.start();

    RemoteEmbedderConfig config;
    config.host = "127.0.0.1";
    config.port = mock.port;
    config.dim = 16;
    RemoteEmbeddingProvider provider(config);

    std::vector<std::thread> workers;
    std::atomic<int> failures{0};
    for (int t = 0; t < 8; ++t) {
        workers.emplace_back([&, t] {
            for (int i = 0; i < 10; ++i) {
                const std::string text(1 + (t * 10 + i) % 16, 'x');
                const EmbeddingVector vec = provider.embed(text);
                if (vec[text.size() % 16] != 1.0) failures.fetch_add(1);
            }
        });
    }
    for (auto& w : workers) w.join();
    CHECK(failures.load() == 0);
}

TEST_CASE("remote judge speaks the chat-completion schema") {
    MockServer mock;
    std::string last_body;
    std::string last_auth;
    std::mutex mu;
    mock.server.Post("/v1/chat/completions",
                     [&](const httplib::Request& req, httplib::Response& res) {
                         {
                             std::lock_guard<std::mutex> lock(mu);
                             last_body = req.body;
                             last_auth = req.get_header_value("Authorization");
                         }
                         json reply;
                         reply["choices"] = json::array();
                         reply["choices"].push_back(
                             {{"message",
                               {{"role", "assistant"},
                                {"content",
                                 "Rating: [[8]]\nWIM: [[[no citations]]]"}}}});
                         res.set_content(reply.dump(), "application/json");
                     });
    mock.start();

    setenv("WIM_TEST_JUDGE_TOKEN", "secret-token", 1);
    RemoteJudgeConfig config;
    config.host = "127.0.0.1";
    config.port = mock.port;
    config.model = "judge-model";
    config.auth_env_var = "WIM_TEST_JUDGE_TOKEN";
    const RatingScale scale{1, 10};
    RemoteJudgeProvider provider(config, judge_system_prompt(scale));
    CHECK(provider.kind() == "remote");
    CHECK(provider.role() == JudgeRole::fixed);

    const std::string raw =
        provider.judge("p1.a", build_judge_prompt("Why is the sky blue?",
                                                  "Rayleigh scattering.",
                                                  scale));
    const JudgeVerdict verdict = parse_verdict(raw, scale);
    CHECK(verdict.rating == 8);
    CHECK(verdict.wim_text == "no citations");

    const json sent = json::parse(last_body);
    CHECK(sent.at("model") == "judge-model");
    REQUIRE(sent.at("messages").size() == 2);
    CHECK(sent.at("messages")[0].at("role") == "system");
    CHECK(sent.at("messages")[0].at("content") == judge_system_prompt(scale));
    CHECK(sent.at("messages")[1].at("role") == "user");
    CHECK(last_auth == "Bearer secret-token");
}

TEST_CASE("remote judge surfaces outages and malformed replies") {
    MockServer mock;
    std::atomic<int> mode{0};
    mock.server.Post("/v1/chat/completions",
                     [&](const httplib::Request&, httplib::Response& res) {
                         if (mode.load() == 0) {
                             res.status = 503;
                         } else {
                             res.set_content("{\"choices\":[]}",
                                             "application/json");
                         }
                     });
    mock.start();

    RemoteJudgeConfig config;
    config.host = "127.0.0.1";
    config.port = mock.port;
    config.model = "judge-model";
    RemoteJudgeProvider provider(config, judge_system_prompt(RatingScale{}));
    CHECK_THROWS_AS(provider.judge("k", "prompt"), TransportError);
    mode = 1;
    CHECK_THROWS_AS(provider.judge("k", "prompt"), TransportError);

    RemoteJudgeConfig hostless;
    CHECK_THROWS_AS(
        RemoteJudgeProvider(hostless, judge_system_prompt(RatingScale{})),
        ConfigError);
}
