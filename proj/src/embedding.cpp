#include "wim/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <mutex>
#include <semaphore>

#include <httplib.h>
#include <json.hpp>

namespace wim {

double EmbeddingVector::norm() const {
    double sum = 0.0;
    for (double v : values) sum += v * v;
    return std::sqrt(sum);
}

double EmbeddingVector::dot(const EmbeddingVector& other) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        sum += values[i] * other.values[i];
    }
    return sum;
}

void EmbeddingVector::validate(std::size_t expected_dim) const {
    if (values.empty()) {
        throw InputError("embedding vector is empty");
    }
    if (expected_dim != 0 && values.size() != expected_dim) {
        throw ShapeError("embedding has dimension " +
                         std::to_string(values.size()) + ", expected " +
                         std::to_string(expected_dim));
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw InputError("embedding vector has a non-finite component");
        }
    }
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw ShapeError("cosine_similarity dimension mismatch: " +
                         std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()));
    }
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) {
        throw DegenerateInputError("cosine_similarity on zero-norm vector");
    }
    const double cosv = a.dot(b) / (na * nb);
    return std::clamp(cosv, -1.0, 1.0);
}

Decomposition decompose(const EmbeddingVector& s1, const EmbeddingVector& s2) {
    if (s1.dim() != s2.dim()) {
        throw ShapeError("decompose dimension mismatch");
    }
    const double n1sq = s1.dot(s1);
    if (n1sq == 0.0) {
        throw DegenerateInputError("decompose: projection onto zero vector");
    }
    const double coeff = s2.dot(s1) / n1sq;

    Decomposition result;
    result.parallel.values.resize(s1.dim());
    result.orthogonal.values.resize(s1.dim());
    for (std::size_t i = 0; i < s1.dim(); ++i) {
        result.parallel.values[i] = coeff * s1[i];
        result.orthogonal.values[i] = s2[i] - result.parallel.values[i];
    }
    result.cos_theta = cosine_similarity(s1, s2);
    return result;
}

double missingness_magnitude(double s2_norm, double cos_theta) {
    return s2_norm * std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
}

namespace {

// splitmix64 finalizer; stable across platforms.
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_token(const std::string& token, std::uint64_t seed) {
    std::uint64_t h = mix64(seed ^ 0x243f6a8885a308d3ULL);
    for (unsigned char c : token) {
        h = mix64(h ^ c);
    }
    return h;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

}  // namespace

EmbeddingVector hash_embed(const std::string& text, std::size_t dim,
                           std::uint64_t seed) {
    if (dim < 8) {
        throw InputError("hash_embed requires dim >= 8");
    }
    const std::vector<std::string> tokens = tokenize(text);
    if (tokens.empty()) {
        throw InputError("hash_embed on text with no tokens");
    }

    EmbeddingVector vec;
    vec.values.assign(dim, 0.0);
    auto add_feature = [&](const std::string& feature) {
        const std::uint64_t h = hash_token(feature, seed);
        const std::size_t bucket = static_cast<std::size_t>(h % dim);
        const double sign = ((h >> 63) & 1ULL) ? -1.0 : 1.0;
        vec.values[bucket] += sign;
    };
    for (const auto& t : tokens) add_feature(t);
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        add_feature(tokens[i] + "\x1f" + tokens[i + 1]);
    }

    double n = vec.norm();
    if (n == 0.0) {
        // All signed counts cancelled; fall back to a deterministic unit
        // vector derived from the first token so the contract (unit norm)
        // still holds.
        const std::uint64_t h = hash_token(tokens.front(), seed ^ 1ULL);
        vec.values[h % dim] = 1.0;
        n = 1.0;
    }
    for (double& v : vec.values) v /= n;
    return vec;
}

HashingEmbeddingProvider::HashingEmbeddingProvider(std::size_t dim,
                                                   std::uint64_t seed)
    : dim_(dim), seed_(seed) {
    if (dim < 8) {
        throw ConfigError("hashing provider requires dim >= 8");
    }
}

EmbeddingVector HashingEmbeddingProvider::embed(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        throw InputError("embed_text on empty text");
    }
    return hash_embed(text, dim_, seed_);
}

struct RemoteEmbeddingProvider::Impl {
    RemoteEmbedderConfig config;
    httplib::Client client;
    std::counting_semaphore<> in_flight;
    // httplib clients are not safe for concurrent requests
    std::mutex request_mu;

    explicit Impl(RemoteEmbedderConfig cfg)
        : config(std::move(cfg)),
          client(config.host, config.port),
          in_flight(std::max(1, config.max_in_flight)) {
        client.set_connection_timeout(config.timeout_seconds);
        client.set_read_timeout(config.timeout_seconds);
    }
};

RemoteEmbeddingProvider::RemoteEmbeddingProvider(RemoteEmbedderConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {
    if (impl_->config.host.empty()) {
        throw ConfigError("remote embedder requires a host");
    }
    if (impl_->config.dim == 0) {
        throw ConfigError("remote embedder requires a nonzero dimension");
    }
}

RemoteEmbeddingProvider::~RemoteEmbeddingProvider() = default;

std::size_t RemoteEmbeddingProvider::dim() const { return impl_->config.dim; }

EmbeddingVector RemoteEmbeddingProvider::embed(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        throw InputError("embed_text on empty text");
    }

    impl_->in_flight.acquire();
    struct Release {
        std::counting_semaphore<>& sem;
        ~Release() { sem.release(); }
    } release{impl_->in_flight};

    nlohmann::json request = {{"text", text}};
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
        throw TransportError("embedding provider unreachable at " + where);
    }
    if (res->status != 200) {
        throw TransportError("embedding provider at " + where +
                             " returned status " +
                             std::to_string(res->status));
    }

    EmbeddingVector vec;
    try {
        nlohmann::json body = nlohmann::json::parse(res->body);
        vec.values = body.at("embedding").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw TransportError("embedding provider at " + where +
                             " returned malformed payload: " + e.what());
    }
    if (vec.dim() != impl_->config.dim) {
        throw ShapeError("embedding provider at " + where + " returned " +
                         std::to_string(vec.dim()) +
                         " components, expected " +
                         std::to_string(impl_->config.dim));
    }
    vec.validate(impl_->config.dim);
    return vec;
}

}  // namespace wim
