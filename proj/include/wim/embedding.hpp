#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "wim/errors.hpp"

namespace wim {

/// Fixed-dimension real vector representing a text.
struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    double norm() const;
    double dot(const EmbeddingVector& other) const;

    // Throws InputError on empty, non-finite components, or (when expected_dim
    // is nonzero) a dimension mismatch.
    void validate(std::size_t expected_dim = 0) const;
};

/// Split of a critique vector into the component along the response vector
/// and the residual orthogonal to it.
struct Decomposition {
    EmbeddingVector parallel;
    EmbeddingVector orthogonal;
    double cos_theta = 0.0;
};

/// Cosine of the angle between a and b, clamped to [-1, 1].
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Project s2 onto s1 and split into parallel + orthogonal parts.
/// s1 must have nonzero norm.
Decomposition decompose(const EmbeddingVector& s1, const EmbeddingVector& s2);

/// Magnitude of the orthogonal component from norm and angle alone:
/// s2_norm * sqrt(1 - cos^2 theta).
double missingness_magnitude(double s2_norm, double cos_theta);

/// Deterministic offline embedder: hashes word unigrams and bigrams of the
/// lowercased text into dim signed buckets, then L2-normalizes. Same
/// (text, dim, seed) always yields the same vector. Throws InputError when
/// the text has no tokens or dim < 8.
EmbeddingVector hash_embed(const std::string& text, std::size_t dim,
                           std::uint64_t seed);

/// Text-to-vector provider. Instances are safe to share across threads.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    // Non-empty text in, vector of exactly dim() components out.
    virtual EmbeddingVector embed(const std::string& text) = 0;

    virtual std::size_t dim() const = 0;
    virtual std::string kind() const = 0;
};

constexpr std::size_t kDefaultHashingDim = 256;
constexpr std::size_t kDefaultRemoteDim = 768;

/// In-process provider backed by hash_embed. Test double for the remote model.
class HashingEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HashingEmbeddingProvider(std::size_t dim = kDefaultHashingDim,
                                      std::uint64_t seed = 0);

    EmbeddingVector embed(const std::string& text) override;
    std::size_t dim() const override { return dim_; }
    std::string kind() const override { return "hashing"; }

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

struct RemoteEmbedderConfig {
    std::string host;           // e.g. "localhost"
    int port = 80;
    std::string path = "/embed";
    std::size_t dim = kDefaultRemoteDim;
    int timeout_seconds = 30;
    int max_in_flight = 8;      // bound on concurrent requests
};

/// HTTP client for an embedding endpoint. Request/response schema is
/// documented in docs/interfaces.md. Bounds in-flight requests.
class RemoteEmbeddingProvider : public EmbeddingProvider {
public:
    explicit RemoteEmbeddingProvider(RemoteEmbedderConfig config);
    ~RemoteEmbeddingProvider() override;

    EmbeddingVector embed(const std::string& text) override;
    std::size_t dim() const override;
    std::string kind() const override { return "remote"; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace wim
