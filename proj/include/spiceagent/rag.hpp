// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace spiceagent
{

/// Word-level token with its byte span in the source text.
struct Token
{
    std::string text;
    std::size_t begin = 0;
    std::size_t end = 0;

    bool operator==(Token const&) const = default;
};

/// Approximate tokenizer: runs of letters/digits form one token, every other
/// non-space character is a token of its own.
std::vector<Token> tokenize(std::string_view text);

struct DocumentChunk
{
    std::size_t id = 0;
    std::string source;
    std::string text;
    std::size_t token_offset = 0; ///< index of the first token in the document
    std::size_t token_count = 0;
    std::size_t ordinal = 0;
};

enum class RetrievalBackend
{
    Lexical,
    Embedding,
};

struct RetrievalConfig
{
    std::size_t chunk_size = 800;
    std::size_t overlap = 400;
    std::size_t max_chunks = 20;
    std::size_t embedding_dim = 256;
    RetrievalBackend backend = RetrievalBackend::Lexical;

    void validate() const;
};

std::vector<DocumentChunk> chunk_document(std::string_view text, RetrievalConfig const& config, std::string_view source = "datasheet");

/// Source of dense vectors for the embedding backend.
class EmbeddingClient
{
  public:
    virtual ~EmbeddingClient() = default;
    virtual std::vector<std::vector<double>> embed(std::vector<std::string> const& texts, std::size_t dimensions) = 0;
};

/// Calls an OpenAI-style `POST {base_url}/embeddings` endpoint.
class HttpEmbeddingClient final: public EmbeddingClient
{
  public:
    HttpEmbeddingClient(std::string base_url, std::string api_key, std::string model = "text-embedding-3-large");
    std::vector<std::vector<double>> embed(std::vector<std::string> const& texts, std::size_t dimensions) override;

  private:
    std::string _base_url;
    std::string _api_key;
    std::string _model;
};

struct ScoredChunk
{
    DocumentChunk chunk;
    double score = 0.0;
};

class RetrievalIndex
{
  public:
    std::size_t size() const noexcept { return _chunks.size(); }
    RetrievalConfig const& config() const noexcept { return _config; }
    std::vector<DocumentChunk> const& chunks() const noexcept { return _chunks; }
    /// Unit-norm vectors (embedding backend only).
    std::vector<std::vector<double>> const& vectors() const noexcept { return _vectors; }

    friend RetrievalIndex index(std::vector<DocumentChunk> chunks, RetrievalConfig const& config, EmbeddingClient* embedder);
    friend std::vector<ScoredChunk> retrieve(std::string_view query, RetrievalIndex const& idx, std::size_t k);

  private:
    RetrievalConfig _config;
    std::vector<DocumentChunk> _chunks;
    std::vector<std::vector<double>> _vectors;
    // lexical backend
    std::vector<std::map<std::string, double>> _weights;
    std::vector<double> _norms;
    std::map<std::string, double> _idf;
    EmbeddingClient* _embedder = nullptr;
};

/// Builds the index. `embedder` is required for the embedding backend and must outlive the index.
RetrievalIndex index(std::vector<DocumentChunk> chunks, RetrievalConfig const& config, EmbeddingClient* embedder = nullptr);

/// Top-k by cosine similarity; ties go to the earlier chunk.
std::vector<ScoredChunk> retrieve(std::string_view query, RetrievalIndex const& idx, std::size_t k);

} // namespace spiceagent
