// SPDX-License-Identifier: Apache-2.0
#include <spiceagent/error.hpp>
#include <spiceagent/rag.hpp>

#include "http.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>

namespace spiceagent
{

namespace
{
    bool is_word_byte(unsigned char c) noexcept { return std::isalnum(c) || c >= 0x80; }

    std::set<std::string> const& stopwords()
    {
        static std::set<std::string> const words {
            "a", "about", "above", "after", "again", "all", "also", "an", "and", "any", "are", "as", "at", "be", "because",
            "been", "before", "being", "between", "both", "but", "by", "can", "could", "did", "do", "does", "doing", "down",
            "during", "each", "for", "from", "further", "had", "has", "have", "having", "he", "her", "here", "him", "his",
            "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just", "me", "more", "most", "my", "no", "nor",
            "not", "now", "of", "off", "on", "once", "only", "or", "other", "our", "out", "over", "own", "same", "she",
            "should", "so", "some", "such", "than", "that", "the", "their", "them", "then", "there", "these", "they",
            "this", "those", "through", "to", "too", "under", "until", "up", "very", "was", "we", "were", "what", "when",
            "where", "which", "while", "who", "whom", "why", "will", "with", "would", "you", "your",
        };
        return words;
    }

    std::vector<std::string> terms(std::string_view text)
    {
        std::vector<std::string> out;
        for (auto const& token: tokenize(text))
        {
            if (!is_word_byte(static_cast<unsigned char>(token.text.front())))
                continue;
            std::string lower = token.text;
            for (auto& c: lower)
                c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            if (!stopwords().contains(lower))
                out.push_back(std::move(lower));
        }
        return out;
    }

    std::map<std::string, double> term_frequencies(std::string_view text)
    {
        std::map<std::string, double> tf;
        for (auto& t: terms(text))
            tf[t] += 1.0;
        return tf;
    }

    double log_tf(double count) { return 1.0 + std::log(count); }

    void normalize(std::vector<double>& v)
    {
        auto const norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
        if (!(norm > 0.0) || !std::isfinite(norm))
            throw Error(Errc::EmbeddingEndpointError, "embedding endpoint returned a zero or non-finite vector");
        for (auto& x: v)
            x /= norm;
    }

    std::vector<std::vector<double>> embed_checked(EmbeddingClient& client, std::vector<std::string> const& texts, std::size_t dim)
    {
        std::vector<std::vector<double>> vectors;
        try
        {
            vectors = client.embed(texts, dim);
        }
        catch (Error const&)
        {
            throw;
        }
        catch (std::exception const& e)
        {
            throw Error(Errc::EmbeddingEndpointError, e.what());
        }
        if (vectors.size() != texts.size())
            throw Error(Errc::EmbeddingEndpointError, fmt::format("asked for {} embeddings, got {}", texts.size(), vectors.size()));
        for (auto& v: vectors)
        {
            if (v.size() != dim)
                throw Error(Errc::EmbeddingEndpointError, fmt::format("embedding has {} dimensions, expected {}", v.size(), dim));
            normalize(v);
        }
        return vectors;
    }
} // namespace

void RetrievalConfig::validate() const
{
    if (chunk_size == 0 || overlap >= chunk_size)
        throw Error(Errc::InvalidArgument, fmt::format("chunk overlap {} must be smaller than chunk size {}", overlap, chunk_size));
    if (max_chunks == 0)
        throw Error(Errc::InvalidArgument, "max_chunks must be at least 1");
    if (embedding_dim == 0)
        throw Error(Errc::InvalidArgument, "embedding dimension must be positive");
}

std::vector<Token> tokenize(std::string_view text)
{
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < text.size())
    {
        auto const c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c))
        {
            ++i;
            continue;
        }
        auto const start = i;
        if (is_word_byte(c))
            while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i])))
                ++i;
        else
            ++i;
        tokens.push_back({ std::string(text.substr(start, i - start)), start, i });
    }
    return tokens;
}

std::vector<DocumentChunk> chunk_document(std::string_view text, RetrievalConfig const& config, std::string_view source)
{
    config.validate();
    auto const tokens = tokenize(text);
    if (tokens.empty())
        throw Error(Errc::EmptyDocument, fmt::format("document '{}' has no tokens", source));

    auto const stride = config.chunk_size - config.overlap;
    std::vector<DocumentChunk> chunks;
    for (std::size_t start = 0; start < tokens.size(); start += stride)
    {
        auto const end = std::min(start + config.chunk_size, tokens.size());
        DocumentChunk chunk;
        chunk.id = chunks.size();
        chunk.ordinal = chunks.size();
        chunk.source = std::string(source);
        chunk.token_offset = start;
        chunk.token_count = end - start;
        chunk.text = std::string(text.substr(tokens[start].begin, tokens[end - 1].end - tokens[start].begin));
        chunks.push_back(std::move(chunk));
    }
    return chunks;
}

RetrievalIndex index(std::vector<DocumentChunk> chunks, RetrievalConfig const& config, EmbeddingClient* embedder)
{
    config.validate();
    if (chunks.empty())
        throw Error(Errc::EmptyIndex, "nothing to index");

    RetrievalIndex idx;
    idx._config = config;
    idx._chunks = std::move(chunks);

    if (config.backend == RetrievalBackend::Embedding)
    {
        if (!embedder)
            throw Error(Errc::ConfigError, "embedding backend selected without an embedding client");
        idx._embedder = embedder;
        constexpr std::size_t batch = 64;
        for (std::size_t i = 0; i < idx._chunks.size(); i += batch)
        {
            std::vector<std::string> texts;
            for (auto j = i; j < std::min(i + batch, idx._chunks.size()); ++j)
                texts.push_back(idx._chunks[j].text);
            for (auto& v: embed_checked(*embedder, texts, config.embedding_dim))
                idx._vectors.push_back(std::move(v));
        }
        return idx;
    }

    std::vector<std::map<std::string, double>> tfs;
    std::map<std::string, double> df;
    for (auto const& chunk: idx._chunks)
    {
        tfs.push_back(term_frequencies(chunk.text));
        for (auto const& [term, _]: tfs.back())
            df[term] += 1.0;
    }
    auto const n = static_cast<double>(idx._chunks.size());
    for (auto const& [term, count]: df)
        idx._idf[term] = std::log((n + 1.0) / (count + 1.0)) + 1.0;
    for (auto const& tf: tfs)
    {
        std::map<std::string, double> weights;
        double norm2 = 0.0;
        for (auto const& [term, count]: tf)
        {
            auto const w = log_tf(count) * idx._idf[term];
            weights[term] = w;
            norm2 += w * w;
        }
        idx._weights.push_back(std::move(weights));
        idx._norms.push_back(std::sqrt(norm2));
    }
    return idx;
}

std::vector<ScoredChunk> retrieve(std::string_view query, RetrievalIndex const& idx, std::size_t k)
{
    if (idx.size() == 0)
        throw Error(Errc::EmptyIndex, "retrieval index is empty");
    if (k > idx._config.max_chunks)
        throw Error(Errc::InvalidArgument, fmt::format("k = {} exceeds the configured maximum of {} chunks", k, idx._config.max_chunks));

    std::vector<double> scores(idx.size(), 0.0);
    if (idx._config.backend == RetrievalBackend::Embedding)
    {
        auto const q = embed_checked(*idx._embedder, { std::string(query) }, idx._config.embedding_dim).front();
        for (std::size_t i = 0; i < idx.size(); ++i)
            scores[i] = std::inner_product(q.begin(), q.end(), idx._vectors[i].begin(), 0.0);
    }
    else
    {
        std::map<std::string, double> q;
        double q_norm2 = 0.0;
        for (auto const& [term, count]: term_frequencies(query))
        {
            auto const it = idx._idf.find(term);
            if (it == idx._idf.end())
                continue; // unseen terms cannot match any chunk
            auto const w = log_tf(count) * it->second;
            q[term] = w;
            q_norm2 += w * w;
        }
        if (q_norm2 > 0.0)
        {
            for (std::size_t i = 0; i < idx.size(); ++i)
            {
                double dot = 0.0;
                for (auto const& [term, w]: q)
                    if (auto const it = idx._weights[i].find(term); it != idx._weights[i].end())
                        dot += w * it->second;
                if (idx._norms[i] > 0.0)
                    scores[i] = dot / (std::sqrt(q_norm2) * idx._norms[i]);
            }
        }
    }

    std::vector<std::size_t> order(idx.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    order.resize(std::min(k, order.size()));

    std::vector<ScoredChunk> out;
    for (auto i: order)
        out.push_back({ idx._chunks[i], scores[i] });
    return out;
}

HttpEmbeddingClient::HttpEmbeddingClient(std::string base_url, std::string api_key, std::string model):
    _base_url(std::move(base_url)), _api_key(std::move(api_key)), _model(std::move(model))
{
}

std::vector<std::vector<double>> HttpEmbeddingClient::embed(std::vector<std::string> const& texts, std::size_t dimensions)
{
    nlohmann::json body { { "model", _model }, { "input", texts }, { "dimensions", dimensions } };
    std::vector<std::pair<std::string, std::string>> headers;
    if (!_api_key.empty())
        headers.emplace_back("Authorization", "Bearer " + _api_key);

    http::Response response;
    try
    {
        response = http::post_json(_base_url, "/embeddings", body.dump(), headers, std::chrono::seconds(60));
    }
    catch (std::exception const& e)
    {
        throw Error(Errc::EmbeddingEndpointError, e.what());
    }
    if (response.status != 200)
        throw Error(Errc::EmbeddingEndpointError, fmt::format("embedding endpoint returned HTTP {}: {}", response.status, response.body.substr(0, 500)));

    try
    {
        auto const json = nlohmann::json::parse(response.body);
        std::vector<std::vector<double>> out(texts.size());
        for (auto const& item: json.at("data"))
        {
            auto const i = item.value("index", std::size_t { 0 });
            if (i >= out.size())
                throw Error(Errc::EmbeddingEndpointError, "embedding index out of range");
            out[i] = item.at("embedding").get<std::vector<double>>();
        }
        return out;
    }
    catch (nlohmann::json::exception const& e)
    {
        throw Error(Errc::EmbeddingEndpointError, fmt::format("malformed embedding response: {}", e.what()));
    }
}

} // namespace spiceagent
