// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace spiceagent
{

enum class Role
{
    System,
    User,
    Assistant,
    Tool,
};

std::string_view role_name(Role role) noexcept;
Role role_from_name(std::string_view name);

struct ToolCall
{
    std::string id;
    std::string name;
    /// Raw JSON text exactly as the model produced it; parsed when the tool runs
    /// so that malformed arguments can be reported back instead of aborting.
    std::string arguments;

    bool operator==(ToolCall const&) const = default;
};

struct ToolResult
{
    std::string id;
    std::string content;
    bool success = true;

    bool operator==(ToolResult const&) const = default;
};

struct ChatMessage
{
    Role role = Role::User;
    std::string content;
    std::vector<ToolCall> tool_calls;
    std::optional<std::string> tool_call_id;

    bool operator==(ChatMessage const&) const = default;

    static ChatMessage system(std::string text) { return { Role::System, std::move(text), {}, std::nullopt }; }
    static ChatMessage user(std::string text) { return { Role::User, std::move(text), {}, std::nullopt }; }
    static ChatMessage assistant(std::string text, std::vector<ToolCall> calls = {})
    {
        return { Role::Assistant, std::move(text), std::move(calls), std::nullopt };
    }
    static ChatMessage tool(ToolResult const& result) { return { Role::Tool, result.content, {}, result.id }; }
};

struct ToolParameter
{
    std::string name;
    std::string type; ///< JSON schema type: "string", "integer", "number"
    std::string description;
    bool required = true;
    std::vector<std::string> allowed; ///< optional enum
};

struct ToolSpec
{
    std::string name;
    std::string description;
    std::vector<ToolParameter> parameters;
};

struct SamplingParams
{
    double temperature = 1.0;
    double top_p = 1.0;
};

/// One assistant turn.
struct AssistantReply
{
    std::string content;
    std::vector<ToolCall> tool_calls;

    bool has_tool_calls() const noexcept { return !tool_calls.empty(); }
};

class LlmClient
{
  public:
    virtual ~LlmClient() = default;
    /// Throws Error(EndpointError) when no reply can be obtained.
    virtual AssistantReply complete(std::vector<ChatMessage> const& messages,
                                    std::vector<ToolSpec> const& tools,
                                    SamplingParams const& sampling) = 0;
};

// Wire format (chat-completions with function tools).
nlohmann::json to_json(ChatMessage const& message);
ChatMessage message_from_json(nlohmann::json const& json);
nlohmann::json to_json(ToolSpec const& spec);
nlohmann::json transcript_to_json(std::vector<ChatMessage> const& transcript);
std::vector<ChatMessage> transcript_from_json(nlohmann::json const& json);

/// Replays canned assistant turns, one per call.
///
/// File format:
///   { "turns": [ { "content": "...", "tool_calls": [ { "id": "c1", "name": "...", "arguments": { ... } } ] } ],
///     "repeat_last": false }
/// `arguments` may be an object or a raw string (which is passed through verbatim).
class ScriptedClient final: public LlmClient
{
  public:
    explicit ScriptedClient(std::vector<AssistantReply> turns, bool repeat_last = false);
    static ScriptedClient from_json(nlohmann::json const& json);
    static ScriptedClient from_file(std::filesystem::path const& path);

    AssistantReply complete(std::vector<ChatMessage> const& messages,
                            std::vector<ToolSpec> const& tools,
                            SamplingParams const& sampling) override;

    std::size_t consumed() const noexcept { return _next; }

  private:
    std::vector<AssistantReply> _turns;
    bool _repeat_last;
    std::size_t _next = 0;
};

struct HttpClientConfig
{
    std::string base_url;   ///< e.g. "https://api.openai.com/v1"
    std::string api_key;    ///< taken from the environment, never from flags
    std::string model = "gpt-4o";
    std::chrono::seconds timeout { 120 };
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff { 500 };
};

/// Chat-completions endpoint client with bounded retry and exponential backoff
/// on transport failures, HTTP 429 and 5xx.
class HttpChatClient final: public LlmClient
{
  public:
    explicit HttpChatClient(HttpClientConfig config);

    AssistantReply complete(std::vector<ChatMessage> const& messages,
                            std::vector<ToolSpec> const& tools,
                            SamplingParams const& sampling) override;

    /// Request body for the given turn; exposed for tests.
    nlohmann::json request_body(std::vector<ChatMessage> const& messages,
                                std::vector<ToolSpec> const& tools,
                                SamplingParams const& sampling) const;
    static AssistantReply parse_response(std::string const& body);

  private:
    HttpClientConfig _config;
};

} // namespace spiceagent
