// SPDX-License-Identifier: Apache-2.0
#include <spiceagent/error.hpp>
#include <spiceagent/llm.hpp>

#include "http.hpp"

#include <fmt/format.h>

#include <fstream>
#include <thread>

namespace spiceagent
{

using nlohmann::json;

std::string_view role_name(Role role) noexcept
{
    switch (role)
    {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
        case Role::Tool: return "tool";
    }
    return "user";
}

Role role_from_name(std::string_view name)
{
    if (name == "system")
        return Role::System;
    if (name == "user")
        return Role::User;
    if (name == "assistant")
        return Role::Assistant;
    if (name == "tool")
        return Role::Tool;
    throw Error(Errc::EndpointError, fmt::format("unknown message role '{}'", name));
}

json to_json(ChatMessage const& message)
{
    json j { { "role", role_name(message.role) } };
    if (message.role == Role::Assistant && message.content.empty() && !message.tool_calls.empty())
        j["content"] = nullptr;
    else
        j["content"] = message.content;
    if (!message.tool_calls.empty())
    {
        auto calls = json::array();
        for (auto const& call: message.tool_calls)
            calls.push_back({ { "id", call.id },
                              { "type", "function" },
                              { "function", { { "name", call.name }, { "arguments", call.arguments } } } });
        j["tool_calls"] = std::move(calls);
    }
    if (message.tool_call_id)
        j["tool_call_id"] = *message.tool_call_id;
    return j;
}

namespace
{
    std::vector<ToolCall> calls_from_json(json const& array)
    {
        std::vector<ToolCall> calls;
        for (auto const& c: array)
        {
            ToolCall call;
            call.id = c.value("id", std::string {});
            auto const& fn = c.contains("function") ? c.at("function") : c;
            call.name = fn.at("name").get<std::string>();
            if (fn.contains("arguments"))
            {
                auto const& args = fn.at("arguments");
                call.arguments = args.is_string() ? args.get<std::string>() : args.dump();
            }
            else
                call.arguments = "{}";
            calls.push_back(std::move(call));
        }
        return calls;
    }
} // namespace

ChatMessage message_from_json(json const& j)
{
    ChatMessage m;
    m.role = role_from_name(j.at("role").get<std::string>());
    if (j.contains("content") && j.at("content").is_string())
        m.content = j.at("content").get<std::string>();
    if (j.contains("tool_calls") && j.at("tool_calls").is_array())
        m.tool_calls = calls_from_json(j.at("tool_calls"));
    if (j.contains("tool_call_id") && j.at("tool_call_id").is_string())
        m.tool_call_id = j.at("tool_call_id").get<std::string>();
    return m;
}

json to_json(ToolSpec const& spec)
{
    json properties = json::object();
    auto required = json::array();
    for (auto const& p: spec.parameters)
    {
        json prop { { "type", p.type }, { "description", p.description } };
        if (!p.allowed.empty())
            prop["enum"] = p.allowed;
        properties[p.name] = std::move(prop);
        if (p.required)
            required.push_back(p.name);
    }
    return { { "type", "function" },
             { "function",
               { { "name", spec.name },
                 { "description", spec.description },
                 { "parameters", { { "type", "object" }, { "properties", properties }, { "required", required } } } } } };
}

json transcript_to_json(std::vector<ChatMessage> const& transcript)
{
    auto out = json::array();
    for (auto const& m: transcript)
        out.push_back(to_json(m));
    return out;
}

std::vector<ChatMessage> transcript_from_json(json const& j)
{
    std::vector<ChatMessage> out;
    for (auto const& m: j)
        out.push_back(message_from_json(m));
    return out;
}

// ---------------------------------------------------------------------------

ScriptedClient::ScriptedClient(std::vector<AssistantReply> turns, bool repeat_last):
    _turns(std::move(turns)), _repeat_last(repeat_last)
{
}

ScriptedClient ScriptedClient::from_json(json const& j)
{
    std::vector<AssistantReply> turns;
    try
    {
        std::size_t auto_id = 0;
        for (auto const& t: j.at("turns"))
        {
            AssistantReply reply;
            reply.content = t.value("content", std::string {});
            if (t.contains("tool_calls"))
            {
                reply.tool_calls = calls_from_json(t.at("tool_calls"));
                for (auto& call: reply.tool_calls)
                    if (call.id.empty())
                        call.id = fmt::format("call_{}", ++auto_id);
            }
            turns.push_back(std::move(reply));
        }
        return ScriptedClient(std::move(turns), j.value("repeat_last", false));
    }
    catch (json::exception const& e)
    {
        throw Error(Errc::ConfigError, fmt::format("invalid script: {}", e.what()));
    }
}

ScriptedClient ScriptedClient::from_file(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::ConfigError, fmt::format("cannot open script '{}'", path.string()));
    try
    {
        return from_json(json::parse(in));
    }
    catch (json::parse_error const& e)
    {
        throw Error(Errc::ConfigError, fmt::format("script '{}' is not valid JSON: {}", path.string(), e.what()));
    }
}

AssistantReply ScriptedClient::complete(std::vector<ChatMessage> const&, std::vector<ToolSpec> const&, SamplingParams const&)
{
    if (_next < _turns.size())
        return _turns[_next++];
    if (_repeat_last && !_turns.empty())
    {
        ++_next;
        auto reply = _turns.back();
        for (auto& call: reply.tool_calls)
            call.id = fmt::format("{}_{}", call.id, _next);
        return reply;
    }
    throw Error(Errc::EndpointError, fmt::format("script exhausted after {} turns", _turns.size()));
}

// ---------------------------------------------------------------------------

HttpChatClient::HttpChatClient(HttpClientConfig config): _config(std::move(config))
{
    if (_config.base_url.empty())
        throw Error(Errc::ConfigError, "LLM endpoint base URL is not set");
    if (_config.max_attempts < 1)
        throw Error(Errc::ConfigError, "max_attempts must be at least 1");
}

json HttpChatClient::request_body(std::vector<ChatMessage> const& messages,
                                  std::vector<ToolSpec> const& tools,
                                  SamplingParams const& sampling) const
{
    json body { { "model", _config.model },
                { "messages", transcript_to_json(messages) },
                { "temperature", sampling.temperature },
                { "top_p", sampling.top_p } };
    if (!tools.empty())
    {
        auto t = json::array();
        for (auto const& spec: tools)
            t.push_back(to_json(spec));
        body["tools"] = std::move(t);
    }
    return body;
}

AssistantReply HttpChatClient::parse_response(std::string const& body)
{
    try
    {
        auto const j = json::parse(body);
        auto const& message = j.at("choices").at(0).at("message");
        AssistantReply reply;
        if (message.contains("content") && message.at("content").is_string())
            reply.content = message.at("content").get<std::string>();
        if (message.contains("tool_calls") && message.at("tool_calls").is_array())
            reply.tool_calls = calls_from_json(message.at("tool_calls"));
        return reply;
    }
    catch (json::exception const& e)
    {
        throw Error(Errc::EndpointError, fmt::format("malformed chat completion: {}", e.what()));
    }
}

AssistantReply HttpChatClient::complete(std::vector<ChatMessage> const& messages,
                                        std::vector<ToolSpec> const& tools,
                                        SamplingParams const& sampling)
{
    auto const body = request_body(messages, tools, sampling).dump();
    std::vector<std::pair<std::string, std::string>> headers;
    if (!_config.api_key.empty())
    {
        headers.emplace_back("Authorization", "Bearer " + _config.api_key);
        headers.emplace_back("api-key", _config.api_key);
    }

    std::string last_error;
    auto backoff = _config.initial_backoff;
    for (int attempt = 1; attempt <= _config.max_attempts; ++attempt)
    {
        try
        {
            auto const response = http::post_json(_config.base_url, "/chat/completions", body, headers, _config.timeout);
            if (response.status == 200)
                return parse_response(response.body);
            last_error = fmt::format("HTTP {}: {}", response.status, response.body.substr(0, 500));
            bool const transient = response.status == 429 || response.status >= 500;
            if (!transient)
                break;
        }
        catch (Error const&)
        {
            throw;
        }
        catch (std::exception const& e)
        {
            last_error = e.what();
        }
        if (attempt < _config.max_attempts)
        {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    throw Error(Errc::EndpointError, fmt::format("chat endpoint failed: {}", last_error));
}

} // namespace spiceagent
