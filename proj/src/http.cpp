// SPDX-License-Identifier: Apache-2.0
#include "http.hpp"

#include <httplib.h>

#include <stdexcept>

namespace spiceagent::http
{

Response post_json(std::string const& base_url,
                   std::string const& path,
                   std::string const& body,
                   std::vector<std::pair<std::string, std::string>> const& headers,
                   std::chrono::seconds timeout)
{
    // Split "scheme://host[:port]/prefix" into origin and path prefix.
    auto const scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos)
        throw std::runtime_error("endpoint URL needs a scheme: " + base_url);
    auto const path_start = base_url.find('/', scheme_end + 3);
    auto const origin = base_url.substr(0, path_start);
    auto prefix = path_start == std::string::npos ? std::string {} : base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/')
        prefix.pop_back();

    httplib::Client client(origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers hdrs;
    for (auto const& [k, v]: headers)
        hdrs.emplace(k, v);

    auto result = client.Post(prefix + path, hdrs, body, "application/json");
    if (!result)
        throw std::runtime_error("HTTP transport error: " + httplib::to_string(result.error()));
    return { result->status, result->body };
}

} // namespace spiceagent::http
