// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace spiceagent::http
{

struct Response
{
    int status = 0;
    std::string body;
};

/// POSTs a JSON body to `base_url` + `path`. Throws std::runtime_error on transport failure;
/// HTTP error statuses are returned to the caller.
Response post_json(std::string const& base_url,
                   std::string const& path,
                   std::string const& body,
                   std::vector<std::pair<std::string, std::string>> const& headers,
                   std::chrono::seconds timeout);

} // namespace spiceagent::http
