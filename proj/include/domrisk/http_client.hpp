#pragma once

#include <string>
#include <utility>
#include <vector>

namespace domrisk {

/// GET <endpoint>?<params> and return the response body. Throws
/// CdxTransportError wrapped as std::runtime_error on transport failure
/// or non-2xx status. Thin wrapper so only one translation unit pulls in
/// the HTTP library.
std::string http_get_json(const std::string& endpoint,
                          const std::vector<std::pair<std::string, std::string>>& params);

}  // namespace domrisk
