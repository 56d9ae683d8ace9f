#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "domrisk/fingerprint.hpp"

namespace domrisk {

/// Page-bundle archive line: {url, status, headers, cookies, body,
/// resource_urls, fetched_at}. headers/cookies are arrays of [name, value]
/// pairs; fetched_at is RFC 3339. One JSON object per line.
nlohmann::json bundle_to_json(const PageBundle& page);
PageBundle bundle_from_json(const nlohmann::json& doc);

void save_bundle_archive(const std::string& path, const std::vector<PageBundle>& pages);
std::vector<PageBundle> load_bundle_archive(const std::string& path);

}  // namespace domrisk
