#pragma once

#include <map>
#include <optional>
#include <regex>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "domrisk/dates.hpp"
#include "domrisk/taxonomy.hpp"
#include "domrisk/util.hpp"

namespace domrisk {

enum class SourceKind { Header, Cookie, Html, ScriptSrc, Meta, Url, Implied };

const char* source_kind_name(SourceKind kind);

/// One fingerprint pattern. `raw` keeps the document string verbatim
/// (including any "\;version:..." suffix) so rulesets round-trip.
struct FingerprintPattern {
    std::string raw;
    std::string regex_text;
    std::string version_template;  // empty when the pattern captures no version
    std::regex re;
};

struct NamedPattern {
    std::string name;  // header / cookie / meta tag name
    FingerprintPattern pattern;
};

struct TechRule {
    std::string name;
    std::vector<int> category_ids;
    std::vector<NamedPattern> headers;
    std::vector<NamedPattern> cookies;
    std::vector<NamedPattern> metas;
    std::vector<FingerprintPattern> html;
    std::vector<FingerprintPattern> script_src;
    std::vector<FingerprintPattern> url;
    std::vector<std::string> implies;

    // document fidelity: whether html/scriptSrc/url/implies were written
    // as a bare string rather than an array, and whether "cats" appeared
    bool html_scalar = false;
    bool script_src_scalar = false;
    bool url_scalar = false;
    bool implies_scalar = false;
    bool cats_in_doc = false;

    /// Keys we do not evaluate (runtime probes like "js"/"dom", plus
    /// descriptive metadata); preserved verbatim for round-tripping.
    nlohmann::json extras = nlohmann::json::object();
};

class Ruleset {
public:
    const std::vector<TechRule>& rules() const { return rules_; }
    const TechRule* find(const std::string& name) const;
    size_t size() const { return rules_.size(); }
    const std::vector<std::string>& warnings() const { return warnings_; }

    nlohmann::json to_json() const;

    friend Ruleset load_ruleset(const nlohmann::json&, const Taxonomy&);

private:
    std::vector<TechRule> rules_;  // sorted by technology name
    std::unordered_map<std::string, size_t> index_;
    std::vector<std::string> warnings_;
};

/// One fetched page.
struct PageBundle {
    std::string url;
    int status = 0;
    std::vector<std::pair<std::string, std::string>> headers;  // multimap semantics
    std::vector<std::pair<std::string, std::string>> cookies;
    std::string body;
    std::vector<std::string> resource_urls;  // scripts, stylesheets, frames
    Timestamp fetched_at;
};

struct Evidence {
    std::string page_url;
    SourceKind kind = SourceKind::Html;

    bool operator==(const Evidence&) const = default;
};

struct Detection {
    std::string technology;
    /// Distinct normalized versions, sorted. detect() fills at most one;
    /// merged site-level sets may carry several.
    std::vector<std::string> versions;
    std::vector<int> category_ids;
    std::vector<Evidence> sources;
};

/// Detections sorted by technology name.
using DetectionSet = std::vector<Detection>;

/// Validates and compiles a ruleset document. Throws DomriskError naming
/// the offending rule on malformed entries, regexes that do not compile,
/// dangling implies targets, or category ids absent from the taxonomy.
Ruleset load_ruleset(const nlohmann::json& doc, const Taxonomy& taxonomy);
Ruleset load_ruleset_file(const std::string& path, const Taxonomy& taxonomy);

/// Runs every rule against one page. Pure; no match yields an empty set.
DetectionSet detect(const PageBundle& bundle, const Ruleset& ruleset);

/// Site-level union of per-page detections, keyed by technology name.
/// Keeps every distinct version observed, concatenates evidence.
DetectionSet merge_detections(const std::vector<DetectionSet>& per_page);

/// Strips a leading 'v' and keeps the longest "\d+(\.\d+)*" prefix.
/// Empty result means the capture was unusable (versionless detection).
std::string normalize_version(const std::string& captured);

const Detection* find_detection(const DetectionSet& set, const std::string& technology);

}  // namespace domrisk
