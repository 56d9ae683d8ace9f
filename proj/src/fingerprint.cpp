#include "domrisk/fingerprint.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>

namespace domrisk {

const char* source_kind_name(SourceKind kind) {
    switch (kind) {
        case SourceKind::Header: return "header-name";
        case SourceKind::Cookie: return "cookie-name";
        case SourceKind::Html: return "html";
        case SourceKind::ScriptSrc: return "script-src";
        case SourceKind::Meta: return "meta-name";
        case SourceKind::Url: return "url";
        case SourceKind::Implied: return "implied";
    }
    return "?";
}

namespace {

// Pattern kinds that require executing page scripts; detection skips them.
const std::set<std::string>& runtime_probe_keys() {
    static const std::set<std::string> kKeys = {"js", "dom", "xhr", "probe"};
    return kKeys;
}

FingerprintPattern compile_pattern(const std::string& rule_name, const std::string& raw) {
    FingerprintPattern p;
    p.raw = raw;
    // directives are appended as "\;key:value" segments after the regex
    std::string body = raw;
    size_t pos = body.find("\\;");
    if (pos != std::string::npos) {
        p.regex_text = body.substr(0, pos);
        size_t cur = pos;
        while (cur != std::string::npos) {
            size_t next = body.find("\\;", cur + 2);
            std::string directive = body.substr(cur + 2, next == std::string::npos
                                                             ? std::string::npos
                                                             : next - cur - 2);
            if (directive.rfind("version:", 0) == 0)
                p.version_template = directive.substr(8);
            cur = next;
        }
    } else {
        p.regex_text = body;
    }
    try {
        p.re = std::regex(p.regex_text, std::regex::ECMAScript | std::regex::icase |
                                            std::regex::optimize);
    } catch (const std::regex_error& e) {
        throw DomriskError("rule '" + rule_name + "': pattern '" + p.regex_text +
                           "' does not compile: " + e.what());
    }
    return p;
}

std::vector<FingerprintPattern> parse_pattern_list(const std::string& rule_name,
                                                   const nlohmann::json& value,
                                                   bool* was_scalar) {
    std::vector<FingerprintPattern> out;
    if (value.is_string()) {
        *was_scalar = true;
        out.push_back(compile_pattern(rule_name, value.get<std::string>()));
    } else if (value.is_array()) {
        *was_scalar = false;
        for (const auto& item : value) {
            if (!item.is_string())
                throw DomriskError("rule '" + rule_name + "': pattern entries must be strings");
            out.push_back(compile_pattern(rule_name, item.get<std::string>()));
        }
    } else {
        throw DomriskError("rule '" + rule_name + "': patterns must be a string or string array");
    }
    return out;
}

std::vector<NamedPattern> parse_named_patterns(const std::string& rule_name,
                                               const nlohmann::json& value) {
    if (!value.is_object())
        throw DomriskError("rule '" + rule_name + "': named patterns must be an object");
    std::vector<NamedPattern> out;
    for (const auto& [name, pat] : value.items()) {
        if (!pat.is_string())
            throw DomriskError("rule '" + rule_name + "': pattern for '" + name +
                               "' must be a string");
        out.push_back(NamedPattern{name, compile_pattern(rule_name, pat.get<std::string>())});
    }
    // nlohmann iterates objects in key order already; keep explicit anyway
    std::sort(out.begin(), out.end(),
              [](const NamedPattern& a, const NamedPattern& b) { return a.name < b.name; });
    return out;
}

std::string apply_version_template(const std::string& tmpl, const std::smatch& m) {
    std::string out;
    for (size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] == '\\' && i + 1 < tmpl.size() && tmpl[i + 1] >= '1' && tmpl[i + 1] <= '9') {
            size_t group = static_cast<size_t>(tmpl[i + 1] - '0');
            if (group < m.size() && m[group].matched) out += m[group].str();
            ++i;
        } else {
            out += tmpl[i];
        }
    }
    return out;
}

nlohmann::json dump_pattern_list(const std::vector<FingerprintPattern>& patterns,
                                 bool was_scalar) {
    if (was_scalar && patterns.size() == 1) return patterns[0].raw;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : patterns) arr.push_back(p.raw);
    return arr;
}

}  // namespace

std::string normalize_version(const std::string& captured) {
    std::string s = trim(captured);
    if (!s.empty() && (s[0] == 'v' || s[0] == 'V')) s.erase(0, 1);
    size_t i = 0;
    std::string out;
    while (i < s.size()) {
        size_t start = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (i == start) break;  // component must have at least one digit
        out.append(s, start, i - start);
        if (i < s.size() && s[i] == '.' && i + 1 < s.size() &&
            std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
            out += '.';
            ++i;
        } else {
            break;
        }
    }
    return out;
}

Ruleset load_ruleset(const nlohmann::json& doc, const Taxonomy& taxonomy) {
    if (!doc.is_object()) throw DomriskError("ruleset document must be a JSON object");
    Ruleset rs;
    for (const auto& [tech_name, body] : doc.items()) {
        if (tech_name.empty()) throw DomriskError("ruleset contains a rule with an empty name");
        if (!body.is_object())
            throw DomriskError("rule '" + tech_name + "': body must be an object");
        TechRule rule;
        rule.name = tech_name;
        for (const auto& [key, value] : body.items()) {
            if (key == "cats") {
                if (!value.is_array())
                    throw DomriskError("rule '" + tech_name + "': 'cats' must be an int array");
                rule.cats_in_doc = true;
                for (const auto& c : value) {
                    if (!c.is_number_integer())
                        throw DomriskError("rule '" + tech_name + "': 'cats' must be an int array");
                    rule.category_ids.push_back(c.get<int>());
                }
            } else if (key == "headers") {
                rule.headers = parse_named_patterns(tech_name, value);
            } else if (key == "cookies") {
                rule.cookies = parse_named_patterns(tech_name, value);
            } else if (key == "meta") {
                rule.metas = parse_named_patterns(tech_name, value);
            } else if (key == "html") {
                rule.html = parse_pattern_list(tech_name, value, &rule.html_scalar);
            } else if (key == "scriptSrc") {
                rule.script_src = parse_pattern_list(tech_name, value, &rule.script_src_scalar);
            } else if (key == "url") {
                rule.url = parse_pattern_list(tech_name, value, &rule.url_scalar);
            } else if (key == "implies") {
                if (value.is_string()) {
                    rule.implies_scalar = true;
                    rule.implies.push_back(value.get<std::string>());
                } else if (value.is_array()) {
                    for (const auto& t : value) {
                        if (!t.is_string())
                            throw DomriskError("rule '" + tech_name +
                                               "': 'implies' entries must be strings");
                        rule.implies.push_back(t.get<std::string>());
                    }
                } else {
                    throw DomriskError("rule '" + tech_name +
                                       "': 'implies' must be a string or string array");
                }
            } else {
                if (runtime_probe_keys().count(key)) {
                    rs.warnings_.push_back("rule '" + tech_name + "': pattern kind '" + key +
                                           "' requires script execution and is ignored");
                }
                rule.extras[key] = value;
            }
        }
        for (int cat : rule.category_ids) {
            if (!taxonomy.has_category(cat))
                throw DomriskError("rule '" + tech_name + "': category id " +
                                   std::to_string(cat) + " is not in the taxonomy");
        }
        rs.rules_.push_back(std::move(rule));
    }
    std::sort(rs.rules_.begin(), rs.rules_.end(),
              [](const TechRule& a, const TechRule& b) { return a.name < b.name; });
    for (size_t i = 0; i < rs.rules_.size(); ++i) rs.index_[rs.rules_[i].name] = i;
    for (const auto& rule : rs.rules_) {
        for (const auto& target : rule.implies) {
            if (!rs.index_.count(target))
                throw DomriskError("rule '" + rule.name + "' implies unknown technology '" +
                                   target + "'");
        }
    }
    return rs;
}

Ruleset load_ruleset_file(const std::string& path, const Taxonomy& taxonomy) {
    std::ifstream in(path);
    if (!in) throw DomriskError("cannot open ruleset file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DomriskError("ruleset file " + path + " is not valid JSON: " + e.what());
    }
    return load_ruleset(doc, taxonomy);
}

const TechRule* Ruleset::find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &rules_[it->second];
}

nlohmann::json Ruleset::to_json() const {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& rule : rules_) {
        nlohmann::json body = rule.extras;
        if (rule.cats_in_doc) body["cats"] = rule.category_ids;
        auto emit_named = [&](const char* key, const std::vector<NamedPattern>& pats) {
            if (pats.empty()) return;
            nlohmann::json obj = nlohmann::json::object();
            for (const auto& np : pats) obj[np.name] = np.pattern.raw;
            body[key] = obj;
        };
        emit_named("headers", rule.headers);
        emit_named("cookies", rule.cookies);
        emit_named("meta", rule.metas);
        if (!rule.html.empty()) body["html"] = dump_pattern_list(rule.html, rule.html_scalar);
        if (!rule.script_src.empty())
            body["scriptSrc"] = dump_pattern_list(rule.script_src, rule.script_src_scalar);
        if (!rule.url.empty()) body["url"] = dump_pattern_list(rule.url, rule.url_scalar);
        if (!rule.implies.empty()) {
            if (rule.implies_scalar && rule.implies.size() == 1)
                body["implies"] = rule.implies[0];
            else
                body["implies"] = rule.implies;
        }
        doc[rule.name] = body;
    }
    return doc;
}

namespace {

struct MatchState {
    bool matched = false;
    std::string version;
    std::vector<Evidence> evidence;

    void note(const PageBundle& bundle, SourceKind kind) {
        matched = true;
        Evidence ev{bundle.url, kind};
        if (std::find(evidence.begin(), evidence.end(), ev) == evidence.end())
            evidence.push_back(ev);
    }
};

void try_pattern(const FingerprintPattern& pattern, const std::string& subject,
                 const PageBundle& bundle, SourceKind kind, MatchState& state) {
    std::smatch m;
    if (!std::regex_search(subject, m, pattern.re)) return;
    state.note(bundle, kind);
    if (state.version.empty() && !pattern.version_template.empty()) {
        state.version = normalize_version(apply_version_template(pattern.version_template, m));
    }
}

// Meta tags pulled out of the document with a light scan; attribute order
// within the tag does not matter.
struct MetaTag {
    std::string name;
    std::string content;
};

std::vector<MetaTag> extract_meta_tags(const std::string& body) {
    static const std::regex tag_re("<meta\\s+[^>]*>",
                                   std::regex::ECMAScript | std::regex::icase);
    static const std::regex name_re("(?:name|property)\\s*=\\s*[\"']([^\"']*)[\"']",
                                    std::regex::ECMAScript | std::regex::icase);
    static const std::regex content_re("content\\s*=\\s*[\"']([^\"']*)[\"']",
                                       std::regex::ECMAScript | std::regex::icase);
    std::vector<MetaTag> tags;
    auto begin = std::sregex_iterator(body.begin(), body.end(), tag_re);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        std::string tag = it->str();
        std::smatch nm, cm;
        if (std::regex_search(tag, nm, name_re) && std::regex_search(tag, cm, content_re))
            tags.push_back(MetaTag{nm[1].str(), cm[1].str()});
    }
    return tags;
}

}  // namespace

DetectionSet detect(const PageBundle& bundle, const Ruleset& ruleset) {
    DetectionSet out;
    const std::vector<MetaTag> meta_tags = extract_meta_tags(bundle.body);

    for (const auto& rule : ruleset.rules()) {
        MatchState state;
        for (const auto& np : rule.headers)
            for (const auto& [hname, hvalue] : bundle.headers)
                if (iequals(hname, np.name))
                    try_pattern(np.pattern, hvalue, bundle, SourceKind::Header, state);
        for (const auto& np : rule.cookies)
            for (const auto& [cname, cvalue] : bundle.cookies)
                if (iequals(cname, np.name))
                    try_pattern(np.pattern, cvalue, bundle, SourceKind::Cookie, state);
        for (const auto& p : rule.html)
            try_pattern(p, bundle.body, bundle, SourceKind::Html, state);
        for (const auto& p : rule.script_src)
            for (const auto& src : bundle.resource_urls)
                try_pattern(p, src, bundle, SourceKind::ScriptSrc, state);
        for (const auto& np : rule.metas)
            for (const auto& tag : meta_tags)
                if (iequals(tag.name, np.name))
                    try_pattern(np.pattern, tag.content, bundle, SourceKind::Meta, state);
        for (const auto& p : rule.url)
            try_pattern(p, bundle.url, bundle, SourceKind::Url, state);

        if (state.matched) {
            Detection d;
            d.technology = rule.name;
            if (!state.version.empty()) d.versions.push_back(state.version);
            d.category_ids = rule.category_ids;
            d.sources = std::move(state.evidence);
            out.push_back(std::move(d));
        }
    }

    // transitive implies closure; visited set guards against cycles
    std::set<std::string> present;
    for (const auto& d : out) present.insert(d.technology);
    std::deque<std::string> frontier(present.begin(), present.end());
    while (!frontier.empty()) {
        std::string name = frontier.front();
        frontier.pop_front();
        const TechRule* rule = ruleset.find(name);
        if (!rule) continue;
        for (const auto& implied : rule->implies) {
            if (present.count(implied)) continue;
            present.insert(implied);
            frontier.push_back(implied);
            const TechRule* implied_rule = ruleset.find(implied);
            Detection d;
            d.technology = implied;
            d.category_ids = implied_rule ? implied_rule->category_ids : std::vector<int>{};
            d.sources.push_back(Evidence{bundle.url, SourceKind::Implied});
            out.push_back(std::move(d));
        }
    }

    std::sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
        return a.technology < b.technology;
    });
    return out;
}

DetectionSet merge_detections(const std::vector<DetectionSet>& per_page) {
    std::map<std::string, Detection> merged;
    for (const auto& set : per_page) {
        for (const auto& d : set) {
            auto [it, inserted] = merged.try_emplace(d.technology, d);
            if (inserted) continue;
            Detection& tgt = it->second;
            for (const auto& v : d.versions)
                if (std::find(tgt.versions.begin(), tgt.versions.end(), v) == tgt.versions.end())
                    tgt.versions.push_back(v);
            tgt.sources.insert(tgt.sources.end(), d.sources.begin(), d.sources.end());
        }
    }
    DetectionSet out;
    out.reserve(merged.size());
    for (auto& [name, d] : merged) {
        std::sort(d.versions.begin(), d.versions.end());
        out.push_back(std::move(d));
    }
    return out;
}

const Detection* find_detection(const DetectionSet& set, const std::string& technology) {
    auto it = std::lower_bound(set.begin(), set.end(), technology,
                               [](const Detection& d, const std::string& name) {
                                   return d.technology < name;
                               });
    return (it != set.end() && it->technology == technology) ? &*it : nullptr;
}

}  // namespace domrisk
