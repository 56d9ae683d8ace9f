#include "domrisk/url.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "domrisk/util.hpp"

namespace domrisk {

std::string Url::origin() const {
    std::string out = scheme + "://" + host;
    if (!port.empty()) out += ":" + port;
    return out;
}

std::string Url::str() const {
    std::string out = origin() + path;
    if (!query.empty()) out += "?" + query;
    return out;
}

std::optional<Url> parse_url(std::string_view input) {
    size_t scheme_end = input.find("://");
    if (scheme_end == std::string_view::npos) return std::nullopt;
    Url u;
    u.scheme = to_lower(input.substr(0, scheme_end));
    if (u.scheme != "http" && u.scheme != "https") return std::nullopt;
    std::string_view rest = input.substr(scheme_end + 3);
    size_t path_start = rest.find_first_of("/?#");
    std::string_view authority = rest.substr(0, path_start);
    if (authority.empty()) return std::nullopt;
    size_t colon = authority.rfind(':');
    if (colon != std::string_view::npos) {
        u.host = to_lower(authority.substr(0, colon));
        u.port = std::string(authority.substr(colon + 1));
        if ((u.scheme == "http" && u.port == "80") || (u.scheme == "https" && u.port == "443"))
            u.port.clear();
    } else {
        u.host = to_lower(authority);
    }
    if (u.host.empty()) return std::nullopt;
    if (path_start == std::string_view::npos) {
        u.path = "/";
        return u;
    }
    std::string_view tail = rest.substr(path_start);
    size_t frag = tail.find('#');
    if (frag != std::string_view::npos) tail = tail.substr(0, frag);
    size_t qmark = tail.find('?');
    if (qmark != std::string_view::npos) {
        u.query = std::string(tail.substr(qmark + 1));
        tail = tail.substr(0, qmark);
    }
    u.path = tail.empty() || tail[0] != '/' ? "/" : std::string(tail);
    return u;
}

namespace {

// Collapse "." and ".." segments.
std::string normalize_path(const std::string& path) {
    std::vector<std::string> stack;
    for (const auto& seg : split(path, '/')) {
        if (seg.empty() || seg == ".") continue;
        if (seg == "..") {
            if (!stack.empty()) stack.pop_back();
        } else {
            stack.push_back(seg);
        }
    }
    std::string out = "/";
    for (size_t i = 0; i < stack.size(); ++i) {
        out += stack[i];
        if (i + 1 < stack.size()) out += "/";
    }
    if (!path.empty() && path.back() == '/' && out.back() != '/') out += "/";
    return out;
}

}  // namespace

std::optional<std::string> resolve_href(const Url& base, std::string_view href) {
    std::string h = trim(href);
    if (h.empty() || h[0] == '#') return std::nullopt;
    size_t frag = h.find('#');
    if (frag != std::string::npos) h = h.substr(0, frag);
    if (h.empty()) return std::nullopt;

    // absolute
    if (h.find("://") != std::string::npos) {
        auto u = parse_url(h);
        if (!u) return std::nullopt;
        u->path = normalize_path(u->path);
        return u->str();
    }
    // scheme-relative
    if (h.rfind("//", 0) == 0) {
        auto u = parse_url(base.scheme + ":" + h);
        if (!u) return std::nullopt;
        u->path = normalize_path(u->path);
        return u->str();
    }
    // unsupported schemes (mailto:, javascript:, tel:, data:)
    size_t colon = h.find(':');
    size_t slash = h.find('/');
    if (colon != std::string::npos && (slash == std::string::npos || colon < slash))
        return std::nullopt;

    Url u = base;
    u.query.clear();
    if (h[0] == '/') {
        size_t q = h.find('?');
        if (q != std::string::npos) {
            u.query = h.substr(q + 1);
            h = h.substr(0, q);
        }
        u.path = normalize_path(h);
    } else {
        size_t q = h.find('?');
        std::string rel = h;
        if (q != std::string::npos) {
            u.query = rel.substr(q + 1);
            rel = rel.substr(0, q);
        }
        std::string dir = base.path.substr(0, base.path.rfind('/') + 1);
        u.path = normalize_path(dir + rel);
    }
    return u.str();
}

std::string registrable_domain(std::string_view host) {
    static const std::set<std::string> kMultiLabelSuffixes = {
        "co.uk", "org.uk", "ac.uk", "gov.uk", "me.uk",  "net.uk", "com.au", "net.au",
        "org.au", "edu.au", "gov.au", "co.jp", "ne.jp", "or.jp",  "ac.jp",  "com.br",
        "net.br", "org.br", "com.mx", "co.in", "net.in", "org.in", "co.nz",  "net.nz",
        "org.nz", "com.cn", "net.cn", "org.cn", "com.tw", "com.sg", "com.hk", "co.za",
        "org.za", "com.ar", "com.tr", "co.kr", "or.kr",  "com.co", "com.pl", "com.ru",
    };
    std::string h = to_lower(host);
    auto labels = split(h, '.');
    if (labels.size() <= 2) return h;
    std::string last2 = labels[labels.size() - 2] + "." + labels[labels.size() - 1];
    size_t keep = kMultiLabelSuffixes.count(last2) ? 3 : 2;
    if (labels.size() <= keep) return h;
    std::string out;
    for (size_t i = labels.size() - keep; i < labels.size(); ++i) {
        if (!out.empty()) out += ".";
        out += labels[i];
    }
    return out;
}

bool valid_domain_name(std::string_view domain) {
    if (domain.empty() || domain.size() > 253) return false;
    if (domain.find("://") != std::string_view::npos) return false;
    auto labels = split(std::string(domain), '.');
    if (labels.size() < 2) return false;
    for (const auto& label : labels) {
        if (label.empty() || label.size() > 63) return false;
        if (label.front() == '-' || label.back() == '-') return false;
        for (char c : label) {
            unsigned char u = static_cast<unsigned char>(c);
            if (!std::isalnum(u) && c != '-') return false;
        }
    }
    const std::string& tld = labels.back();
    return std::all_of(tld.begin(), tld.end(),
                       [](char c) { return std::isalpha(static_cast<unsigned char>(c)); }) &&
           tld.size() >= 2;
}

std::vector<Anchor> extract_anchors(const std::string& body) {
    static const std::regex anchor_re(
        "<a\\s+[^>]*href\\s*=\\s*([\"'])([^\"']*)\\1[^>]*>([\\s\\S]*?)</a>",
        std::regex::ECMAScript | std::regex::icase);
    static const std::regex tag_re("<[^>]*>");
    std::vector<Anchor> anchors;
    auto begin = std::sregex_iterator(body.begin(), body.end(), anchor_re);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        Anchor a;
        a.href = (*it)[2].str();
        a.text = trim(std::regex_replace((*it)[3].str(), tag_re, ""));
        anchors.push_back(std::move(a));
    }
    return anchors;
}

std::vector<std::string> extract_resource_urls(const std::string& body, const Url& page) {
    static const std::regex script_re("<script\\s+[^>]*src\\s*=\\s*([\"'])([^\"']*)\\1",
                                      std::regex::ECMAScript | std::regex::icase);
    static const std::regex link_re("<link\\s+[^>]*href\\s*=\\s*([\"'])([^\"']*)\\1",
                                    std::regex::ECMAScript | std::regex::icase);
    static const std::regex frame_re("<i?frame\\s+[^>]*src\\s*=\\s*([\"'])([^\"']*)\\1",
                                     std::regex::ECMAScript | std::regex::icase);
    std::vector<std::string> urls;
    auto scan = [&](const std::regex& re) {
        auto begin = std::sregex_iterator(body.begin(), body.end(), re);
        for (auto it = begin; it != std::sregex_iterator(); ++it) {
            auto resolved = resolve_href(page, (*it)[2].str());
            if (resolved) urls.push_back(*resolved);
        }
    };
    scan(script_re);
    scan(link_re);
    scan(frame_re);
    return urls;
}

}  // namespace domrisk
