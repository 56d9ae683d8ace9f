#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace domrisk {

struct Url {
    std::string scheme;  // lowercase, "http" or "https"
    std::string host;    // lowercase
    std::string port;    // empty when default
    std::string path;    // begins with '/', "/" for the root
    std::string query;   // without '?', may be empty

    std::string origin() const;
    std::string str() const;
};

std::optional<Url> parse_url(std::string_view url);

/// Resolves an href against a base page URL. Fragments are stripped;
/// non-http(s) schemes (mailto:, javascript:, ...) yield nullopt.
std::optional<std::string> resolve_href(const Url& base, std::string_view href);

/// Registrable domain (eTLD+1) of a host. Public-suffix aware for a
/// builtin set of common multi-label suffixes (co.uk, com.au, ...);
/// defaults to the last two labels otherwise.
std::string registrable_domain(std::string_view host);

/// Syntactic check for a bare registrable domain name (no scheme):
/// dot-separated LDH labels with an alphabetic TLD.
bool valid_domain_name(std::string_view domain);

struct Anchor {
    std::string href;
    std::string text;
};

/// Scans an HTML document for <a href=...> anchors.
std::vector<Anchor> extract_anchors(const std::string& body);

/// Scripts, stylesheets and frames referenced by the document, resolved
/// against the page URL.
std::vector<std::string> extract_resource_urls(const std::string& body, const Url& page);

}  // namespace domrisk
