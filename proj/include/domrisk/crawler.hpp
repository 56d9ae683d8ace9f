#pragma once

#include <chrono>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "domrisk/fingerprint.hpp"
#include "domrisk/rng.hpp"
#include "domrisk/url.hpp"

namespace domrisk {

/// Transport-level fetch failure (DNS, connect, timeout, missing corpus
/// entry). HTTP error statuses are not transport failures; they come back
/// as ordinary PageBundles.
class FetchError : public std::runtime_error {
public:
    explicit FetchError(const std::string& msg) : std::runtime_error(msg) {}
};

class Fetcher {
public:
    virtual ~Fetcher() = default;
    virtual PageBundle fetch(const std::string& url) = 0;
};

struct CrawlPolicy {
    int max_random_links = 9;
    int max_links_per_page = 3;
    int max_privacy_links = 9;
    std::vector<std::string> privacy_fallback_paths = {"/privacy-policy", "/privacy"};
    std::chrono::milliseconds per_request_delay{1};
    std::chrono::milliseconds fetch_timeout{10000};
    uint64_t rng_seed = 0;

    void validate() const;
};

struct FetchFailure {
    std::string url;
    std::string cause;
};

struct CrawlResult {
    std::string domain;
    std::vector<PageBundle> pages;
    DetectionSet detections;
    bool success = false;
    bool has_privacy_page = false;
    std::string entry_url;  // the URL variant that succeeded; empty if none
    Timestamp started_at;
    Timestamp finished_at;
    std::vector<FetchFailure> fetch_failures;  // transport-level, one per failed URL
};

/// Homepage URL variants in fixed order: HTTPS before HTTP, bare host
/// before "www." host (the prefix pair is skipped when the domain already
/// starts with "www.").
std::vector<std::string> build_url_variants(const std::string& domain);

/// Mutable per-site crawl bookkeeping shared by select_links calls.
struct CrawlState {
    std::string site_domain;  // registrable domain of the entry URL
    std::set<std::string> seen;
    std::set<std::string> privacy_candidates;  // URLs enqueued via the privacy rule
    int random_links_taken = 0;
    int privacy_links_taken = 0;
    Rng rng;

    CrawlState(std::string domain, uint64_t seed)
        : site_domain(std::move(domain)), rng(seed) {}
};

/// Link-selection heuristics for one fetched page: same-registrable-domain
/// links only; links whose URL or anchor text contains "privacy" fill a
/// separate budget; at most max_links_per_page random picks per page under
/// the site-wide max_random_links budget.
std::vector<std::string> select_links(const PageBundle& page, CrawlState& state,
                                      const CrawlPolicy& policy);

CrawlResult crawl_site(const std::string& domain, Fetcher& fetcher, const Ruleset& ruleset,
                       const CrawlPolicy& policy);

}  // namespace domrisk
