#include "domrisk/crawler.hpp"

#include <algorithm>
#include <ctime>
#include <deque>
#include <thread>

namespace domrisk {

namespace {

Timestamp now_utc() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    Timestamp ts;
    ts.date = CivilDate{tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday};
    ts.hour = tm.tm_hour;
    ts.minute = tm.tm_min;
    ts.second = tm.tm_sec;
    return ts;
}

}  // namespace

void CrawlPolicy::validate() const {
    if (max_random_links < 0 || max_links_per_page < 0 || max_privacy_links < 0)
        throw DomriskError("crawl policy counts must be >= 0");
    if (per_request_delay.count() <= 0 || fetch_timeout.count() <= 0)
        throw DomriskError("crawl policy delay and timeout must be > 0");
}

std::vector<std::string> build_url_variants(const std::string& domain) {
    std::string d = to_lower(trim(domain));
    if (!valid_domain_name(d)) throw DomriskError("invalid domain name: '" + domain + "'");
    if (d.rfind("www.", 0) == 0) return {"https://" + d + "/", "http://" + d + "/"};
    return {"https://" + d + "/", "https://www." + d + "/", "http://" + d + "/",
            "http://www." + d + "/"};
}

std::vector<std::string> select_links(const PageBundle& page, CrawlState& state,
                                      const CrawlPolicy& policy) {
    auto base = parse_url(page.url);
    if (!base) return {};

    struct Candidate {
        std::string url;
        bool privacy;
    };
    std::vector<Candidate> candidates;
    std::set<std::string> on_page;
    for (const auto& anchor : extract_anchors(page.body)) {
        auto resolved = resolve_href(*base, anchor.href);
        if (!resolved) continue;
        auto u = parse_url(*resolved);
        if (!u || registrable_domain(u->host) != state.site_domain) continue;
        if (state.seen.count(*resolved) || !on_page.insert(*resolved).second) continue;
        bool privacy = contains_ci(*resolved, "privacy") || contains_ci(anchor.text, "privacy");
        candidates.push_back(Candidate{*resolved, privacy});
    }

    std::vector<std::string> picked;
    std::vector<std::string> random_pool;
    for (const auto& c : candidates) {
        if (c.privacy && state.privacy_links_taken < policy.max_privacy_links) {
            picked.push_back(c.url);
            state.seen.insert(c.url);
            state.privacy_candidates.insert(c.url);
            ++state.privacy_links_taken;
        } else if (!c.privacy) {
            random_pool.push_back(c.url);
        }
    }

    int budget = std::min(policy.max_links_per_page,
                          policy.max_random_links - state.random_links_taken);
    if (budget > 0 && !random_pool.empty()) {
        size_t k = std::min(static_cast<size_t>(budget), random_pool.size());
        for (size_t idx : state.rng.sample_indices(random_pool.size(), k)) {
            picked.push_back(random_pool[idx]);
            state.seen.insert(random_pool[idx]);
            ++state.random_links_taken;
        }
    }
    return picked;
}

CrawlResult crawl_site(const std::string& domain, Fetcher& fetcher, const Ruleset& ruleset,
                       const CrawlPolicy& policy) {
    policy.validate();
    CrawlResult result;
    result.domain = to_lower(trim(domain));
    result.started_at = now_utc();

    auto variants = build_url_variants(result.domain);
    CrawlState state(registrable_domain(result.domain), policy.rng_seed);

    std::vector<DetectionSet> per_page;
    auto fetch_one = [&](const std::string& url, bool privacy_candidate) -> const PageBundle* {
        std::this_thread::sleep_for(policy.per_request_delay);
        PageBundle page;
        try {
            page = fetcher.fetch(url);
        } catch (const FetchError& e) {
            result.fetch_failures.push_back(FetchFailure{url, e.what()});
            return nullptr;
        }
        result.pages.push_back(std::move(page));
        const PageBundle& stored = result.pages.back();
        per_page.push_back(detect(stored, ruleset));
        if (privacy_candidate && stored.status < 400) result.has_privacy_page = true;
        return &stored;
    };

    const PageBundle* entry = nullptr;
    for (const auto& variant : variants) {
        state.seen.insert(variant);
        const PageBundle* page = fetch_one(variant, false);
        if (page && page->status < 400) {
            entry = page;
            result.entry_url = variant;
            break;
        }
    }

    if (entry) {
        std::deque<std::string> queue;
        for (const auto& url : select_links(*entry, state, policy)) queue.push_back(url);

        auto origin = parse_url(result.entry_url);
        for (const auto& path : policy.privacy_fallback_paths) {
            std::string url = origin->origin() + path;
            if (state.seen.insert(url).second) {
                state.privacy_candidates.insert(url);
                queue.push_back(url);
            }
        }

        while (!queue.empty()) {
            std::string url = queue.front();
            queue.pop_front();
            const PageBundle* page = fetch_one(url, state.privacy_candidates.count(url) > 0);
            if (page && page->status < 400)
                for (const auto& next : select_links(*page, state, policy)) queue.push_back(next);
        }
    }

    result.detections = merge_detections(per_page);
    bool any_ok = std::any_of(result.pages.begin(), result.pages.end(),
                              [](const PageBundle& p) { return p.status < 400; });
    result.success = any_ok && !result.detections.empty();
    result.finished_at = now_utc();
    return result;
}

}  // namespace domrisk
