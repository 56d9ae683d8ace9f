#include <doctest.h>

#include <set>

#include "domrisk/bundle_io.hpp"
#include "domrisk/crawler.hpp"
#include "domrisk/fetchers.hpp"
#include "test_support.hpp"

using namespace domrisk;
using domrisk::test::make_page;
using domrisk::test::small_taxonomy;

namespace {

Ruleset tiny_ruleset() {
    auto doc = nlohmann::json::parse(R"({
        "Nginx": {"cats": [8], "headers": {"server": "nginx(?:/([\\d.]+))?\\;version:\\1"}},
        "TrackPixel": {"cats": [3], "html": "trackpixel\\.js"}
    })");
    static Taxonomy taxonomy = small_taxonomy();
    return load_ruleset(doc, taxonomy);
}

CrawlPolicy fast_policy(uint64_t seed = 42) {
    CrawlPolicy policy;
    policy.per_request_delay = std::chrono::milliseconds(1);
    policy.rng_seed = seed;
    return policy;
}

PageBundle site_page(const std::string& url, int status, const std::string& body) {
    auto page = make_page(url, status, body);
    page.headers.push_back({"server", "nginx/1.22.1"});
    return page;
}

// A synthetic site: homepage linking to /p1.../pN, each subpage linking
// onward, plus a privacy page.
RecordedFetcher make_site(const std::string& domain, int n_pages, bool with_privacy_anchor) {
    RecordedFetcher fetcher;
    std::string origin = "https://" + domain;
    std::string home_body = "<html><body>";
    for (int i = 1; i <= std::min(n_pages, 10); ++i)
        home_body += "<a href=\"/p" + std::to_string(i) + "\">page " + std::to_string(i) + "</a>";
    if (with_privacy_anchor) home_body += "<a href=\"/legal/privacy\">Privacy notice</a>";
    home_body += "</body></html>";
    fetcher.add_page(site_page(origin + "/", 200, home_body));

    for (int i = 1; i <= n_pages; ++i) {
        std::string body = "<html><body>";
        for (int j = 1; j <= 4; ++j) {
            int target = (i * 4 + j) % n_pages + 1;
            body += "<a href=\"/p" + std::to_string(target) + "\">next</a>";
        }
        body += "</body></html>";
        fetcher.add_page(site_page(origin + "/p" + std::to_string(i), 200, body));
    }
    if (with_privacy_anchor)
        fetcher.add_page(site_page(origin + "/legal/privacy", 200, "<html>privacy</html>"));
    fetcher.add_page(site_page(origin + "/privacy-policy", 200, "<html>policy</html>"));
    return fetcher;
}

}  // namespace

TEST_CASE("build_url_variants: bare domain yields four ordered variants") {
    auto variants = build_url_variants("example.com");
    CHECK(variants == std::vector<std::string>{
                          "https://example.com/", "https://www.example.com/",
                          "http://example.com/", "http://www.example.com/"});
}

TEST_CASE("build_url_variants: www domain yields two variants") {
    auto variants = build_url_variants("www.example.com");
    CHECK(variants == std::vector<std::string>{"https://www.example.com/",
                                               "http://www.example.com/"});
}

TEST_CASE("build_url_variants: invalid domain is an error") {
    CHECK_THROWS_AS(build_url_variants("not a domain"), DomriskError);
    CHECK_THROWS_AS(build_url_variants("https://example.com"), DomriskError);
    CHECK_THROWS_AS(build_url_variants("nodots"), DomriskError);
}

TEST_CASE("registrable_domain: public-suffix aware") {
    CHECK(registrable_domain("www.example.com") == "example.com");
    CHECK(registrable_domain("a.b.example.co.uk") == "example.co.uk");
    CHECK(registrable_domain("example.com") == "example.com");
    CHECK(registrable_domain("shop.example.com.au") == "example.com.au");
}

TEST_CASE("select_links: at most 3 random links from one page") {
    auto page = make_page("https://example.com/", 200, [] {
        std::string body;
        for (int i = 0; i < 10; ++i)
            body += "<a href=\"/page" + std::to_string(i) + "\">link</a>";
        return body;
    }());
    CrawlState state("example.com", 7);
    auto links = select_links(page, state, fast_policy());
    CHECK(links.size() == 3);
    CHECK(state.random_links_taken == 3);
    for (const auto& url : links) CHECK(url.rfind("https://example.com/page", 0) == 0);
}

TEST_CASE("select_links: privacy links bypass an exhausted random budget") {
    auto page = make_page("https://example.com/", 200,
                          "<a href=\"/privacy-policy\">Privacy</a>"
                          "<a href=\"/about\">About</a>");
    CrawlState state("example.com", 7);
    state.random_links_taken = 9;  // site budget spent
    auto links = select_links(page, state, fast_policy());
    CHECK(links == std::vector<std::string>{"https://example.com/privacy-policy"});
    CHECK(state.privacy_links_taken == 1);
}

TEST_CASE("select_links: anchor text can mark a privacy link") {
    auto page = make_page("https://example.com/", 200,
                          "<a href=\"/legal\">Our Privacy promise</a>");
    CrawlState state("example.com", 7);
    state.random_links_taken = 9;
    auto links = select_links(page, state, fast_policy());
    CHECK(links == std::vector<std::string>{"https://example.com/legal"});
}

TEST_CASE("select_links: external-only pages yield nothing") {
    auto page = make_page("https://example.com/", 200,
                          "<a href=\"https://other.org/x\">ext</a>"
                          "<a href=\"mailto:hi@example.com\">mail</a>");
    CrawlState state("example.com", 7);
    CHECK(select_links(page, state, fast_policy()).empty());
}

TEST_CASE("select_links: unparseable body yields nothing") {
    auto page = make_page("https://example.com/", 200, "<<<>>> not html at all");
    CrawlState state("example.com", 7);
    CHECK(select_links(page, state, fast_policy()).empty());
}

TEST_CASE("crawl_site: minimal success over a one-page site") {
    RecordedFetcher fetcher;
    fetcher.add_page(site_page("https://solo.example/", 200, "<html>hi</html>"));
    auto rs = tiny_ruleset();
    auto result = crawl_site("solo.example", fetcher, rs, fast_policy());
    CHECK(result.success);
    CHECK(result.entry_url == "https://solo.example/");
    CHECK(!result.detections.empty());
    // homepage + attempted privacy fallbacks (missing from corpus)
    CHECK(result.pages.size() == 1);
    CHECK(result.fetch_failures.size() == 2);
    CHECK_FALSE(result.has_privacy_page);
}

TEST_CASE("crawl_site: blocked site fails") {
    RecordedFetcher fetcher;
    for (const auto& v : build_url_variants("blocked.example"))
        fetcher.add_page(make_page(v, 403, "forbidden"));
    auto rs = tiny_ruleset();
    auto result = crawl_site("blocked.example", fetcher, rs, fast_policy());
    CHECK_FALSE(result.success);
    CHECK(result.entry_url.empty());
    CHECK(result.pages.size() == 4);  // all variants probed
}

TEST_CASE("crawl_site: no technologies means no success") {
    RecordedFetcher fetcher;
    fetcher.add_page(make_page("https://plain.example/", 200, "<html>empty</html>"));
    auto rs = tiny_ruleset();
    auto result = crawl_site("plain.example", fetcher, rs, fast_policy());
    CHECK_FALSE(result.success);
    CHECK(result.detections.empty());
}

TEST_CASE("crawl_site: transport failure on every variant records causes") {
    RecordedFetcher fetcher;  // empty corpus: everything is a transport error
    auto rs = tiny_ruleset();
    auto result = crawl_site("gone.example", fetcher, rs, fast_policy());
    CHECK_FALSE(result.success);
    CHECK(result.pages.empty());
    CHECK(result.fetch_failures.size() == 4);
}

TEST_CASE("crawl_site: second variant succeeds when the first is an error page") {
    RecordedFetcher fetcher;
    fetcher.add_page(site_page("https://two.example/", 500, "oops"));
    fetcher.add_page(site_page("https://www.two.example/", 200, "<html>ok</html>"));
    auto rs = tiny_ruleset();
    auto result = crawl_site("two.example", fetcher, rs, fast_policy());
    CHECK(result.success);
    CHECK(result.entry_url == "https://www.two.example/");
}

TEST_CASE("crawl_site: budgets bound the page count on a 50-page site") {
    auto fetcher = make_site("big.example", 50, true);
    auto rs = tiny_ruleset();
    auto policy = fast_policy(11);
    auto result = crawl_site("big.example", fetcher, rs, policy);
    REQUIRE(result.success);

    size_t bound = 1 + static_cast<size_t>(policy.max_random_links) +
                   static_cast<size_t>(policy.max_privacy_links) +
                   policy.privacy_fallback_paths.size() +
                   build_url_variants("big.example").size();
    CHECK(result.pages.size() + result.fetch_failures.size() <= bound);
    CHECK(result.has_privacy_page);

    // no URL fetched twice
    std::set<std::string> urls;
    for (const auto& page : result.pages) CHECK(urls.insert(page.url).second);

    // only same-registrable-domain URLs after the entry page
    for (const auto& page : result.pages)
        CHECK(registrable_domain(parse_url(page.url)->host) == "big.example");
}

TEST_CASE("crawl_site: deterministic for a fixed seed and fetcher") {
    auto rs = tiny_ruleset();
    auto run = [&] {
        auto fetcher = make_site("det.example", 30, true);
        return crawl_site("det.example", fetcher, rs, fast_policy(99));
    };
    auto a = run();
    auto b = run();
    REQUIRE(a.pages.size() == b.pages.size());
    for (size_t i = 0; i < a.pages.size(); ++i) CHECK(a.pages[i].url == b.pages[i].url);
    REQUIRE(a.detections.size() == b.detections.size());
    for (size_t i = 0; i < a.detections.size(); ++i)
        CHECK(a.detections[i].technology == b.detections[i].technology);
    CHECK(a.success == b.success);
    CHECK(a.has_privacy_page == b.has_privacy_page);

    auto c = [&] {
        auto fetcher = make_site("det.example", 30, true);
        return crawl_site("det.example", fetcher, rs, fast_policy(100));
    }();
    // different seed may pick different random pages; both stay in budget
    CHECK(c.pages.size() <= 1 + 9 + 9 + 2 + 4);
}

TEST_CASE("bundle archive round-trips bit-exactly") {
    auto page = site_page("https://round.example/", 200, "<html>\"quoted\" & unicode é</html>");
    page.cookies.push_back({"session", "abc123"});
    page.resource_urls.push_back("https://round.example/app.js");

    auto doc = bundle_to_json(page);
    auto restored = bundle_from_json(doc);
    CHECK(bundle_to_json(restored) == doc);
    CHECK(restored.url == page.url);
    CHECK(restored.body == page.body);
    CHECK(restored.headers == page.headers);
    CHECK(restored.cookies == page.cookies);

    // file-level round trip
    std::string path = "/tmp/domrisk_test_archive.jsonl";
    save_bundle_archive(path, {page, page});
    auto loaded = load_bundle_archive(path);
    REQUIRE(loaded.size() == 2);
    CHECK(bundle_to_json(loaded[0]) == doc);
}

TEST_CASE("bundle archive rejects out-of-range status") {
    auto doc = bundle_to_json(make_page("https://x.example/", 200, ""));
    doc["status"] = 700;
    CHECK_THROWS_AS(bundle_from_json(doc), DomriskError);
}
