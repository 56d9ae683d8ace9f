#pragma once

#include <chrono>
#include <string>
#include <unordered_map>

#include "domrisk/crawler.hpp"
#include "domrisk/snapshot.hpp"

namespace domrisk {

/// Replays page-bundle archives; the offline path for tests and reruns.
class RecordedFetcher : public Fetcher {
public:
    RecordedFetcher() = default;

    void add_page(PageBundle page);
    void load_archive(const std::string& path);
    /// Loads every *.jsonl archive under a corpus directory.
    void load_corpus_dir(const std::string& dir);

    PageBundle fetch(const std::string& url) override;
    size_t size() const { return pages_.size(); }

private:
    static std::string key(const std::string& url);
    std::unordered_map<std::string, PageBundle> pages_;
};

/// Live fetcher over HTTP(S). Parses Set-Cookie headers into the bundle's
/// cookie list and extracts referenced resource URLs from the body.
class HttpFetcher : public Fetcher {
public:
    explicit HttpFetcher(std::chrono::milliseconds timeout = std::chrono::milliseconds(10000),
                         std::string user_agent = "domrisk-crawler/0.1");
    PageBundle fetch(const std::string& url) override;

private:
    std::chrono::milliseconds timeout_;
    std::string user_agent_;
};

/// Serves the most recent archived capture strictly before query_date,
/// delegating retrieval of the archived body to an inner fetcher. The
/// returned bundle keeps the original URL.
class WaybackFetcher : public Fetcher {
public:
    WaybackFetcher(CdxClient& cdx, Fetcher& inner, CivilDate query_date,
                   std::string archive_prefix = "https://web.archive.org/web/");
    PageBundle fetch(const std::string& url) override;

private:
    CdxClient& cdx_;
    Fetcher& inner_;
    CivilDate query_date_;
    std::string archive_prefix_;
};

}  // namespace domrisk
