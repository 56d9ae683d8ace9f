#include "domrisk/fetchers.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <ctime>
#include <filesystem>

#include "domrisk/bundle_io.hpp"
#include "domrisk/http_client.hpp"

namespace domrisk {

namespace {

Timestamp now_utc() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    return Timestamp{CivilDate{tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday},
                     tm.tm_hour, tm.tm_min, tm.tm_sec};
}

}  // namespace

std::string RecordedFetcher::key(const std::string& url) {
    auto parsed = parse_url(url);
    return parsed ? parsed->str() : url;
}

void RecordedFetcher::add_page(PageBundle page) {
    pages_[key(page.url)] = std::move(page);
}

void RecordedFetcher::load_archive(const std::string& path) {
    for (auto& page : load_bundle_archive(path)) add_page(std::move(page));
}

void RecordedFetcher::load_corpus_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw DomriskError("corpus directory not found: " + dir);
    std::vector<fs::path> archives;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".jsonl") archives.push_back(entry.path());
    std::sort(archives.begin(), archives.end());
    for (const auto& path : archives) load_archive(path.string());
}

PageBundle RecordedFetcher::fetch(const std::string& url) {
    auto it = pages_.find(key(url));
    if (it == pages_.end()) throw FetchError("url not in recorded corpus: " + url);
    return it->second;
}

HttpFetcher::HttpFetcher(std::chrono::milliseconds timeout, std::string user_agent)
    : timeout_(timeout), user_agent_(std::move(user_agent)) {}

PageBundle HttpFetcher::fetch(const std::string& url) {
    auto parsed = parse_url(url);
    if (!parsed) throw FetchError("unparseable url: " + url);

    httplib::Client client(parsed->origin());
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout_));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout_));
    client.set_follow_location(true);
    client.enable_server_certificate_verification(false);

    std::string target = parsed->path;
    if (!parsed->query.empty()) target += "?" + parsed->query;
    auto res = client.Get(target, {{"User-Agent", user_agent_}});
    if (!res) throw FetchError("transport failure for " + url + ": " + httplib::to_string(res.error()));

    PageBundle page;
    page.url = url;
    page.status = res->status;
    for (const auto& [name, value] : res->headers) {
        if (iequals(name, "Set-Cookie")) {
            // "name=value; attr; attr" -> (name, value)
            std::string first = split(value, ';')[0];
            size_t eq = first.find('=');
            if (eq != std::string::npos)
                page.cookies.push_back({trim(first.substr(0, eq)), trim(first.substr(eq + 1))});
        }
        page.headers.push_back({name, value});
    }
    page.body = res->body;
    page.resource_urls = extract_resource_urls(page.body, *parsed);
    page.fetched_at = now_utc();
    return page;
}

WaybackFetcher::WaybackFetcher(CdxClient& cdx, Fetcher& inner, CivilDate query_date,
                               std::string archive_prefix)
    : cdx_(cdx), inner_(inner), query_date_(query_date),
      archive_prefix_(std::move(archive_prefix)) {}

PageBundle WaybackFetcher::fetch(const std::string& url) {
    std::optional<CdxRow> snapshot;
    try {
        snapshot = select_snapshot(url, query_date_, cdx_);
    } catch (const CdxTransportError& e) {
        throw FetchError(std::string("snapshot index failure: ") + e.what());
    }
    if (!snapshot)
        throw FetchError("no snapshot of " + url + " before " + format_date(query_date_));
    // "id_" requests the unmodified capture body
    std::string archived = archive_prefix_ + format_cdx_timestamp(snapshot->timestamp) + "id_/" +
                           snapshot->original;
    PageBundle page = inner_.fetch(archived);
    page.url = url;
    page.fetched_at = snapshot->timestamp;
    return page;
}

std::string http_get_json(const std::string& endpoint,
                          const std::vector<std::pair<std::string, std::string>>& params) {
    auto parsed = parse_url(endpoint);
    if (!parsed) throw CdxTransportError("unparseable endpoint: " + endpoint);
    httplib::Client client(parsed->origin());
    client.set_follow_location(true);
    client.enable_server_certificate_verification(false);
    httplib::Params p;
    for (const auto& [k, v] : params) p.emplace(k, v);
    auto res = client.Get(parsed->path, p, httplib::Headers{});
    if (!res)
        throw CdxTransportError("transport failure for " + endpoint + ": " +
                                httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
        throw CdxTransportError("endpoint " + endpoint + " returned status " +
                                std::to_string(res->status));
    return res->body;
}

}  // namespace domrisk
