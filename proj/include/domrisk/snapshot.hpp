#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "domrisk/dates.hpp"

namespace domrisk {

/// Index row of an archived capture: [urlkey, timestamp, original,
/// mimetype, statuscode, digest, length].
struct CdxRow {
    std::string urlkey;
    Timestamp timestamp;
    std::string original;
    std::string mimetype;
    int statuscode = 0;  // 0 when the index reports "-"
    std::string digest;
    long long length = 0;
};

/// Transport failure talking to the snapshot index; retryable, distinct
/// from "no snapshot exists".
class CdxTransportError : public std::runtime_error {
public:
    explicit CdxTransportError(const std::string& msg) : std::runtime_error(msg) {}
};

class CdxClient {
public:
    virtual ~CdxClient() = default;
    /// All index rows for the exact URL. Throws CdxTransportError on
    /// transport failure.
    virtual std::vector<CdxRow> query(const std::string& url) = 0;
};

/// Most recent capture strictly before query_date (captures dated on
/// query_date itself are excluded). Absent when nothing qualifies.
std::optional<CdxRow> select_snapshot(const std::string& url, const CivilDate& query_date,
                                      CdxClient& cdx);

/// Reference date for a non-incident sample: uniform day in
/// [max(earliest_snapshot, floor), ceiling]. Errors when the window is empty.
CivilDate negative_reference_date(const CivilDate& earliest_snapshot, uint64_t rng_seed,
                                  const CivilDate& floor = CivilDate{2022, 1, 1},
                                  const CivilDate& ceiling = CivilDate{2023, 12, 31});

/// In-memory index used by tests and offline runs.
class StubCdxClient : public CdxClient {
public:
    void add(const std::string& url, CdxRow row) { rows_[url].push_back(std::move(row)); }
    void set_fail(bool fail) { fail_ = fail; }
    std::vector<CdxRow> query(const std::string& url) override {
        if (fail_) throw CdxTransportError("stub transport failure");
        auto it = rows_.find(url);
        return it == rows_.end() ? std::vector<CdxRow>{} : it->second;
    }

private:
    std::map<std::string, std::vector<CdxRow>> rows_;
    bool fail_ = false;
};

/// Talks to a CDX-style HTTP endpoint returning JSON row arrays.
class HttpCdxClient : public CdxClient {
public:
    explicit HttpCdxClient(std::string endpoint) : endpoint_(std::move(endpoint)) {}
    std::vector<CdxRow> query(const std::string& url) override;

private:
    std::string endpoint_;
};

}  // namespace domrisk
