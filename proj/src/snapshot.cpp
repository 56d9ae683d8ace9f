#include "domrisk/snapshot.hpp"

#include <json.hpp>

#include "domrisk/http_client.hpp"
#include "domrisk/rng.hpp"
#include "domrisk/util.hpp"

namespace domrisk {

std::optional<CdxRow> select_snapshot(const std::string& url, const CivilDate& query_date,
                                      CdxClient& cdx) {
    std::optional<CdxRow> best;
    for (const auto& row : cdx.query(url)) {
        if (!(row.timestamp.date < query_date)) continue;  // strictly before
        if (!best || best->timestamp < row.timestamp) best = row;
    }
    return best;
}

CivilDate negative_reference_date(const CivilDate& earliest_snapshot, uint64_t rng_seed,
                                  const CivilDate& floor, const CivilDate& ceiling) {
    CivilDate start = std::max(earliest_snapshot, floor);
    if (start > ceiling)
        throw DomriskError("negative reference window is empty: " + format_date(start) +
                           " is after " + format_date(ceiling));
    int64_t span = to_days(ceiling) - to_days(start);
    Rng rng(rng_seed);
    return add_days(start, static_cast<int64_t>(rng.bounded(static_cast<uint64_t>(span) + 1)));
}

std::vector<CdxRow> HttpCdxClient::query(const std::string& url) {
    std::string body = http_get_json(endpoint_, {{"url", url}, {"output", "json"}});
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw CdxTransportError("cdx endpoint returned invalid JSON: " + std::string(e.what()));
    }
    if (!doc.is_array()) throw CdxTransportError("cdx endpoint response is not an array");
    std::vector<CdxRow> rows;
    for (const auto& entry : doc) {
        if (!entry.is_array() || entry.size() < 7) continue;
        if (!entry.at(1).is_string()) continue;
        std::string ts = entry.at(1).get<std::string>();
        if (ts == "timestamp") continue;  // header row
        CdxRow row;
        row.urlkey = entry.at(0).get<std::string>();
        row.timestamp = parse_cdx_timestamp(ts);
        row.original = entry.at(2).get<std::string>();
        row.mimetype = entry.at(3).get<std::string>();
        std::string status = entry.at(4).is_string() ? entry.at(4).get<std::string>() : "";
        row.statuscode = status.empty() || status == "-" ? 0 : std::stoi(status);
        row.digest = entry.at(5).get<std::string>();
        std::string len = entry.at(6).is_string() ? entry.at(6).get<std::string>() : "0";
        row.length = len.empty() || len == "-" ? 0 : std::stoll(len);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace domrisk
