#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "domrisk/crawler.hpp"
#include "domrisk/dates.hpp"
#include "domrisk/features.hpp"
#include "domrisk/sector.hpp"

namespace domrisk {

enum class IncidentSource { VcdbLike, RansomwareLike, Other };

const char* incident_source_name(IncidentSource source);
IncidentSource incident_source_from(const std::string& name);

struct IncidentRecord {
    std::string raw_id;
    std::string organization_name;
    IncidentSource source = IncidentSource::Other;
    CivilDate incident_date;
};

/// Incident CSV: raw_id,organization_name,source,incident_date(ISO-8601).
std::vector<IncidentRecord> load_incident_csv(const std::string& path);

/// Tranco-style ranked list CSV: rank,domain.
std::vector<std::string> load_ranked_domains(const std::string& path);

/// Iterative longest-common-substring similarity on casefolded,
/// whitespace-collapsed names: repeatedly extract the longest common
/// substring of length >= 3 (splitting the remainders), then divide the
/// total matched length by the shorter name's length.
double name_similarity(const std::string& a, const std::string& b);

struct DomainMapping {
    IncidentRecord incident;
    std::string domain;
    std::string landing_url;
    std::string extracted_name;
    double similarity = 0.0;
    bool needs_review = false;
};

/// Mapping attempt outcome; `error` is set (and mapping absent) for the
/// rare organizations without a usable search result.
struct MappingOutcome {
    std::optional<DomainMapping> mapping;
    std::string error;
};

struct SearchResult {
    std::string url;
    int rank = 0;
};

class SearchClient {
public:
    virtual ~SearchClient() = default;
    /// Ranked results, best first.
    virtual std::vector<SearchResult> search(const std::string& query) = 0;
};

/// Deterministic search stub backed by a query -> URL list map
/// (exact match on the normalized query).
class StubSearchClient : public SearchClient {
public:
    void add(const std::string& query, std::vector<std::string> urls);
    static StubSearchClient from_json_file(const std::string& path);
    std::vector<SearchResult> search(const std::string& query) override;

private:
    std::map<std::string, std::vector<std::string>> results_;
};

class OrgNameExtractor {
public:
    virtual ~OrgNameExtractor() = default;
    virtual std::string extract(const PageBundle& landing_page) = 0;
};

/// Deterministic extractor over page content: page title and copyright
/// notice first, then OpenGraph site name/title, meta description, and
/// finally the first heading.
class PageContentNameExtractor : public OrgNameExtractor {
public:
    std::string extract(const PageBundle& landing_page) override;
};

class StubNameExtractor : public OrgNameExtractor {
public:
    explicit StubNameExtractor(std::map<std::string, std::string> by_url_substring)
        : by_url_(std::move(by_url_substring)) {}
    std::string extract(const PageBundle& landing_page) override;

private:
    std::map<std::string, std::string> by_url_;
};

struct MappingConfig {
    std::vector<std::string> directory_blocklist = {"wikipedia", "linkedin", "bloomberg",
                                                    "facebook", "instagram"};
    double review_threshold = 0.9;
};

/// Search for the organization, skip directory results, crawl the landing
/// page, infer the name back and score it against the cited name.
MappingOutcome map_incident_to_domain(const IncidentRecord& incident, SearchClient& search,
                                      Fetcher& fetcher, OrgNameExtractor& extractor,
                                      const MappingConfig& config = {});

/// Seeded uniform sample of n domains without replacement.
std::vector<std::string> sample_negatives(const std::vector<std::string>& ranked_domains,
                                          size_t n, uint64_t rng_seed);

/// Keeps domains whose crawl succeeded and reached a privacy page.
std::vector<std::string> filter_negatives(const std::vector<CrawlResult>& crawls);

struct LabeledSample {
    std::string domain;
    int label = 0;
    std::string source;
    CivilDate reference_date;
    std::optional<std::string> sector;
    FeatureVector vector;
};

struct LabeledDataset {
    std::vector<LabeledSample> rows;
    std::string schema_hash;
};

struct PositiveInput {
    std::string domain;
    IncidentSource source = IncidentSource::Other;
    CivilDate reference_date;  // incident date
};

struct NegativeInput {
    std::string domain;
    CivilDate reference_date;  // sampled date
};

/// Joins labels with vectors: deduplicates positive domains (earliest
/// incident wins), resolves positive/negative conflicts in favor of the
/// positive (logged), vectorizes each domain's merged detections and
/// attaches sector one-hots when the schema carries sector slots.
LabeledDataset assemble_dataset(const std::vector<PositiveInput>& positives,
                                const std::vector<NegativeInput>& negatives,
                                const std::map<std::string, DetectionSet>& detections_by_domain,
                                const FeatureSchema& schema,
                                const std::map<std::string, std::string>& sectors = {},
                                std::vector<std::string>* log = nullptr);

/// Dataset CSV: domain,label,source,reference_date,sector.
void save_dataset_csv(const std::string& path, const LabeledDataset& dataset,
                      const std::string& manifest_line = {});
/// Loads labels and joins vectors from a matrix file.
LabeledDataset load_dataset_csv(const std::string& path, const std::string& matrix_path,
                                const FeatureSchema& schema);

}  // namespace domrisk
