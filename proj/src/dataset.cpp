#include "domrisk/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>

#include <json.hpp>

#include "domrisk/csv.hpp"

namespace domrisk {

const char* incident_source_name(IncidentSource source) {
    switch (source) {
        case IncidentSource::VcdbLike: return "vcdb-like";
        case IncidentSource::RansomwareLike: return "ransomware-like";
        case IncidentSource::Other: return "other";
    }
    return "other";
}

IncidentSource incident_source_from(const std::string& name) {
    if (name == "vcdb-like" || name == "vcdb") return IncidentSource::VcdbLike;
    if (name == "ransomware-like" || name == "ransomware" || name == "bfsr")
        return IncidentSource::RansomwareLike;
    if (name == "other") return IncidentSource::Other;
    throw DomriskError("unknown incident source: '" + name + "'");
}

std::vector<IncidentRecord> load_incident_csv(const std::string& path) {
    std::vector<IncidentRecord> records;
    for (const auto& row : read_csv(path)) {
        if (row.size() != 4)
            throw DomriskError("incident csv rows must be raw_id,organization_name,source,date: " +
                               path);
        if (row[0] == "raw_id") continue;  // header
        IncidentRecord rec;
        rec.raw_id = row[0];
        rec.organization_name = row[1];
        if (rec.organization_name.empty())
            throw DomriskError("incident " + rec.raw_id + " has an empty organization name");
        rec.source = incident_source_from(row[2]);
        rec.incident_date = parse_date(row[3]);
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<std::string> load_ranked_domains(const std::string& path) {
    std::vector<std::string> domains;
    for (const auto& row : read_csv(path)) {
        if (row.size() != 2) throw DomriskError("ranked domain csv rows must be rank,domain: " + path);
        if (row[0] == "rank") continue;
        domains.push_back(to_lower(trim(row[1])));
    }
    return domains;
}

namespace {

struct Fragment {
    std::string text;
};

struct Match {
    size_t length = 0;
    size_t frag_a = 0, pos_a = 0;
    size_t frag_b = 0, pos_b = 0;
};

// Longest common substring over all fragment pairs; ties broken by scan
// order (fragment index, then position in a, then position in b).
std::optional<Match> longest_common(const std::vector<Fragment>& as,
                                    const std::vector<Fragment>& bs, size_t min_len) {
    Match best;
    for (size_t ia = 0; ia < as.size(); ++ia) {
        const std::string& a = as[ia].text;
        for (size_t ib = 0; ib < bs.size(); ++ib) {
            const std::string& b = bs[ib].text;
            if (a.size() < min_len || b.size() < min_len) continue;
            // dp over suffix lengths; row-compressed
            std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
            for (size_t i = 1; i <= a.size(); ++i) {
                for (size_t j = 1; j <= b.size(); ++j) {
                    cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : 0;
                    if (cur[j] < min_len || cur[j] < best.length) continue;
                    size_t pos_a = i - cur[j];
                    size_t pos_b = j - cur[j];
                    bool better = cur[j] > best.length;
                    if (!better && cur[j] == best.length) {
                        auto key = std::tuple(ia, pos_a, ib, pos_b);
                        auto best_key = std::tuple(best.frag_a, best.pos_a, best.frag_b, best.pos_b);
                        better = key < best_key;
                    }
                    if (better) best = Match{cur[j], ia, pos_a, ib, pos_b};
                }
                std::swap(prev, cur);
            }
        }
    }
    if (best.length < min_len) return std::nullopt;
    return best;
}

void remove_match(std::vector<Fragment>& frags, size_t frag_idx, size_t pos, size_t len) {
    Fragment frag = frags[frag_idx];
    std::string left = frag.text.substr(0, pos);
    std::string right = frag.text.substr(pos + len);
    frags.erase(frags.begin() + static_cast<long>(frag_idx));
    auto insert_at = frags.begin() + static_cast<long>(frag_idx);
    if (!right.empty()) insert_at = frags.insert(insert_at, Fragment{right});
    if (!left.empty()) frags.insert(insert_at, Fragment{left});
}

double similarity_on_normalized(const std::string& na, const std::string& nb) {
    std::vector<Fragment> as{Fragment{na}};
    std::vector<Fragment> bs{Fragment{nb}};
    size_t total = 0;
    for (;;) {
        auto match = longest_common(as, bs, 3);
        if (!match) break;
        total += match->length;
        remove_match(as, match->frag_a, match->pos_a, match->length);
        remove_match(bs, match->frag_b, match->pos_b, match->length);
    }
    double denom = static_cast<double>(std::min(na.size(), nb.size()));
    return std::clamp(static_cast<double>(total) / denom, 0.0, 1.0);
}

}  // namespace

double name_similarity(const std::string& a, const std::string& b) {
    std::string na = normalize_name(a);
    std::string nb = normalize_name(b);
    if (na.empty() || nb.empty())
        throw DomriskError("name_similarity requires nonempty names after normalization");
    // canonical argument order makes the greedy extraction symmetric
    if (std::tuple(na.size(), na) > std::tuple(nb.size(), nb)) std::swap(na, nb);
    return similarity_on_normalized(na, nb);
}

void StubSearchClient::add(const std::string& query, std::vector<std::string> urls) {
    results_[normalize_name(query)] = std::move(urls);
}

StubSearchClient StubSearchClient::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomriskError("cannot open search map: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DomriskError("search map " + path + " is not valid JSON: " + e.what());
    }
    StubSearchClient client;
    for (const auto& [query, urls] : doc.items())
        client.add(query, urls.get<std::vector<std::string>>());
    return client;
}

std::vector<SearchResult> StubSearchClient::search(const std::string& query) {
    auto it = results_.find(normalize_name(query));
    std::vector<SearchResult> out;
    if (it == results_.end()) return out;
    int rank = 1;
    for (const auto& url : it->second) out.push_back(SearchResult{url, rank++});
    return out;
}

namespace {

std::string strip_tags(const std::string& html) {
    static const std::regex tag_re("<[^>]*>");
    return trim(std::regex_replace(html, tag_re, " "));
}

std::string first_match(const std::string& body, const std::regex& re, size_t group = 1) {
    std::smatch m;
    if (std::regex_search(body, m, re) && group < m.size()) return trim(m[group].str());
    return {};
}

}  // namespace

std::string PageContentNameExtractor::extract(const PageBundle& page) {
    static const std::regex title_re("<title[^>]*>([\\s\\S]*?)</title>",
                                     std::regex::ECMAScript | std::regex::icase);
    static const std::regex copyright_re(
        "(?:&copy;|\\(c\\)|\u00a9)\\s*(?:\\d{4}[\\s,-]*)?([^<.\\n|]{3,80})",
        std::regex::ECMAScript | std::regex::icase);
    static const std::regex og_re(
        "<meta\\s+[^>]*property\\s*=\\s*[\"']og:(?:site_name|title)[\"'][^>]*"
        "content\\s*=\\s*[\"']([^\"']+)[\"']",
        std::regex::ECMAScript | std::regex::icase);
    static const std::regex desc_re(
        "<meta\\s+[^>]*name\\s*=\\s*[\"']description[\"'][^>]*content\\s*=\\s*[\"']([^\"']+)[\"']",
        std::regex::ECMAScript | std::regex::icase);
    static const std::regex h1_re("<h1[^>]*>([\\s\\S]*?)</h1>",
                                  std::regex::ECMAScript | std::regex::icase);

    std::string title = strip_tags(first_match(page.body, title_re));
    if (!title.empty()) {
        // trim common "Name | tagline" / "Name - tagline" suffixes
        size_t cut = title.find_first_of("|–");
        std::string head = cut == std::string::npos ? title : trim(title.substr(0, cut));
        if (head.size() >= 3) return head;
        return title;
    }
    std::string copyright = first_match(page.body, copyright_re);
    if (!copyright.empty()) return copyright;
    std::string og = first_match(page.body, og_re);
    if (!og.empty()) return og;
    std::string desc = first_match(page.body, desc_re);
    if (!desc.empty()) return desc;
    return strip_tags(first_match(page.body, h1_re));
}

std::string StubNameExtractor::extract(const PageBundle& page) {
    for (const auto& [needle, name] : by_url_)
        if (page.url.find(needle) != std::string::npos) return name;
    return {};
}

MappingOutcome map_incident_to_domain(const IncidentRecord& incident, SearchClient& search,
                                      Fetcher& fetcher, OrgNameExtractor& extractor,
                                      const MappingConfig& config) {
    MappingOutcome outcome;
    auto results = search.search(incident.organization_name);
    if (results.empty()) {
        outcome.error = "no search results for '" + incident.organization_name + "'";
        return outcome;
    }
    const SearchResult* top = nullptr;
    for (const auto& result : results) {
        auto url = parse_url(result.url);
        if (!url) continue;
        bool blocked = std::any_of(config.directory_blocklist.begin(),
                                   config.directory_blocklist.end(), [&](const std::string& token) {
                                       return contains_ci(url->host, token);
                                   });
        if (!blocked) {
            top = &result;
            break;
        }
    }
    if (!top) {
        outcome.error = "all search results blocklisted for '" + incident.organization_name + "'";
        return outcome;
    }

    PageBundle landing;
    try {
        landing = fetcher.fetch(top->url);
    } catch (const FetchError& e) {
        outcome.error = std::string("landing page fetch failed: ") + e.what();
        return outcome;
    }

    DomainMapping mapping;
    mapping.incident = incident;
    mapping.landing_url = top->url;
    mapping.domain = registrable_domain(parse_url(top->url)->host);
    mapping.extracted_name = extractor.extract(landing);
    if (normalize_name(mapping.extracted_name).empty()) {
        outcome.error = "extractor produced no organization name for " + top->url;
        return outcome;
    }
    mapping.similarity = name_similarity(incident.organization_name, mapping.extracted_name);
    mapping.needs_review = mapping.similarity < config.review_threshold;
    outcome.mapping = std::move(mapping);
    return outcome;
}

std::vector<std::string> sample_negatives(const std::vector<std::string>& ranked_domains,
                                          size_t n, uint64_t rng_seed) {
    if (n > ranked_domains.size())
        throw DomriskError("cannot sample " + std::to_string(n) + " from " +
                           std::to_string(ranked_domains.size()) + " domains");
    Rng rng(rng_seed);
    std::vector<std::string> out;
    out.reserve(n);
    for (size_t idx : rng.sample_indices(ranked_domains.size(), n))
        out.push_back(ranked_domains[idx]);
    return out;
}

std::vector<std::string> filter_negatives(const std::vector<CrawlResult>& crawls) {
    std::vector<std::string> kept;
    for (const auto& crawl : crawls)
        if (crawl.success && crawl.has_privacy_page) kept.push_back(crawl.domain);
    return kept;
}

LabeledDataset assemble_dataset(const std::vector<PositiveInput>& positives,
                                const std::vector<NegativeInput>& negatives,
                                const std::map<std::string, DetectionSet>& detections_by_domain,
                                const FeatureSchema& schema,
                                const std::map<std::string, std::string>& sectors,
                                std::vector<std::string>* log) {
    auto note = [&](const std::string& msg) {
        if (log) log->push_back(msg);
    };

    // deduplicate positives: earliest incident date wins
    std::map<std::string, PositiveInput> pos_by_domain;
    for (const auto& p : positives) {
        auto [it, inserted] = pos_by_domain.try_emplace(p.domain, p);
        if (!inserted) {
            note("domain " + p.domain + " has multiple incidents; keeping earliest date");
            if (p.reference_date < it->second.reference_date) it->second = p;
        }
    }

    LabeledDataset dataset;
    dataset.schema_hash = schema.schema_hash;

    auto vector_for = [&](const std::string& domain,
                          const std::optional<std::string>& sector) -> FeatureVector {
        auto it = detections_by_domain.find(domain);
        if (it == detections_by_domain.end())
            throw DomriskError("domain " + domain + " has no successful crawl detections");
        FeatureVector vec = vectorize(it->second, schema);
        if (schema.has_sector()) apply_sector(vec, schema, sector);
        return vec;
    };

    auto sector_for = [&](const std::string& domain) -> std::optional<std::string> {
        auto it = sectors.find(domain);
        if (it == sectors.end()) return std::nullopt;
        if (!SectorTable::builtin().has(it->second))
            throw DomriskError("domain " + domain + " has unknown sector code '" + it->second +
                               "'");
        return it->second;
    };

    for (const auto& [domain, p] : pos_by_domain) {
        LabeledSample sample;
        sample.domain = domain;
        sample.label = 1;
        sample.source = incident_source_name(p.source);
        sample.reference_date = p.reference_date;
        sample.sector = sector_for(domain);
        sample.vector = vector_for(domain, sample.sector);
        dataset.rows.push_back(std::move(sample));
    }

    for (const auto& n : negatives) {
        if (pos_by_domain.count(n.domain)) {
            note("domain " + n.domain + " appears in both pools; kept as positive");
            continue;
        }
        LabeledSample sample;
        sample.domain = n.domain;
        sample.label = 0;
        sample.source = "tranco";
        sample.reference_date = n.reference_date;
        sample.sector = sector_for(n.domain);
        sample.vector = vector_for(n.domain, sample.sector);
        dataset.rows.push_back(std::move(sample));
    }

    std::sort(dataset.rows.begin(), dataset.rows.end(),
              [](const LabeledSample& a, const LabeledSample& b) { return a.domain < b.domain; });
    return dataset;
}

void save_dataset_csv(const std::string& path, const LabeledDataset& dataset,
                      const std::string& manifest_line) {
    std::ofstream out(path);
    if (!out) throw DomriskError("cannot write dataset csv: " + path);
    if (!manifest_line.empty()) out << manifest_line << "\n";
    out << "domain,label,source,reference_date,sector\n";
    for (const auto& row : dataset.rows) {
        out << csv_join({row.domain, std::to_string(row.label), row.source,
                         format_date(row.reference_date), row.sector.value_or("")})
            << "\n";
    }
}

LabeledDataset load_dataset_csv(const std::string& path, const std::string& matrix_path,
                                const FeatureSchema& schema) {
    auto [domains, vectors] = load_vector_matrix(matrix_path, schema);
    std::map<std::string, size_t> vector_index;
    for (size_t i = 0; i < domains.size(); ++i) vector_index[domains[i]] = i;

    LabeledDataset dataset;
    dataset.schema_hash = schema.schema_hash;
    for (const auto& row : read_csv(path)) {
        if (row.size() != 5)
            throw DomriskError("dataset csv rows must be domain,label,source,date,sector: " + path);
        if (row[0] == "domain") continue;
        LabeledSample sample;
        sample.domain = row[0];
        sample.label = std::stoi(row[1]);
        if (sample.label != 0 && sample.label != 1)
            throw DomriskError("dataset label must be 0/1 for domain " + sample.domain);
        sample.source = row[2];
        sample.reference_date = parse_date(row[3]);
        if (!row[4].empty()) sample.sector = row[4];
        auto it = vector_index.find(sample.domain);
        if (it == vector_index.end())
            throw DomriskError("dataset domain " + sample.domain + " missing from vector matrix");
        sample.vector = vectors[it->second];
        dataset.rows.push_back(std::move(sample));
    }
    return dataset;
}

}  // namespace domrisk
