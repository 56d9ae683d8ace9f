#include <doctest.h>

#include <fstream>
#include <optional>
#include <tuple>

#include "domrisk/dataset.hpp"
#include "domrisk/fetchers.hpp"
#include "test_support.hpp"

using namespace domrisk;
using domrisk::test::make_detection;
using domrisk::test::make_page;
using domrisk::test::make_set;
using domrisk::test::small_taxonomy;

namespace {

// ---- exhaustive common-substring oracle (test-only) ----
// Brute-force enumeration of maximal common runs over fragment lists,
// with the same greedy extraction the implementation specifies.

struct OracleMatch {
    size_t len = 0, ia = 0, pa = 0, ib = 0, pb = 0;
};

std::optional<OracleMatch> oracle_longest(const std::vector<std::string>& as,
                                          const std::vector<std::string>& bs, size_t min_len) {
    std::optional<OracleMatch> best;
    for (size_t ia = 0; ia < as.size(); ++ia) {
        for (size_t pa = 0; pa < as[ia].size(); ++pa) {
            for (size_t ib = 0; ib < bs.size(); ++ib) {
                for (size_t pb = 0; pb < bs[ib].size(); ++pb) {
                    size_t len = 0;
                    while (pa + len < as[ia].size() && pb + len < bs[ib].size() &&
                           as[ia][pa + len] == bs[ib][pb + len])
                        ++len;
                    if (len < min_len) continue;
                    auto key = std::tuple(ia, pa, ib, pb);
                    if (!best || len > best->len ||
                        (len == best->len &&
                         key < std::tuple(best->ia, best->pa, best->ib, best->pb)))
                        best = OracleMatch{len, ia, pa, ib, pb};
                }
            }
        }
    }
    return best;
}

void oracle_remove(std::vector<std::string>& frags, size_t idx, size_t pos, size_t len) {
    std::string left = frags[idx].substr(0, pos);
    std::string right = frags[idx].substr(pos + len);
    frags.erase(frags.begin() + static_cast<long>(idx));
    auto at = frags.begin() + static_cast<long>(idx);
    if (!right.empty()) at = frags.insert(at, right);
    if (!left.empty()) frags.insert(at, left);
}

double oracle_similarity(const std::string& a, const std::string& b) {
    std::string na = normalize_name(a);
    std::string nb = normalize_name(b);
    REQUIRE(!na.empty());
    REQUIRE(!nb.empty());
    if (std::tuple(na.size(), na) > std::tuple(nb.size(), nb)) std::swap(na, nb);
    std::vector<std::string> as{na}, bs{nb};
    size_t total = 0;
    for (;;) {
        auto match = oracle_longest(as, bs, 3);
        if (!match) break;
        total += match->len;
        oracle_remove(as, match->ia, match->pa, match->len);
        oracle_remove(bs, match->ib, match->pb, match->len);
    }
    return std::min(1.0, static_cast<double>(total) /
                             static_cast<double>(std::min(na.size(), nb.size())));
}

std::string random_name(Rng& rng, size_t max_len) {
    static const char alphabet[] = "aabbcde ";
    size_t len = 1 + rng.bounded(max_len);
    std::string s;
    for (size_t i = 0; i < len; ++i) s += alphabet[rng.bounded(sizeof(alphabet) - 1)];
    if (normalize_name(s).empty()) s = "abc";  // all-space draw
    return s;
}

}  // namespace

TEST_CASE("name_similarity: worked examples") {
    CHECK(name_similarity("23andMe Holding Co", "23andMe") == doctest::Approx(1.0));
    CHECK(name_similarity("Acme Corporation", "ACME Corp") == doctest::Approx(1.0));
    CHECK(name_similarity("identical strings", "identical strings") == doctest::Approx(1.0));
    CHECK(name_similarity("abc", "xyz") == doctest::Approx(0.0));
    // no common substring of length >= 3
    CHECK(name_similarity("ababab", "ba") == doctest::Approx(0.0));
}

TEST_CASE("name_similarity: empty after normalization is an error") {
    CHECK_THROWS_AS(name_similarity("   ", "abc"), DomriskError);
    CHECK_THROWS_AS(name_similarity("abc", ""), DomriskError);
}

TEST_CASE("name_similarity: agrees with the exhaustive oracle on 500 random pairs") {
    Rng rng(20240612);
    for (int trial = 0; trial < 500; ++trial) {
        std::string a = random_name(rng, 12);
        std::string b = random_name(rng, 12);
        double got = name_similarity(a, b);
        double expected = oracle_similarity(a, b);
        CHECK_MESSAGE(got == doctest::Approx(expected).epsilon(1e-12),
                      "a='", a, "' b='", b, "'");
    }
}

TEST_CASE("name_similarity: symmetric") {
    Rng rng(555);
    for (int trial = 0; trial < 300; ++trial) {
        std::string a = random_name(rng, 12);
        std::string b = random_name(rng, 12);
        CHECK(name_similarity(a, b) == name_similarity(b, a));
    }
}

TEST_CASE("map_incident_to_domain: clean stub mapping") {
    IncidentRecord incident{"r1", "Acme Corp", IncidentSource::VcdbLike, CivilDate{2023, 4, 1}};
    StubSearchClient search;
    search.add("Acme Corp", {"https://acmecorp.example/"});
    RecordedFetcher fetcher;
    fetcher.add_page(make_page("https://acmecorp.example/", 200,
                               "<html><title>Acme Corp</title></html>"));
    PageContentNameExtractor extractor;

    auto outcome = map_incident_to_domain(incident, search, fetcher, extractor);
    REQUIRE(outcome.mapping.has_value());
    CHECK(outcome.mapping->domain == "acmecorp.example");
    CHECK(outcome.mapping->extracted_name == "Acme Corp");
    CHECK(outcome.mapping->similarity == doctest::Approx(1.0));
    CHECK_FALSE(outcome.mapping->needs_review);
}

TEST_CASE("map_incident_to_domain: blocklisted directories are skipped") {
    IncidentRecord incident{"r2", "Acme Corp", IncidentSource::VcdbLike, CivilDate{2023, 4, 1}};
    StubSearchClient search;
    search.add("Acme Corp",
               {"https://en.wikipedia.org/wiki/Acme", "https://www.linkedin.com/company/acme"});
    RecordedFetcher fetcher;
    PageContentNameExtractor extractor;

    auto outcome = map_incident_to_domain(incident, search, fetcher, extractor);
    CHECK_FALSE(outcome.mapping.has_value());
    CHECK(!outcome.error.empty());
}

TEST_CASE("map_incident_to_domain: no search results is an unmapped record") {
    IncidentRecord incident{"r3", "Ghost Org", IncidentSource::Other, CivilDate{2023, 4, 1}};
    StubSearchClient search;
    RecordedFetcher fetcher;
    PageContentNameExtractor extractor;
    auto outcome = map_incident_to_domain(incident, search, fetcher, extractor);
    CHECK_FALSE(outcome.mapping.has_value());
}

TEST_CASE("map_incident_to_domain: legal-entity variant clears the review threshold") {
    IncidentRecord incident{"r4", "ACME Corp", IncidentSource::RansomwareLike,
                            CivilDate{2023, 4, 1}};
    StubSearchClient search;
    search.add("ACME Corp", {"https://acme.example/"});
    RecordedFetcher fetcher;
    fetcher.add_page(make_page("https://acme.example/", 200,
                               "<html><title>Acme Corporation</title></html>"));
    PageContentNameExtractor extractor;
    auto outcome = map_incident_to_domain(incident, search, fetcher, extractor);
    REQUIRE(outcome.mapping.has_value());
    CHECK(outcome.mapping->similarity >= 0.9);
    CHECK_FALSE(outcome.mapping->needs_review);
    // and the oracle agrees on the pair
    CHECK(outcome.mapping->similarity ==
          doctest::Approx(oracle_similarity("ACME Corp", "Acme Corporation")));
}

TEST_CASE("map_incident_to_domain: low similarity flags review") {
    IncidentRecord incident{"r5", "Completely Different Name", IncidentSource::VcdbLike,
                            CivilDate{2023, 4, 1}};
    StubSearchClient search;
    search.add("Completely Different Name", {"https://unrelated.example/"});
    RecordedFetcher fetcher;
    fetcher.add_page(make_page("https://unrelated.example/", 200,
                               "<html><title>Zzq Host</title></html>"));
    PageContentNameExtractor extractor;
    auto outcome = map_incident_to_domain(incident, search, fetcher, extractor);
    REQUIRE(outcome.mapping.has_value());
    CHECK(outcome.mapping->needs_review);
}

TEST_CASE("sample_negatives: permutation, determinism, edge cases") {
    std::vector<std::string> pool{"a.com", "b.com", "c.com", "d.com", "e.com"};

    auto all = sample_negatives(pool, pool.size(), 3);
    auto sorted = all;
    std::sort(sorted.begin(), sorted.end());
    auto expected = pool;
    std::sort(expected.begin(), expected.end());
    CHECK(sorted == expected);  // permutation of the list

    CHECK(sample_negatives(pool, 3, 9) == sample_negatives(pool, 3, 9));
    CHECK(sample_negatives(pool, 0, 1).empty());
    CHECK_THROWS_AS(sample_negatives(pool, 6, 1), DomriskError);
}

TEST_CASE("filter_negatives: privacy-page gate") {
    CrawlResult ok;
    ok.domain = "ok.example";
    ok.success = true;
    ok.has_privacy_page = true;
    CrawlResult no_privacy;
    no_privacy.domain = "noprivacy.example";
    no_privacy.success = true;
    no_privacy.has_privacy_page = false;
    CrawlResult failed;
    failed.domain = "failed.example";
    failed.success = false;
    failed.has_privacy_page = true;

    CHECK(filter_negatives({ok, no_privacy, failed}) ==
          std::vector<std::string>{"ok.example"});
}

TEST_CASE("assemble_dataset: dedup, conflicts, sector attachment") {
    auto taxonomy = small_taxonomy();
    std::vector<DetectionSet> corpus(5, make_set({make_detection("TechA", {}, {1}),
                                                  make_detection("TechB", {}, {2})}));
    auto schema = build_schema(corpus, taxonomy, 1);

    std::map<std::string, DetectionSet> detections;
    detections["dup.example"] = make_set({make_detection("TechA", {}, {1})});
    detections["both.example"] = make_set({make_detection("TechB", {}, {2})});
    detections["neg.example"] = make_set({make_detection("TechA", {}, {1})});

    std::vector<PositiveInput> positives{
        {"dup.example", IncidentSource::VcdbLike, CivilDate{2023, 5, 1}},
        {"dup.example", IncidentSource::RansomwareLike, CivilDate{2022, 2, 1}},
        {"both.example", IncidentSource::VcdbLike, CivilDate{2023, 1, 1}},
    };
    std::vector<NegativeInput> negatives{
        {"both.example", CivilDate{2023, 6, 1}},
        {"neg.example", CivilDate{2023, 6, 2}},
    };
    std::map<std::string, std::string> sectors{{"dup.example", "61"}};

    std::vector<std::string> log;
    auto dataset = assemble_dataset(positives, negatives, detections, schema, sectors, &log);

    REQUIRE(dataset.rows.size() == 3);  // dup, both (positive), neg
    CHECK(log.size() == 2);

    std::map<std::string, const LabeledSample*> by_domain;
    for (const auto& row : dataset.rows) by_domain[row.domain] = &row;

    CHECK(by_domain["dup.example"]->label == 1);
    CHECK(by_domain["dup.example"]->reference_date == CivilDate{2022, 2, 1});  // earliest
    CHECK(by_domain["dup.example"]->sector == std::optional<std::string>("61"));
    CHECK(by_domain["both.example"]->label == 1);  // positive precedence
    CHECK(by_domain["neg.example"]->label == 0);
    CHECK_FALSE(by_domain["neg.example"]->sector.has_value());

    // unique domains, single schema hash
    CHECK(dataset.schema_hash == schema.schema_hash);
    for (const auto& row : dataset.rows) CHECK(row.vector.schema_hash == schema.schema_hash);
}

TEST_CASE("assemble_dataset: unknown sector code is an error") {
    auto taxonomy = small_taxonomy();
    auto schema = build_schema({make_set({make_detection("T", {}, {1})})}, taxonomy, 1);
    std::map<std::string, DetectionSet> detections{{"x.example", {}}};
    std::map<std::string, std::string> sectors{{"x.example", "99"}};
    CHECK_THROWS_AS(assemble_dataset({{"x.example", IncidentSource::Other, CivilDate{2023, 1, 1}}},
                                     {}, detections, schema, sectors),
                    DomriskError);
}

TEST_CASE("assemble_dataset: missing crawl is an error") {
    auto taxonomy = small_taxonomy();
    auto schema = build_schema({make_set({make_detection("T", {}, {1})})}, taxonomy, 1);
    CHECK_THROWS_AS(assemble_dataset({{"nocrawl.example", IncidentSource::Other,
                                       CivilDate{2023, 1, 1}}},
                                     {}, {}, schema),
                    DomriskError);
}

TEST_CASE("dataset csv + vector matrix round-trip") {
    auto taxonomy = small_taxonomy();
    std::vector<DetectionSet> corpus(3, make_set({make_detection("TechA", {"1.2.3"}, {1})}));
    auto schema = build_schema(corpus, taxonomy, 1);

    std::map<std::string, DetectionSet> detections;
    detections["a.example"] = corpus[0];
    detections["b.example"] = {};
    auto dataset = assemble_dataset({{"a.example", IncidentSource::VcdbLike, CivilDate{2023, 2, 3}}},
                                    {{"b.example", CivilDate{2023, 7, 8}}}, detections, schema);

    std::string csv_path = "/tmp/domrisk_dataset_test.csv";
    std::string matrix_path = "/tmp/domrisk_matrix_test.csv";
    save_dataset_csv(csv_path, dataset, "# test manifest");
    std::vector<std::string> domains;
    std::vector<FeatureVector> vectors;
    for (const auto& row : dataset.rows) {
        domains.push_back(row.domain);
        vectors.push_back(row.vector);
    }
    save_vector_matrix(matrix_path, domains, vectors, schema, "# test manifest");

    auto loaded = load_dataset_csv(csv_path, matrix_path, schema);
    REQUIRE(loaded.rows.size() == dataset.rows.size());
    for (size_t i = 0; i < loaded.rows.size(); ++i) {
        CHECK(loaded.rows[i].domain == dataset.rows[i].domain);
        CHECK(loaded.rows[i].label == dataset.rows[i].label);
        CHECK(loaded.rows[i].source == dataset.rows[i].source);
        CHECK(loaded.rows[i].reference_date == dataset.rows[i].reference_date);
        CHECK(loaded.rows[i].sector == dataset.rows[i].sector);
        CHECK(loaded.rows[i].vector.values == dataset.rows[i].vector.values);
    }
}

TEST_CASE("incident csv parsing") {
    std::string path = "/tmp/domrisk_incidents_test.csv";
    {
        std::ofstream out(path);
        out << "raw_id,organization_name,source,incident_date\n";
        out << "i1,\"Acme, Inc.\",vcdb-like,2023-05-06\n";
        out << "i2,Beta LLC,ransomware-like,2022-11-30\n";
    }
    auto records = load_incident_csv(path);
    REQUIRE(records.size() == 2);
    CHECK(records[0].organization_name == "Acme, Inc.");
    CHECK(records[0].source == IncidentSource::VcdbLike);
    CHECK(records[1].incident_date == CivilDate{2022, 11, 30});
}
