#include <doctest.h>

#include <regex>
#include <set>

#include "domrisk/fingerprint.hpp"
#include "test_support.hpp"

using namespace domrisk;
using domrisk::test::make_page;
using domrisk::test::small_taxonomy;

namespace {

nlohmann::json basic_doc() {
    return nlohmann::json::parse(R"({
        "Nginx": {
            "cats": [8],
            "headers": {"server": "nginx(?:/([\\d.]+))?\\;version:\\1"}
        },
        "WordPress": {
            "cats": [1],
            "meta": {"generator": "WordPress(?:\\s([\\d.]+))?\\;version:\\1"},
            "implies": "PHP"
        },
        "PHP": {
            "cats": [9],
            "headers": {"x-powered-by": "php(?:/([\\d.]+))?\\;version:\\1"}
        },
        "jQuery": {
            "cats": [2],
            "scriptSrc": "jquery(?:-([\\d.]+))?(?:\\.min)?\\.js\\;version:\\1"
        },
        "TrackPixel": {
            "cats": [3],
            "html": "trackpixel\\.js"
        },
        "ConsentBar": {
            "cats": [4],
            "cookies": {"consentbar": ""}
        }
    })");
}

// Independent transitive-closure oracle over the implies graph.
std::set<std::string> implies_closure(const Ruleset& rs, std::set<std::string> names) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& name : std::vector<std::string>(names.begin(), names.end())) {
            const TechRule* rule = rs.find(name);
            if (!rule) continue;
            for (const auto& target : rule->implies)
                if (names.insert(target).second) changed = true;
        }
    }
    return names;
}

std::set<std::string> names_of(const DetectionSet& set) {
    std::set<std::string> out;
    for (const auto& d : set) out.insert(d.technology);
    return out;
}

}  // namespace

TEST_CASE("load_ruleset: minimal rule with zero patterns is legal and matches nothing") {
    auto taxonomy = small_taxonomy();
    auto rs = load_ruleset(nlohmann::json::parse(R"({"Bare": {"cats": [1]}})"), taxonomy);
    CHECK(rs.size() == 1);
    CHECK(rs.find("Bare") != nullptr);
    auto result = detect(make_page("https://x.example/", 200, "anything"), rs);
    CHECK(result.empty());
}

TEST_CASE("load_ruleset: dangling implies is a load error") {
    auto taxonomy = small_taxonomy();
    auto doc = nlohmann::json::parse(R"({"A": {"cats": [1], "implies": "Missing"}})");
    CHECK_THROWS_AS(load_ruleset(doc, taxonomy), DomriskError);
}

TEST_CASE("load_ruleset: unknown category id is a load error") {
    auto taxonomy = small_taxonomy();
    auto doc = nlohmann::json::parse(R"({"A": {"cats": [777]}})");
    CHECK_THROWS_WITH_AS(load_ruleset(doc, taxonomy),
                         doctest::Contains("category id 777"), DomriskError);
}

TEST_CASE("load_ruleset: non-compiling regex names the rule and pattern") {
    auto taxonomy = small_taxonomy();
    auto doc = nlohmann::json::parse(R"({"Broken": {"cats": [1], "html": "foo(bar"}})");
    CHECK_THROWS_WITH_AS(load_ruleset(doc, taxonomy), doctest::Contains("Broken"), DomriskError);
}

TEST_CASE("load_ruleset: runtime probe kinds are ignored with a warning") {
    auto taxonomy = small_taxonomy();
    auto doc = nlohmann::json::parse(R"({"App": {"cats": [2], "js": {"appGlobal": ""}}})");
    auto rs = load_ruleset(doc, taxonomy);
    REQUIRE(rs.warnings().size() == 1);
    CHECK(rs.warnings()[0].find("js") != std::string::npos);
    // and the key survives a dump
    CHECK(rs.to_json() == doc);
}

TEST_CASE("load_ruleset: version template round-trips verbatim") {
    auto taxonomy = small_taxonomy();
    auto doc = basic_doc();
    auto rs = load_ruleset(doc, taxonomy);
    CHECK(rs.to_json() == doc);

    const TechRule* nginx = rs.find("Nginx");
    REQUIRE(nginx != nullptr);
    REQUIRE(nginx->headers.size() == 1);
    CHECK(nginx->headers[0].pattern.raw == "nginx(?:/([\\d.]+))?\\;version:\\1");
    CHECK(nginx->headers[0].pattern.version_template == "\\1");
}

TEST_CASE("detect: header version capture matches standalone regex evaluation") {
    auto taxonomy = small_taxonomy();
    auto rs = load_ruleset(basic_doc(), taxonomy);
    auto page = make_page("https://site.example/");
    page.headers.push_back({"Server", "nginx/1.22.1"});

    auto result = detect(page, rs);
    const Detection* d = find_detection(result, "Nginx");
    REQUIRE(d != nullptr);
    REQUIRE(d->versions.size() == 1);

    // oracle: apply the same regex by hand
    std::regex re("nginx(?:/([\\d.]+))?", std::regex::icase);
    std::smatch m;
    std::string value = "nginx/1.22.1";
    REQUIRE(std::regex_search(value, m, re));
    CHECK(d->versions[0] == m[1].str());
    CHECK(d->versions[0] == "1.22.1");
    REQUIRE(d->sources.size() == 1);
    CHECK(d->sources[0].kind == SourceKind::Header);
    CHECK(d->category_ids == std::vector<int>{8});
}

TEST_CASE("detect: empty page yields an empty set") {
    auto taxonomy = small_taxonomy();
    auto rs = load_ruleset(basic_doc(), taxonomy);
    CHECK(detect(make_page("https://site.example/"), rs).empty());
}

TEST_CASE("detect: implies closure adds versionless technologies") {
    auto taxonomy = small_taxonomy();
    auto rs = load_ruleset(basic_doc(), taxonomy);
    auto page = make_page("https://site.example/", 200,
                          "<meta name=\"generator\" content=\"WordPress 6.4.2\">");
    auto result = detect(page, rs);

    auto expected = implies_closure(rs, {"WordPress"});
    CHECK(names_of(result) == expected);

    const Detection* php = find_detection(result, "PHP");
    REQUIRE(php != nullptr);
    CHECK(php->versions.empty());
    REQUIRE(php->sources.size() == 1);
    CHECK(php->sources[0].kind == SourceKind::Implied);

    const Detection* wp = find_detection(result, "WordPress");
    REQUIRE(wp != nullptr);
    CHECK(wp->versions == std::vector<std::string>{"6.4.2"});
}

TEST_CASE("detect: cyclic implies terminates") {
    auto taxonomy = small_taxonomy();
    auto doc = nlohmann::json::parse(R"({
        "A": {"cats": [1], "html": "marker-a", "implies": "B"},
        "B": {"cats": [2], "implies": "A"}
    })");
    auto rs = load_ruleset(doc, taxonomy);
    auto result = detect(make_page("https://x.example/", 200, "marker-a"), rs);
    CHECK(names_of(result) == std::set<std::string>{"A", "B"});
}

TEST_CASE("detect: pure and deterministic for fixed inputs") {
    auto taxonomy = small_taxonomy();
    auto rs = load_ruleset(basic_doc(), taxonomy);
    auto page = make_page("https://site.example/", 200,
                          "<script src=\"/assets/trackpixel.js\"></script>");
    page.headers.push_back({"server", "nginx"});
    page.cookies.push_back({"ConsentBar", "1"});
    page.resource_urls.push_back("https://cdn.example/jquery-3.6.0.min.js");

    auto a = detect(page, rs);
    auto b = detect(page, rs);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].technology == b[i].technology);
        CHECK(a[i].versions == b[i].versions);
        CHECK(a[i].sources.size() == b[i].sources.size());
    }
    // every detection resolves in the ruleset
    for (const auto& d : a) CHECK(rs.find(d.technology) != nullptr);
    // sorted by technology name
    for (size_t i = 1; i < a.size(); ++i) CHECK(a[i - 1].technology < a[i].technology);
    CHECK(names_of(a) ==
          std::set<std::string>{"ConsentBar", "Nginx", "TrackPixel", "jQuery"});
}

TEST_CASE("detect: versionless capture keeps the technology") {
    auto taxonomy = small_taxonomy();
    auto rs = load_ruleset(basic_doc(), taxonomy);
    auto page = make_page("https://site.example/");
    page.headers.push_back({"server", "nginx"});  // no version suffix
    auto result = detect(page, rs);
    const Detection* d = find_detection(result, "Nginx");
    REQUIRE(d != nullptr);
    CHECK(d->versions.empty());
}

TEST_CASE("normalize_version") {
    CHECK(normalize_version("1.22.1") == "1.22.1");
    CHECK(normalize_version("v2.0") == "2.0");
    CHECK(normalize_version("3.6.0-beta.2") == "3.6.0");
    CHECK(normalize_version("6.4.") == "6.4");
    CHECK(normalize_version("beta") == "");
    CHECK(normalize_version("") == "");
}

TEST_CASE("merge_detections: union is idempotent and keeps distinct versions") {
    using domrisk::test::make_detection;
    using domrisk::test::make_set;

    auto a = make_set({make_detection("A", {}, {1})});
    auto ab = make_set({make_detection("A", {}, {1}), make_detection("B", {}, {2})});
    auto merged = merge_detections({a, ab});
    CHECK(names_of(merged) == std::set<std::string>{"A", "B"});

    auto j1 = make_set({make_detection("jQuery", {"1.13.2"}, {2})});
    auto j2 = make_set({make_detection("jQuery", {"3.6.0"}, {2})});
    auto jm = merge_detections({j1, j2});
    REQUIRE(jm.size() == 1);
    CHECK(jm[0].versions == std::vector<std::string>{"1.13.2", "3.6.0"});

    CHECK(merge_detections({}).empty());
}

TEST_CASE("merge_detections: associative and commutative up to evidence order") {
    using domrisk::test::make_detection;
    using domrisk::test::make_set;

    auto s1 = make_set({make_detection("A", {"1.0"}, {1}), make_detection("B", {}, {2})});
    auto s2 = make_set({make_detection("B", {"2.1"}, {2}), make_detection("C", {}, {3})});
    auto s3 = make_set({make_detection("A", {"1.1"}, {1})});

    auto key = [](const DetectionSet& set) {
        std::vector<std::pair<std::string, std::vector<std::string>>> out;
        for (const auto& d : set) out.push_back({d.technology, d.versions});
        return out;
    };

    auto left = merge_detections({merge_detections({s1, s2}), s3});
    auto right = merge_detections({s1, merge_detections({s2, s3})});
    auto swapped = merge_detections({s3, s2, s1});
    CHECK(key(left) == key(right));
    CHECK(key(left) == key(swapped));
}
