#include "domrisk/synthgen.hpp"

#include <filesystem>
#include <fstream>

#include "domrisk/bundle_io.hpp"
#include "domrisk/csv.hpp"
#include "domrisk/rng.hpp"

namespace domrisk {

namespace {

enum class MarkKind { Header, Meta, Script, Html, Cookie };

struct SynthTech {
    const char* name;
    std::vector<int> cats;
    MarkKind kind;
    const char* key;  // header / cookie / meta name; marker token otherwise
    double p_pos;
    double p_neg;
    std::vector<const char*> versions;  // oldest first
    const char* implies = nullptr;
};

// Incident sites favor dated stacks; non-incident sites favor protective
// tooling. Shared technologies keep the classes from separating trivially.
const std::vector<SynthTech>& tech_table() {
    static const std::vector<SynthTech> kTechs = {
        // higher on incident sites
        {"LegacyPress", {1}, MarkKind::Meta, "generator", 0.72, 0.28, {"4.1.3", "4.9.8", "5.8.1"}},
        {"OldScript", {2}, MarkKind::Script, "oldscript", 0.65, 0.25, {"1.4.2", "1.9.1", "3.6.0"}},
        {"PlainServe", {3}, MarkKind::Header, "server", 0.60, 0.25, {"2.2.9", "2.4.41"}},
        {"RetroCommerce", {9}, MarkKind::Html, "data-retrocommerce", 0.45, 0.10, {}},
        {"AdBurst", {4}, MarkKind::Script, "adburst", 0.50, 0.15, {}},
        {"FormMailer", {11}, MarkKind::Html, "data-formmailer", 0.40, 0.12, {}},
        {"PressTheme", {12}, MarkKind::Html, "data-presstheme", 0.35, 0.10, {}, "LegacyPress"},
        // higher on non-incident sites
        {"ShieldProxy", {6, 8}, MarkKind::Header, "x-shield-proxy", 0.15, 0.60, {}},
        {"GuardWall", {6}, MarkKind::Cookie, "guardwall_session", 0.10, 0.48, {}},
        {"ConsentHub", {7}, MarkKind::Cookie, "consenthub_id", 0.18, 0.55, {}},
        {"EdgeCache", {8}, MarkKind::Header, "x-edge-cache", 0.20, 0.58, {"7.1.0", "8.2.3"}},
        {"ModernKit", {2}, MarkKind::Script, "modernkit", 0.18, 0.55, {"3.2.1"}},
        {"SiteMetrics", {4}, MarkKind::Script, "sitemetrics", 0.25, 0.60, {}},
        {"PrivacyBadge", {7}, MarkKind::Html, "data-privacybadge", 0.12, 0.45, {}},
        // common on both
        {"UtilJS", {2}, MarkKind::Script, "utiljs", 0.50, 0.50, {"2.1.0"}},
        {"TagCenter", {5}, MarkKind::Script, "tagcenter", 0.40, 0.40, {}},
        {"ChatAssist", {10}, MarkKind::Html, "data-chatassist", 0.30, 0.30, {}},
        {"MailRelay", {11}, MarkKind::Header, "x-mail-relay", 0.30, 0.30, {}},
        {"WidgetBox", {12}, MarkKind::Html, "data-widgetbox", 0.35, 0.35, {}},
        {"FontService", {12}, MarkKind::Script, "fontservice", 0.45, 0.45, {}},
        {"QuickCart", {9}, MarkKind::Html, "data-quickcart", 0.20, 0.20, {}},
        {"NodeServe", {3}, MarkKind::Header, "server", 0.25, 0.25, {"18.2.0"}},
    };
    return kTechs;
}

nlohmann::json make_taxonomy_doc() {
    return nlohmann::json::parse(R"({
        "categories": {
            "1": {"name": "CMS", "meta": "Software Stack"},
            "2": {"name": "JavaScript libraries", "meta": "Software Stack"},
            "3": {"name": "Web servers", "meta": "Software Stack"},
            "4": {"name": "Analytics", "meta": "Web Analytics/Pixel Trackers"},
            "5": {"name": "Tag managers", "meta": "Web Analytics/Pixel Trackers"},
            "6": {"name": "Security", "meta": "Security/Privacy"},
            "7": {"name": "Cookie compliance", "meta": "Security/Privacy"},
            "8": {"name": "CDN", "meta": "Internet Hosting"},
            "9": {"name": "Ecommerce", "meta": "Financial Elements"},
            "10": {"name": "Live chat", "meta": "Customer Support"},
            "11": {"name": "Email", "meta": "Communication Systems"},
            "12": {"name": "Miscellaneous", "meta": "Miscellaneous"}
        }
    })");
}

nlohmann::json make_ruleset_doc() {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& tech : tech_table()) {
        nlohmann::json body;
        body["cats"] = tech.cats;
        std::string lower = to_lower(tech.name);
        switch (tech.kind) {
            case MarkKind::Header:
                body["headers"] = {{tech.key, lower + "(?:/([\\d.]+))?\\;version:\\1"}};
                break;
            case MarkKind::Meta:
                body["meta"] = {{tech.key, lower + "(?:\\s([\\d.]+))?\\;version:\\1"}};
                break;
            case MarkKind::Script:
                body["scriptSrc"] = lower + "(?:-([\\d.]+))?(?:\\.min)?\\.js\\;version:\\1";
                break;
            case MarkKind::Html:
                body["html"] = tech.key;
                break;
            case MarkKind::Cookie:
                body["cookies"] = {{tech.key, ""}};
                break;
        }
        if (tech.implies) body["implies"] = tech.implies;
        doc[tech.name] = body;
    }
    return doc;
}

const std::vector<const char*>& positive_sectors() {
    static const std::vector<const char*> kCodes = {"61", "62", "92", "31-33"};
    return kCodes;
}
const std::vector<const char*>& negative_sectors() {
    static const std::vector<const char*> kCodes = {"51", "54", "52", "44-45"};
    return kCodes;
}

std::string org_name_for(const std::string& stem, Rng& rng) {
    static const char* kSuffixes[] = {"Inc", "LLC", "Group", "Holdings", "Corp", "Co"};
    std::string pretty = stem;
    pretty[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(pretty[0])));
    return pretty + " " + kSuffixes[rng.bounded(6)];
}

void emit_tech(const SynthTech& tech, const std::string& version, PageBundle& page) {
    std::string lower = to_lower(tech.name);
    switch (tech.kind) {
        case MarkKind::Header:
            page.headers.push_back(
                {tech.key, version.empty() ? lower : lower + "/" + version});
            break;
        case MarkKind::Meta:
            page.body += "<meta name=\"" + std::string(tech.key) + "\" content=\"" + lower +
                         (version.empty() ? "" : " " + version) + "\">";
            break;
        case MarkKind::Script: {
            std::string src = "/assets/" + lower + (version.empty() ? "" : "-" + version) + ".js";
            page.body += "<script src=\"" + src + "\"></script>";
            page.resource_urls.push_back(src);
            break;
        }
        case MarkKind::Html:
            page.body += "<div " + std::string(tech.key) + "=\"1\"></div>";
            break;
        case MarkKind::Cookie:
            page.cookies.push_back({tech.key, "1"});
            break;
    }
}

}  // namespace

SynthCorpus generate_synth_corpus(const SynthConfig& config) {
    SynthCorpus corpus;
    corpus.taxonomy_doc = make_taxonomy_doc();
    corpus.ruleset_doc = make_ruleset_doc();

    size_t total = config.n_positive + config.n_negative;
    for (size_t i = 0; i < total; ++i) {
        bool positive = i < config.n_positive;
        SynthSite site;
        std::string stem = (positive ? "breached" : "steady") + std::to_string(positive ? i : i - config.n_positive);
        site.domain = stem + ".example";
        site.label = positive ? 1 : 0;
        Rng rng(derive_seed(config.seed, site.domain));

        site.org_name = org_name_for(stem, rng);
        if (positive) {
            site.source = rng.uniform() < 0.5 ? "vcdb-like" : "ransomware-like";
            site.incident_date =
                add_days(CivilDate{2022, 1, 1}, static_cast<int64_t>(rng.bounded(730)));
        }
        const auto& sector_pool = positive ? positive_sectors() : negative_sectors();
        if (rng.uniform() < config.sector_coverage) {
            // skew toward the front of the class's sector list
            size_t idx = rng.uniform() < 0.6 ? 0 : 1 + rng.bounded(sector_pool.size() - 1);
            site.sector = sector_pool[idx];
        }

        bool with_privacy = positive || rng.uniform() >= config.drop_privacy_fraction;
        std::string origin = "https://" + site.domain;
        Timestamp fetched{CivilDate{2024, 4, 1}, 9, 0, 0};

        std::vector<PageBundle> pages(static_cast<size_t>(1 + config.subpages));
        for (int p = 0; p <= config.subpages; ++p) {
            PageBundle& page = pages[static_cast<size_t>(p)];
            page.url = p == 0 ? origin + "/" : origin + "/p" + std::to_string(p);
            page.status = 200;
            page.fetched_at = fetched;
            page.body = "<html><head>";
            if (p == 0) page.body += "<title>" + site.org_name + "</title>";
            page.body += "</head><body>";
        }

        for (const auto& tech : tech_table()) {
            double p_class = positive ? tech.p_pos : tech.p_neg;
            double p_common = (tech.p_pos + tech.p_neg) / 2.0;
            double p = p_common + config.signal_strength * (p_class - p_common);
            if (rng.uniform() >= p) continue;

            std::string version;
            if (!tech.versions.empty()) {
                // incident sites skew to older versions
                size_t n = tech.versions.size();
                size_t idx;
                if (n == 1) {
                    idx = 0;
                } else if (positive) {
                    idx = rng.uniform() < 0.75 ? rng.bounded(n - 1) : n - 1;
                } else {
                    idx = rng.uniform() < 0.75 ? n - 1 : rng.bounded(n - 1);
                }
                version = tech.versions[idx];
            }
            size_t page_idx = rng.bounded(pages.size());
            emit_tech(tech, version, pages[page_idx]);
        }

        // navigation: homepage links to subpages and the privacy page
        for (int p = 1; p <= config.subpages; ++p)
            pages[0].body += "<a href=\"/p" + std::to_string(p) + "\">section " +
                             std::to_string(p) + "</a>";
        pages[0].body += "<a href=\"/about\">about us</a>";
        if (with_privacy) pages[0].body += "<a href=\"/privacy\">Privacy policy</a>";
        for (auto& page : pages) page.body += "</body></html>";

        PageBundle about;
        about.url = origin + "/about";
        about.status = 200;
        about.fetched_at = fetched;
        about.body = "<html><body><p>" + site.org_name + " company profile.</p></body></html>";
        pages.push_back(std::move(about));

        if (with_privacy) {
            PageBundle privacy;
            privacy.url = origin + "/privacy";
            privacy.status = 200;
            privacy.fetched_at = fetched;
            privacy.body = "<html><body><h1>Privacy policy</h1></body></html>";
            pages.push_back(std::move(privacy));
        }
        site.pages = std::move(pages);
        corpus.sites.push_back(std::move(site));
    }
    return corpus;
}

void write_synth_corpus(const SynthCorpus& corpus, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "bundles");

    {
        std::ofstream out(fs::path(dir) / "ruleset.json");
        out << corpus.ruleset_doc.dump(2) << "\n";
    }
    {
        std::ofstream out(fs::path(dir) / "taxonomy.json");
        out << corpus.taxonomy_doc.dump(2) << "\n";
    }

    std::ofstream domains(fs::path(dir) / "domains.txt");
    std::ofstream incidents(fs::path(dir) / "incidents.csv");
    std::ofstream tranco(fs::path(dir) / "tranco.csv");
    std::ofstream sectors(fs::path(dir) / "sectors.csv");
    incidents << "raw_id,organization_name,source,incident_date\n";
    tranco << "rank,domain\n";
    sectors << "domain,code\n";
    nlohmann::json search_map = nlohmann::json::object();

    int rank = 1;
    int incident_id = 1;
    for (const auto& site : corpus.sites) {
        save_bundle_archive((fs::path(dir) / "bundles" / (site.domain + ".jsonl")).string(),
                            site.pages);
        domains << site.domain << "\n";
        if (site.label == 1) {
            incidents << csv_join({"i" + std::to_string(incident_id++), site.org_name,
                                   site.source, format_date(site.incident_date)})
                      << "\n";
            search_map[site.org_name] = {"https://" + site.domain + "/"};
        } else {
            tranco << rank++ << "," << site.domain << "\n";
        }
        if (site.sector) sectors << csv_join({site.domain, *site.sector}) << "\n";
    }
    std::ofstream search(fs::path(dir) / "search_map.json");
    search << search_map.dump(2) << "\n";
}

}  // namespace domrisk
