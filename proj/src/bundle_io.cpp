#include "domrisk/bundle_io.hpp"

#include <fstream>

namespace domrisk {

nlohmann::json bundle_to_json(const PageBundle& page) {
    nlohmann::json headers = nlohmann::json::array();
    for (const auto& [name, value] : page.headers) headers.push_back({name, value});
    nlohmann::json cookies = nlohmann::json::array();
    for (const auto& [name, value] : page.cookies) cookies.push_back({name, value});
    return {{"url", page.url},
            {"status", page.status},
            {"headers", headers},
            {"cookies", cookies},
            {"body", page.body},
            {"resource_urls", page.resource_urls},
            {"fetched_at", format_rfc3339(page.fetched_at)}};
}

PageBundle bundle_from_json(const nlohmann::json& doc) {
    PageBundle page;
    page.url = doc.at("url").get<std::string>();
    page.status = doc.at("status").get<int>();
    if (page.status < 100 || page.status > 599)
        throw DomriskError("bundle for " + page.url + " has status outside [100, 599]");
    for (const auto& pair : doc.at("headers"))
        page.headers.push_back({pair.at(0).get<std::string>(), pair.at(1).get<std::string>()});
    for (const auto& pair : doc.at("cookies"))
        page.cookies.push_back({pair.at(0).get<std::string>(), pair.at(1).get<std::string>()});
    page.body = doc.at("body").get<std::string>();
    page.resource_urls = doc.at("resource_urls").get<std::vector<std::string>>();
    page.fetched_at = parse_rfc3339(doc.at("fetched_at").get<std::string>());
    return page;
}

void save_bundle_archive(const std::string& path, const std::vector<PageBundle>& pages) {
    std::ofstream out(path);
    if (!out) throw DomriskError("cannot write bundle archive: " + path);
    for (const auto& page : pages) out << bundle_to_json(page).dump() << "\n";
}

std::vector<PageBundle> load_bundle_archive(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomriskError("cannot open bundle archive: " + path);
    std::vector<PageBundle> pages;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            pages.push_back(bundle_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw DomriskError("bundle archive " + path + " line " + std::to_string(line_no) +
                               ": " + e.what());
        }
    }
    return pages;
}

}  // namespace domrisk
