#include "domrisk/taxonomy.hpp"

#include <algorithm>
#include <fstream>

namespace domrisk {

const std::vector<std::string>& canonical_meta_categories() {
    static const std::vector<std::string> kMetas = {
        "Software Stack",
        "Web Analytics/Pixel Trackers",
        "Miscellaneous",
        "Financial Elements",
        "Customer Support",
        "Internet Hosting",
        "Security/Privacy",
        "Communication Systems",
    };
    return kMetas;
}

Taxonomy::Taxonomy(std::map<int, CategoryInfo> categories) : categories_(std::move(categories)) {
    for (const auto& [id, info] : categories_) {
        const auto& canon = canonical_meta_categories();
        if (std::find(canon.begin(), canon.end(), info.meta_category) == canon.end()) {
            throw DomriskError("category " + std::to_string(id) + " ('" + info.name +
                               "') names unknown meta-category '" + info.meta_category + "'");
        }
    }
    for (const auto& meta : canonical_meta_categories()) {
        bool present = std::any_of(categories_.begin(), categories_.end(), [&](const auto& kv) {
            return kv.second.meta_category == meta;
        });
        if (present) meta_categories_.push_back(meta);
    }
}

const CategoryInfo& Taxonomy::category(int id) const {
    auto it = categories_.find(id);
    if (it == categories_.end())
        throw DomriskError("unknown category id: " + std::to_string(id));
    return it->second;
}

bool Taxonomy::has_meta(const std::string& name) const {
    return std::find(meta_categories_.begin(), meta_categories_.end(), name) !=
           meta_categories_.end();
}

std::vector<int> Taxonomy::categories_of_meta(const std::string& meta) const {
    std::vector<int> ids;
    for (const auto& [id, info] : categories_)
        if (info.meta_category == meta) ids.push_back(id);
    return ids;
}

Taxonomy Taxonomy::from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("categories"))
        throw DomriskError("taxonomy document must be an object with a 'categories' key");
    std::map<int, CategoryInfo> cats;
    for (const auto& [key, value] : doc.at("categories").items()) {
        int id = 0;
        try {
            id = std::stoi(key);
        } catch (const std::exception&) {
            throw DomriskError("taxonomy category id is not an integer: '" + key + "'");
        }
        if (!value.is_object() || !value.contains("name") || !value.contains("meta"))
            throw DomriskError("taxonomy category " + key + " must have 'name' and 'meta'");
        cats[id] = CategoryInfo{value.at("name").get<std::string>(),
                                value.at("meta").get<std::string>()};
    }
    return Taxonomy(std::move(cats));
}

Taxonomy Taxonomy::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomriskError("cannot open taxonomy file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DomriskError("taxonomy file " + path + " is not valid JSON: " + e.what());
    }
    return from_json(doc);
}

nlohmann::json Taxonomy::to_json() const {
    nlohmann::json cats = nlohmann::json::object();
    for (const auto& [id, info] : categories_)
        cats[std::to_string(id)] = {{"name", info.name}, {"meta", info.meta_category}};
    return {{"categories", cats}};
}

std::map<int, std::string> load_category_names(const nlohmann::json& doc) {
    if (!doc.is_object()) throw DomriskError("category file must be a JSON object");
    std::map<int, std::string> names;
    for (const auto& [key, value] : doc.items()) {
        int id = 0;
        try {
            id = std::stoi(key);
        } catch (const std::exception&) {
            throw DomriskError("category id is not an integer: '" + key + "'");
        }
        if (!value.is_object() || !value.contains("name"))
            throw DomriskError("category " + key + " must be an object with a 'name'");
        names[id] = value.at("name").get<std::string>();
    }
    return names;
}

nlohmann::json dump_category_names(const std::map<int, std::string>& names) {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& [id, name] : names) doc[std::to_string(id)] = {{"name", name}};
    return doc;
}

}  // namespace domrisk
