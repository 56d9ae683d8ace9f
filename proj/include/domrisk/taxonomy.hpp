#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "domrisk/util.hpp"

namespace domrisk {

/// The eight coarse technology groupings, in the order the schema uses them.
const std::vector<std::string>& canonical_meta_categories();

struct CategoryInfo {
    std::string name;
    std::string meta_category;
};

/// Technology category tree: category id -> (name, meta-category).
/// Every category belongs to exactly one meta-category; meta-category
/// names are restricted to the canonical eight.
class Taxonomy {
public:
    Taxonomy() = default;
    Taxonomy(std::map<int, CategoryInfo> categories);

    static Taxonomy from_json(const nlohmann::json& doc);
    static Taxonomy load_file(const std::string& path);
    nlohmann::json to_json() const;

    bool has_category(int id) const { return categories_.count(id) > 0; }
    const CategoryInfo& category(int id) const;
    const std::map<int, CategoryInfo>& categories() const { return categories_; }

    /// Meta-categories present, in canonical order.
    const std::vector<std::string>& meta_categories() const { return meta_categories_; }
    bool has_meta(const std::string& name) const;
    std::vector<int> categories_of_meta(const std::string& meta) const;

private:
    std::map<int, CategoryInfo> categories_;
    std::vector<std::string> meta_categories_;
};

/// Bare category-name file (community fingerprint format):
/// JSON object mapping category id -> {"name": string}. Round-trips.
std::map<int, std::string> load_category_names(const nlohmann::json& doc);
nlohmann::json dump_category_names(const std::map<int, std::string>& names);

}  // namespace domrisk
