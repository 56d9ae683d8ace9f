#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "domrisk/fingerprint.hpp"
#include "domrisk/taxonomy.hpp"

namespace domrisk {

struct BinaryFeature {
    std::string token;             // "jQuery", "jQuery 1", "jQuery 1.13"
    std::vector<int> category_ids; // sorted
};

struct CountFeature {
    enum class Kind { Category, MetaCategory };
    Kind kind = Kind::Category;
    int category_id = -1;       // valid for Kind::Category
    std::string name;           // category or meta-category name
    std::string meta_category;  // owning meta (equals name for Kind::MetaCategory)

    std::string key() const {
        return (kind == Kind::Category ? "category_count:" : "meta_count:") + name;
    }
};

/// The pruned numeric encoding: binary technology/version slots followed by
/// per-category and per-meta-category count slots, optionally followed by
/// 20 sector one-hot slots (see sector.hpp).
class FeatureSchema {
public:
    std::vector<BinaryFeature> binary_features;
    std::vector<CountFeature> count_features;
    std::vector<std::string> sector_codes;  // empty unless extended
    int min_support = 20;
    size_t corpus_size = 0;
    std::string schema_hash;

    size_t width() const {
        return binary_features.size() + count_features.size() + sector_codes.size();
    }
    bool has_sector() const { return !sector_codes.empty(); }
    size_t sector_offset() const { return binary_features.size() + count_features.size(); }

    /// Column name for CSV headers: the token for binaries, the group key
    /// for counts, "sector:<code>" for sector slots.
    std::string slot_name(size_t index) const;

    /// Recomputes the digest of the ordered feature list.
    std::string compute_hash() const;

    nlohmann::json to_json() const;
    static FeatureSchema from_json(const nlohmann::json& doc);
    void save_file(const std::string& path) const;
    static FeatureSchema load_file(const std::string& path);
};

struct FeatureVector {
    std::vector<double> values;
    std::string schema_hash;
};

/// Name/major/major.minor tokens for one detection; patch and deeper
/// version components are dropped.
std::set<std::string> expand_versions(const Detection& detection);

/// Builds the pruned schema from per-site detection sets. Tokens observed
/// on fewer than min_support sites are dropped; a count feature is created
/// for every taxonomy category and meta-category. candidate_count, when
/// given, receives the pre-pruning binary candidate total.
FeatureSchema build_schema(const std::vector<DetectionSet>& corpus, const Taxonomy& taxonomy,
                           int min_support = 20, size_t* candidate_count = nullptr);

struct TaxonomyNode {
    enum class Kind { Category, MetaCategory, Root };
    Kind kind = Kind::Root;
    int category_id = -1;
    std::string meta_name;

    static TaxonomyNode category(int id) { return {Kind::Category, id, {}}; }
    static TaxonomyNode meta(std::string name) { return {Kind::MetaCategory, -1, std::move(name)}; }
    static TaxonomyNode root() { return {Kind::Root, -1, {}}; }
};

/// Number of distinct features attributable to a node of the hierarchy:
/// child binaries (deduplicated) plus nested count features plus the
/// node's own count feature. The root has no count feature of its own.
size_t count_features(const TaxonomyNode& node, const FeatureSchema& schema);

/// Encodes one site's merged detections against the schema. Pure.
FeatureVector vectorize(const DetectionSet& detections, const FeatureSchema& schema);

/// Vector matrix file: one row per domain, header of slot names.
void save_vector_matrix(const std::string& path, const std::vector<std::string>& domains,
                        const std::vector<FeatureVector>& rows, const FeatureSchema& schema,
                        const std::string& manifest_line = {});
std::pair<std::vector<std::string>, std::vector<FeatureVector>> load_vector_matrix(
    const std::string& path, const FeatureSchema& schema);

}  // namespace domrisk
