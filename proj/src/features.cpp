#include "domrisk/features.hpp"

#include <algorithm>
#include <climits>
#include <fstream>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "domrisk/csv.hpp"

namespace domrisk {

std::set<std::string> expand_versions(const Detection& detection) {
    std::set<std::string> tokens;
    tokens.insert(detection.technology);
    for (const auto& version : detection.versions) {
        auto parts = split(version, '.');
        if (!parts.empty() && !parts[0].empty()) {
            tokens.insert(detection.technology + " " + parts[0]);
            if (parts.size() >= 2)
                tokens.insert(detection.technology + " " + parts[0] + "." + parts[1]);
        }
    }
    return tokens;
}

FeatureSchema build_schema(const std::vector<DetectionSet>& corpus, const Taxonomy& taxonomy,
                           int min_support, size_t* candidate_count) {
    if (corpus.empty()) throw DomriskError("schema build requires a nonempty corpus");

    struct Candidate {
        int support = 0;
        std::set<int> cats;
    };
    std::map<std::string, Candidate> candidates;
    for (const auto& site : corpus) {
        std::set<std::string> site_tokens;
        std::map<std::string, std::set<int>> token_cats;
        for (const auto& d : site) {
            for (const auto& token : expand_versions(d)) {
                site_tokens.insert(token);
                token_cats[token].insert(d.category_ids.begin(), d.category_ids.end());
            }
        }
        for (const auto& token : site_tokens) {
            auto& c = candidates[token];
            c.support += 1;
            c.cats.insert(token_cats[token].begin(), token_cats[token].end());
        }
    }

    FeatureSchema schema;
    schema.min_support = min_support;
    schema.corpus_size = corpus.size();
    if (candidate_count) *candidate_count = candidates.size();
    for (const auto& [token, cand] : candidates) {
        if (cand.support < min_support) continue;
        BinaryFeature f;
        f.token = token;
        f.category_ids.assign(cand.cats.begin(), cand.cats.end());
        schema.binary_features.push_back(std::move(f));
    }
    std::sort(schema.binary_features.begin(), schema.binary_features.end(),
              [](const BinaryFeature& a, const BinaryFeature& b) {
                  int ca = a.category_ids.empty() ? INT_MAX : a.category_ids.front();
                  int cb = b.category_ids.empty() ? INT_MAX : b.category_ids.front();
                  if (ca != cb) return ca < cb;
                  return a.token < b.token;
              });

    for (const auto& [id, info] : taxonomy.categories()) {
        CountFeature c;
        c.kind = CountFeature::Kind::Category;
        c.category_id = id;
        c.name = info.name;
        c.meta_category = info.meta_category;
        schema.count_features.push_back(std::move(c));
    }
    for (const auto& meta : taxonomy.meta_categories()) {
        CountFeature c;
        c.kind = CountFeature::Kind::MetaCategory;
        c.name = meta;
        c.meta_category = meta;
        schema.count_features.push_back(std::move(c));
    }
    schema.schema_hash = schema.compute_hash();
    return schema;
}

std::string FeatureSchema::slot_name(size_t index) const {
    if (index < binary_features.size()) return binary_features[index].token;
    index -= binary_features.size();
    if (index < count_features.size()) return count_features[index].key();
    index -= count_features.size();
    if (index < sector_codes.size()) return "sector:" + sector_codes[index];
    throw DomriskError("slot index out of range");
}

std::string FeatureSchema::compute_hash() const {
    Fnv1a h;
    for (const auto& f : binary_features) {
        h.update("b:");
        h.update(f.token);
        for (int c : f.category_ids) h.update_u64(static_cast<uint64_t>(c));
        h.update("\n");
    }
    for (const auto& c : count_features) {
        h.update("c:");
        h.update(c.key());
        h.update("|");
        h.update(c.meta_category);
        h.update_u64(static_cast<uint64_t>(c.category_id));
        h.update("\n");
    }
    for (const auto& s : sector_codes) {
        h.update("s:");
        h.update(s);
        h.update("\n");
    }
    h.update_u64(static_cast<uint64_t>(min_support));
    return h.hex();
}

size_t count_features(const TaxonomyNode& node, const FeatureSchema& schema) {
    switch (node.kind) {
        case TaxonomyNode::Kind::Category: {
            bool known = std::any_of(schema.count_features.begin(), schema.count_features.end(),
                                     [&](const CountFeature& c) {
                                         return c.kind == CountFeature::Kind::Category &&
                                                c.category_id == node.category_id;
                                     });
            if (!known)
                throw DomriskError("count_features: unknown category id " +
                                   std::to_string(node.category_id));
            size_t binaries = 0;
            for (const auto& f : schema.binary_features)
                if (std::find(f.category_ids.begin(), f.category_ids.end(), node.category_id) !=
                    f.category_ids.end())
                    ++binaries;
            return binaries + 1;
        }
        case TaxonomyNode::Kind::MetaCategory: {
            std::set<int> member_cats;
            for (const auto& c : schema.count_features)
                if (c.kind == CountFeature::Kind::Category && c.meta_category == node.meta_name)
                    member_cats.insert(c.category_id);
            bool meta_known =
                std::any_of(schema.count_features.begin(), schema.count_features.end(),
                            [&](const CountFeature& c) {
                                return c.kind == CountFeature::Kind::MetaCategory &&
                                       c.name == node.meta_name;
                            });
            if (!meta_known)
                throw DomriskError("count_features: unknown meta-category '" + node.meta_name +
                                   "'");
            size_t binaries = 0;
            for (const auto& f : schema.binary_features) {
                bool member = std::any_of(f.category_ids.begin(), f.category_ids.end(),
                                          [&](int id) { return member_cats.count(id) > 0; });
                if (member) ++binaries;  // counted once even when in several member categories
            }
            return binaries + member_cats.size() + 1;
        }
        case TaxonomyNode::Kind::Root:
            return schema.binary_features.size() + schema.count_features.size();
    }
    throw DomriskError("count_features: invalid node");
}

FeatureVector vectorize(const DetectionSet& detections, const FeatureSchema& schema) {
    FeatureVector vec;
    vec.schema_hash = schema.schema_hash;
    vec.values.assign(schema.width(), 0.0);

    std::set<std::string> tokens;
    for (const auto& d : detections) {
        auto t = expand_versions(d);
        tokens.insert(t.begin(), t.end());
    }
    for (size_t i = 0; i < schema.binary_features.size(); ++i)
        if (tokens.count(schema.binary_features[i].token)) vec.values[i] = 1.0;

    // counts are over distinct technologies, including those whose
    // binaries were pruned from the schema
    std::map<int, std::set<std::string>> techs_per_category;
    for (const auto& d : detections)
        for (int cat : d.category_ids) techs_per_category[cat].insert(d.technology);

    std::map<std::string, std::set<int>> cats_per_meta;
    for (const auto& c : schema.count_features)
        if (c.kind == CountFeature::Kind::Category)
            cats_per_meta[c.meta_category].insert(c.category_id);

    size_t base = schema.binary_features.size();
    for (size_t i = 0; i < schema.count_features.size(); ++i) {
        const CountFeature& c = schema.count_features[i];
        if (c.kind == CountFeature::Kind::Category) {
            auto it = techs_per_category.find(c.category_id);
            vec.values[base + i] =
                it == techs_per_category.end() ? 0.0 : static_cast<double>(it->second.size());
        } else {
            std::set<std::string> techs;
            for (int cat : cats_per_meta[c.name]) {
                auto it = techs_per_category.find(cat);
                if (it != techs_per_category.end())
                    techs.insert(it->second.begin(), it->second.end());
            }
            vec.values[base + i] = static_cast<double>(techs.size());
        }
    }
    return vec;
}

nlohmann::json FeatureSchema::to_json() const {
    nlohmann::json binaries = nlohmann::json::array();
    for (const auto& f : binary_features)
        binaries.push_back({{"token", f.token}, {"cats", f.category_ids}});
    nlohmann::json counts = nlohmann::json::array();
    for (const auto& c : count_features) {
        nlohmann::json entry = {{"name", c.name}, {"meta", c.meta_category}};
        if (c.kind == CountFeature::Kind::Category) {
            entry["kind"] = "category";
            entry["id"] = c.category_id;
        } else {
            entry["kind"] = "meta";
        }
        counts.push_back(entry);
    }
    nlohmann::json doc = {{"binary_features", binaries},
                          {"count_features", counts},
                          {"min_support", min_support},
                          {"corpus_size", corpus_size},
                          {"schema_hash", schema_hash}};
    if (!sector_codes.empty()) doc["sector_codes"] = sector_codes;
    return doc;
}

FeatureSchema FeatureSchema::from_json(const nlohmann::json& doc) {
    FeatureSchema schema;
    for (const auto& f : doc.at("binary_features")) {
        BinaryFeature b;
        b.token = f.at("token").get<std::string>();
        b.category_ids = f.at("cats").get<std::vector<int>>();
        schema.binary_features.push_back(std::move(b));
    }
    for (const auto& c : doc.at("count_features")) {
        CountFeature cf;
        std::string kind = c.at("kind").get<std::string>();
        cf.kind = kind == "category" ? CountFeature::Kind::Category
                                     : CountFeature::Kind::MetaCategory;
        if (cf.kind == CountFeature::Kind::Category) cf.category_id = c.at("id").get<int>();
        cf.name = c.at("name").get<std::string>();
        cf.meta_category = c.at("meta").get<std::string>();
        schema.count_features.push_back(std::move(cf));
    }
    if (doc.contains("sector_codes"))
        schema.sector_codes = doc.at("sector_codes").get<std::vector<std::string>>();
    schema.min_support = doc.at("min_support").get<int>();
    schema.corpus_size = doc.at("corpus_size").get<size_t>();
    schema.schema_hash = doc.at("schema_hash").get<std::string>();
    if (schema.schema_hash != schema.compute_hash())
        throw DomriskError("schema file hash mismatch: stored " + schema.schema_hash +
                           ", computed " + schema.compute_hash());
    return schema;
}

void FeatureSchema::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DomriskError("cannot write schema file: " + path);
    out << to_json().dump(2) << "\n";
}

FeatureSchema FeatureSchema::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomriskError("cannot open schema file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DomriskError("schema file " + path + " is not valid JSON: " + e.what());
    }
    return from_json(doc);
}

void save_vector_matrix(const std::string& path, const std::vector<std::string>& domains,
                        const std::vector<FeatureVector>& rows, const FeatureSchema& schema,
                        const std::string& manifest_line) {
    if (domains.size() != rows.size())
        throw DomriskError("vector matrix: domains/rows length mismatch");
    std::ofstream out(path);
    if (!out) throw DomriskError("cannot write vector matrix: " + path);
    if (!manifest_line.empty()) out << manifest_line << "\n";
    std::vector<std::string> header{"domain"};
    for (size_t i = 0; i < schema.width(); ++i) header.push_back(schema.slot_name(i));
    out << csv_join(header) << "\n";
    for (size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].schema_hash != schema.schema_hash)
            throw DomriskError("vector matrix: schema hash mismatch for domain " + domains[r]);
        std::string line = csv_escape(domains[r]);
        for (double v : rows[r].values) {
            line += ',';
            line += std::to_string(static_cast<long long>(v));
        }
        out << line << "\n";
    }
}

std::pair<std::vector<std::string>, std::vector<FeatureVector>> load_vector_matrix(
    const std::string& path, const FeatureSchema& schema) {
    auto rows = read_csv(path);
    if (rows.empty()) throw DomriskError("vector matrix is empty: " + path);
    const auto& header = rows[0];
    if (header.size() != schema.width() + 1)
        throw DomriskError("vector matrix width " + std::to_string(header.size() - 1) +
                           " does not match schema width " + std::to_string(schema.width()));
    std::vector<std::string> domains;
    std::vector<FeatureVector> vectors;
    for (size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != header.size())
            throw DomriskError("vector matrix: ragged row " + std::to_string(r));
        domains.push_back(rows[r][0]);
        FeatureVector v;
        v.schema_hash = schema.schema_hash;
        v.values.reserve(schema.width());
        for (size_t i = 1; i < rows[r].size(); ++i) v.values.push_back(std::stod(rows[r][i]));
        vectors.push_back(std::move(v));
    }
    return {std::move(domains), std::move(vectors)};
}

}  // namespace domrisk
