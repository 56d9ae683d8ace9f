#pragma once

#include <map>
#include <string>
#include <vector>

#include "domrisk/fingerprint.hpp"
#include "domrisk/taxonomy.hpp"

namespace domrisk::test {

inline Taxonomy small_taxonomy() {
    std::map<int, CategoryInfo> cats;
    cats[1] = {"CMS", "Software Stack"};
    cats[2] = {"JavaScript libraries", "Software Stack"};
    cats[3] = {"Analytics", "Web Analytics/Pixel Trackers"};
    cats[4] = {"Cookie compliance", "Security/Privacy"};
    cats[5] = {"Security", "Security/Privacy"};
    cats[6] = {"Authentication", "Security/Privacy"};
    cats[7] = {"CDN", "Internet Hosting"};
    cats[8] = {"Web servers", "Software Stack"};
    cats[9] = {"Programming languages", "Software Stack"};
    return Taxonomy(std::move(cats));
}

inline Detection make_detection(std::string name, std::vector<std::string> versions,
                                std::vector<int> cats) {
    Detection d;
    d.technology = std::move(name);
    d.versions = std::move(versions);
    d.category_ids = std::move(cats);
    return d;
}

inline DetectionSet make_set(std::vector<Detection> ds) {
    std::sort(ds.begin(), ds.end(), [](const Detection& a, const Detection& b) {
        return a.technology < b.technology;
    });
    return ds;
}

inline PageBundle make_page(std::string url, int status = 200, std::string body = "") {
    PageBundle p;
    p.url = std::move(url);
    p.status = status;
    p.body = std::move(body);
    p.fetched_at = Timestamp{CivilDate{2024, 5, 1}, 12, 0, 0};
    return p;
}

/// Exhaustive pairwise AUC: correctly ordered pairs + half credit for
/// ties, over all positive-negative pairs. The oracle for rank-based AUC.
inline double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    double correct = 0.0;
    size_t pairs = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) correct += 1.0;
            else if (scores[i] == scores[j]) correct += 0.5;
        }
    }
    return correct / static_cast<double>(pairs);
}

}  // namespace domrisk::test
