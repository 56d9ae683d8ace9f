#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "domrisk/dates.hpp"
#include "domrisk/fingerprint.hpp"

namespace domrisk {

/// Synthetic site corpus with planted technology-distribution differences
/// between incident and non-incident populations. Used by the acceptance
/// experiments and to (re)generate the shipped demo corpus.
struct SynthConfig {
    size_t n_positive = 1000;
    size_t n_negative = 1000;
    uint64_t seed = 1;
    /// 0 removes the class difference entirely; 1 is the full planted gap.
    double signal_strength = 1.0;
    int subpages = 2;
    /// Fraction of negative sites generated without any privacy page.
    double drop_privacy_fraction = 0.0;
    /// Fraction of sites with a sector assignment.
    double sector_coverage = 0.8;
};

struct SynthSite {
    std::string domain;
    int label = 0;
    std::string source;  // "vcdb-like" / "ransomware-like" for positives
    std::string org_name;
    CivilDate incident_date;  // positives only
    std::optional<std::string> sector;
    std::vector<PageBundle> pages;
};

struct SynthCorpus {
    nlohmann::json ruleset_doc;
    nlohmann::json taxonomy_doc;
    std::vector<SynthSite> sites;
};

SynthCorpus generate_synth_corpus(const SynthConfig& config);

/// Writes the corpus as pipeline inputs: bundles/<domain>.jsonl archives,
/// ruleset.json, taxonomy.json, incidents.csv, tranco.csv, domains.txt,
/// sectors.csv (domain,code) and search_map.json.
void write_synth_corpus(const SynthCorpus& corpus, const std::string& dir);

}  // namespace domrisk
