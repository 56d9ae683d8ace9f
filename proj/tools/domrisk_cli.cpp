// domrisk: crawl-driven technology fingerprinting, dataset assembly,
// boosted-tree risk scoring, attribution, and evaluation as composable
// subcommands. All state flows through files; reruns with identical
// inputs and seeds are byte-identical apart from live-crawl timestamps.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "domrisk/bundle_io.hpp"
#include "domrisk/crawler.hpp"
#include "domrisk/csv.hpp"
#include "domrisk/dataset.hpp"
#include "domrisk/evaluation.hpp"
#include "domrisk/fetchers.hpp"
#include "domrisk/gbdt.hpp"
#include "domrisk/sector.hpp"
#include "domrisk/shap.hpp"
#include "domrisk/snapshot.hpp"
#include "domrisk/svg.hpp"

namespace fs = std::filesystem;
using namespace domrisk;

namespace {

struct GlobalOptions {
    std::string config_path;
    uint64_t seed = 1;
    bool offline = false;
    bool strict_review = false;
    bool record = false;
    nlohmann::json config = nlohmann::json::object();

    void load() {
        if (config_path.empty()) return;
        std::ifstream in(config_path);
        if (!in) throw DomriskError("cannot open config file: " + config_path);
        try {
            in >> config;
        } catch (const nlohmann::json::exception& e) {
            throw DomriskError("config file is not valid JSON: " + std::string(e.what()));
        }
        if (config.contains("seed")) seed = config.at("seed").get<uint64_t>();
        if (config.contains("offline")) offline = config.at("offline").get<bool>();
    }

    // config value fills a CLI option the user left empty
    void fill(std::string& value, const char* key) const {
        if (value.empty() && config.contains(key)) value = config.at(key).get<std::string>();
    }
    void fill(int& value, const char* key, int unset) const {
        if (value == unset && config.contains(key)) value = config.at(key).get<int>();
    }

    std::string manifest_line() const {
        nlohmann::json canonical = config;
        canonical["seed"] = seed;
        return std::string("# domrisk v") + kToolVersion +
               " config=" + fnv1a_hex(canonical.dump()) + " seed=" + std::to_string(seed);
    }
};

struct TrainOverrides {
    double learning_rate = 0.1;
    int max_rounds = 1000;
    int max_leaves = 128;
    int max_bins = 32;
    int early_stopping = 50;

    void bind(CLI::App* cmd) {
        cmd->add_option("--learning-rate", learning_rate, "learning rate (default 0.1)");
        cmd->add_option("--max-rounds", max_rounds, "boosting rounds (default 1000)");
        cmd->add_option("--max-leaves", max_leaves, "leaf bound per tree (default 128)");
        cmd->add_option("--max-bins", max_bins, "histogram bins (default 32)");
        cmd->add_option("--early-stopping", early_stopping, "early stopping rounds (default 50)");
    }
};

TrainParams train_params_from(const GlobalOptions& global, const CLI::App* cmd,
                              const TrainOverrides& opts) {
    TrainParams params;
    if (global.config.contains("train")) {
        const auto& t = global.config.at("train");
        if (t.contains("learning_rate")) params.learning_rate = t.at("learning_rate");
        if (t.contains("max_rounds")) params.max_rounds = t.at("max_rounds");
        if (t.contains("max_leaves")) params.max_leaves = t.at("max_leaves");
        if (t.contains("max_bins")) params.max_bins = t.at("max_bins");
        if (t.contains("early_stopping_rounds"))
            params.early_stopping_rounds = t.at("early_stopping_rounds");
        if (t.contains("l2_leaf_penalty")) params.l2_leaf_penalty = t.at("l2_leaf_penalty");
        if (t.contains("min_child_weight")) params.min_child_weight = t.at("min_child_weight");
    }
    if (cmd->count("--learning-rate")) params.learning_rate = opts.learning_rate;
    if (cmd->count("--max-rounds")) params.max_rounds = opts.max_rounds;
    if (cmd->count("--max-leaves")) params.max_leaves = opts.max_leaves;
    if (cmd->count("--max-bins")) params.max_bins = opts.max_bins;
    if (cmd->count("--early-stopping")) params.early_stopping_rounds = opts.early_stopping;
    params.rng_seed = global.seed;
    return params;
}

CrawlPolicy crawl_policy_from(const GlobalOptions& global) {
    CrawlPolicy policy;
    if (global.config.contains("crawl")) {
        const auto& c = global.config.at("crawl");
        if (c.contains("max_random_links")) policy.max_random_links = c.at("max_random_links");
        if (c.contains("max_links_per_page")) policy.max_links_per_page = c.at("max_links_per_page");
        if (c.contains("max_privacy_links")) policy.max_privacy_links = c.at("max_privacy_links");
        if (c.contains("privacy_fallback_paths"))
            policy.privacy_fallback_paths =
                c.at("privacy_fallback_paths").get<std::vector<std::string>>();
        if (c.contains("per_request_delay_ms"))
            policy.per_request_delay = std::chrono::milliseconds(c.at("per_request_delay_ms"));
        if (c.contains("fetch_timeout_ms"))
            policy.fetch_timeout = std::chrono::milliseconds(c.at("fetch_timeout_ms"));
    }
    return policy;
}

std::vector<std::string> read_domains_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomriskError("cannot open domains file: " + path);
    std::vector<std::string> domains;
    std::string line;
    while (std::getline(in, line)) {
        std::string d = trim(line);
        if (d.empty() || d[0] == '#') continue;
        if (d.find(',') != std::string::npos) {  // rank,domain rows
            auto fields = csv_split_line(d);
            if (fields.size() == 2 && fields[0] != "rank") domains.push_back(to_lower(fields[1]));
        } else if (d != "domain") {
            domains.push_back(to_lower(d));
        }
    }
    if (domains.empty()) throw DomriskError("domains file is empty: " + path);
    return domains;
}

std::map<std::string, std::string> read_sector_map(const std::string& path) {
    std::map<std::string, std::string> sectors;
    for (const auto& row : read_csv(path)) {
        if (row.size() != 2 || row[0] == "domain") continue;
        sectors[to_lower(row[0])] = row[1];
    }
    return sectors;
}

struct ManifestRow {
    std::string domain;
    bool success = false;
    bool has_privacy_page = false;
    std::string entry_url;
    size_t n_pages = 0;
    size_t n_technologies = 0;
};

std::vector<ManifestRow> read_crawl_manifest(const std::string& path) {
    std::vector<ManifestRow> rows;
    for (const auto& fields : read_csv(path)) {
        if (fields.size() != 6 || fields[0] == "domain") continue;
        ManifestRow row;
        row.domain = fields[0];
        row.success = fields[1] == "1";
        row.has_privacy_page = fields[2] == "1";
        row.entry_url = fields[3];
        row.n_pages = std::stoul(fields[4]);
        row.n_technologies = std::stoul(fields[5]);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DomriskError("crawl manifest has no rows: " + path);
    return rows;
}

std::string sanitize_filename(const std::string& name) {
    std::string out;
    for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return out;
}

// ---------------------------------------------------------------- crawl

int cmd_crawl(GlobalOptions& global, std::string domains_path, std::string ruleset_path,
              std::string taxonomy_path, std::string corpus_dir, std::string out_dir) {
    global.fill(domains_path, "domains");
    global.fill(ruleset_path, "ruleset");
    global.fill(taxonomy_path, "taxonomy");
    global.fill(corpus_dir, "corpus");
    global.fill(out_dir, "out");
    if (out_dir.empty()) throw DomriskError("crawl: --out is required");

    auto taxonomy = Taxonomy::load_file(taxonomy_path);
    auto ruleset = load_ruleset_file(ruleset_path, taxonomy);
    for (const auto& w : ruleset.warnings()) std::cerr << "warning: " << w << "\n";
    auto domains = read_domains_file(domains_path);
    CrawlPolicy policy = crawl_policy_from(global);

    std::unique_ptr<Fetcher> fetcher;
    if (global.offline || !corpus_dir.empty()) {
        if (corpus_dir.empty()) throw DomriskError("crawl: --offline requires --corpus");
        auto recorded = std::make_unique<RecordedFetcher>();
        recorded->load_corpus_dir(corpus_dir);
        fetcher = std::move(recorded);
    } else {
        fetcher = std::make_unique<HttpFetcher>(policy.fetch_timeout);
    }

    fs::create_directories(fs::path(out_dir) / "bundles");
    std::vector<CrawlResult> results(domains.size());
    std::vector<std::string> errors(domains.size());

    const long n = static_cast<long>(domains.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        CrawlPolicy site_policy = policy;
        site_policy.rng_seed = derive_seed(global.seed, domains[static_cast<size_t>(i)]);
        try {
            results[static_cast<size_t>(i)] =
                crawl_site(domains[static_cast<size_t>(i)], *fetcher, ruleset, site_policy);
        } catch (const std::exception& e) {
            errors[static_cast<size_t>(i)] = e.what();
            results[static_cast<size_t>(i)].domain = domains[static_cast<size_t>(i)];
        }
    }

    std::ofstream manifest(fs::path(out_dir) / "crawl_manifest.csv");
    manifest << global.manifest_line() << "\n";
    manifest << "domain,success,has_privacy_page,entry_url,n_pages,n_technologies\n";
    size_t successes = 0, privacy = 0;
    for (size_t i = 0; i < results.size(); ++i) {
        const CrawlResult& r = results[i];
        if (!errors[i].empty()) std::cerr << "error crawling " << r.domain << ": " << errors[i] << "\n";
        if (!r.pages.empty())
            save_bundle_archive(
                (fs::path(out_dir) / "bundles" / (r.domain + ".jsonl")).string(), r.pages);
        manifest << csv_join({r.domain, r.success ? "1" : "0", r.has_privacy_page ? "1" : "0",
                              r.entry_url, std::to_string(r.pages.size()),
                              std::to_string(r.detections.size())})
                 << "\n";
        successes += r.success;
        privacy += r.has_privacy_page;
    }
    std::cout << "crawled " << domains.size() << " domains: " << successes << " successful ("
              << (100.0 * static_cast<double>(successes) / static_cast<double>(domains.size()))
              << "% yield), " << privacy << " reached a privacy page\n";
    return successes == 0 ? 1 : 0;
}

// ---------------------------------------------------------------- build

int cmd_build(GlobalOptions& global, std::string manifest_path, std::string bundles_dir,
              std::string ruleset_path, std::string taxonomy_path, std::string incidents_path,
              std::string negatives_path, std::string sectors_path, std::string search_map_path,
              std::string out_dir, int min_support, int n_negatives, bool use_sector) {
    global.fill(manifest_path, "manifest");
    global.fill(bundles_dir, "bundles");
    global.fill(ruleset_path, "ruleset");
    global.fill(taxonomy_path, "taxonomy");
    global.fill(incidents_path, "incidents");
    global.fill(negatives_path, "negatives");
    global.fill(sectors_path, "sectors");
    global.fill(search_map_path, "search_map");
    global.fill(out_dir, "out");
    global.fill(min_support, "min_support", -1);
    if (min_support < 0) min_support = 20;
    if (out_dir.empty()) throw DomriskError("build: --out is required");

    auto taxonomy = Taxonomy::load_file(taxonomy_path);
    auto ruleset = load_ruleset_file(ruleset_path, taxonomy);
    auto manifest = read_crawl_manifest(manifest_path);

    // detections for every successfully crawled domain
    std::map<std::string, DetectionSet> detections;
    std::map<std::string, const ManifestRow*> manifest_by_domain;
    RecordedFetcher landing_fetcher;
    for (const auto& row : manifest) {
        manifest_by_domain[row.domain] = &row;
        if (!row.success) continue;
        auto pages =
            load_bundle_archive((fs::path(bundles_dir) / (row.domain + ".jsonl")).string());
        std::vector<DetectionSet> per_page;
        for (const auto& page : pages) {
            per_page.push_back(detect(page, ruleset));
            landing_fetcher.add_page(page);
        }
        detections[row.domain] = merge_detections(per_page);
    }
    if (detections.empty()) throw DomriskError("build: no successful crawls in manifest");

    std::vector<DetectionSet> corpus;
    corpus.reserve(detections.size());
    for (const auto& [domain, set] : detections) corpus.push_back(set);
    size_t candidates = 0;
    FeatureSchema schema = build_schema(corpus, taxonomy, min_support, &candidates);
    if (use_sector) schema = extend_schema(schema);
    std::cout << "schema: " << candidates << " candidate binary features, "
              << schema.binary_features.size() << " retained (support >= " << min_support
              << "), width " << schema.width() << "\n";

    // positives: incident -> domain mapping over the recorded landing pages
    auto incidents = load_incident_csv(incidents_path);
    std::unique_ptr<SearchClient> search;
    if (!search_map_path.empty()) {
        search = std::make_unique<StubSearchClient>(
            StubSearchClient::from_json_file(search_map_path));
    } else {
        throw DomriskError("build: --search-map is required (offline search stub)");
    }
    PageContentNameExtractor extractor;

    std::ofstream review(fs::path(out_dir) / "review.csv");
    review << global.manifest_line() << "\n";
    review << "raw_id,organization_name,domain,extracted_name,similarity\n";
    std::ofstream unmapped(fs::path(out_dir) / "unmapped.csv");
    unmapped << global.manifest_line() << "\n";
    unmapped << "raw_id,organization_name,error\n";

    std::vector<PositiveInput> positives;
    size_t needs_review = 0, unmapped_count = 0, skipped = 0;
    for (const auto& incident : incidents) {
        auto outcome = map_incident_to_domain(incident, *search, landing_fetcher, extractor);
        if (!outcome.mapping) {
            ++unmapped_count;
            unmapped << csv_join({incident.raw_id, incident.organization_name, outcome.error})
                     << "\n";
            continue;
        }
        const DomainMapping& m = *outcome.mapping;
        if (m.needs_review) {
            ++needs_review;
            char sim[16];
            std::snprintf(sim, sizeof(sim), "%.4f", m.similarity);
            review << csv_join({incident.raw_id, incident.organization_name, m.domain,
                                m.extracted_name, sim})
                   << "\n";
        }
        auto it = manifest_by_domain.find(m.domain);
        if (it == manifest_by_domain.end() || !it->second->success) {
            ++skipped;
            continue;
        }
        positives.push_back(PositiveInput{m.domain, incident.source, incident.incident_date});
    }
    if (global.strict_review && needs_review > 0)
        throw DomriskError("build: " + std::to_string(needs_review) +
                           " mappings need review (strict-review mode)");

    // negatives: filtered by successful crawl + privacy page, then sampled
    auto ranked = load_ranked_domains(negatives_path);
    std::vector<std::string> negative_pool;
    for (const auto& domain : ranked) {
        auto it = manifest_by_domain.find(domain);
        if (it != manifest_by_domain.end() && it->second->success &&
            it->second->has_privacy_page)
            negative_pool.push_back(domain);
    }
    std::vector<std::string> negative_domains = negative_pool;
    if (n_negatives >= 0 && static_cast<size_t>(n_negatives) < negative_pool.size())
        negative_domains =
            sample_negatives(negative_pool, static_cast<size_t>(n_negatives), global.seed);

    std::vector<NegativeInput> negatives;
    for (const auto& domain : negative_domains) {
        CivilDate ref =
            negative_reference_date(CivilDate{2022, 1, 1}, derive_seed(global.seed, domain));
        negatives.push_back(NegativeInput{domain, ref});
    }

    std::map<std::string, std::string> sectors;
    if (!sectors_path.empty()) sectors = read_sector_map(sectors_path);

    std::vector<std::string> log;
    LabeledDataset dataset =
        assemble_dataset(positives, negatives, detections, schema, sectors, &log);
    for (const auto& msg : log) std::cerr << "note: " << msg << "\n";

    fs::create_directories(out_dir);
    schema.save_file((fs::path(out_dir) / "schema.json").string());
    std::vector<std::string> row_domains;
    std::vector<FeatureVector> row_vectors;
    for (const auto& row : dataset.rows) {
        row_domains.push_back(row.domain);
        row_vectors.push_back(row.vector);
    }
    save_vector_matrix((fs::path(out_dir) / "vectors.csv").string(), row_domains, row_vectors,
                       schema, global.manifest_line());
    save_dataset_csv((fs::path(out_dir) / "dataset.csv").string(), dataset,
                     global.manifest_line());

    size_t n_pos = 0;
    for (const auto& row : dataset.rows) n_pos += static_cast<size_t>(row.label);
    std::cout << "dataset: " << dataset.rows.size() << " rows (" << n_pos << " positive, "
              << dataset.rows.size() - n_pos << " negative); " << unmapped_count << " unmapped, "
              << skipped << " skipped (no valid crawl), " << needs_review
              << " flagged for review\n";
    return 0;
}

// ---------------------------------------------------------------- train

int cmd_train(GlobalOptions& global, const CLI::App* cmd, const TrainOverrides& opts,
              std::string dataset_path, std::string vectors_path, std::string schema_path,
              std::string out_dir, int k) {
    global.fill(dataset_path, "dataset");
    global.fill(vectors_path, "vectors");
    global.fill(schema_path, "schema");
    global.fill(out_dir, "out");
    global.fill(k, "k", -1);
    if (k < 0) k = 5;
    if (out_dir.empty()) throw DomriskError("train: --out is required");

    auto schema = FeatureSchema::load_file(schema_path);
    auto dataset = load_dataset_csv(dataset_path, vectors_path, schema);
    TrainParams params = train_params_from(global, cmd, opts);

    CvResult cv = kfold_cv(dataset, k, params, global.seed);
    fs::create_directories(out_dir);
    for (size_t fold = 0; fold < cv.fold_models.size(); ++fold)
        cv.fold_models[fold].save_file(
            (fs::path(out_dir) / ("model_fold" + std::to_string(fold) + ".json")).string());

    std::ofstream assignments(fs::path(out_dir) / "fold_assignments.csv");
    assignments << global.manifest_line() << "\n";
    assignments << "domain,fold\n";
    for (const auto& [domain, fold] : cv.fold_assignments)
        assignments << csv_join({domain, std::to_string(fold)}) << "\n";

    std::ofstream manifests(fs::path(out_dir) / "fold_manifests.csv");
    manifests << global.manifest_line() << "\n";
    manifests << "fold,domain\n";
    for (size_t fold = 0; fold < cv.fold_training_domains.size(); ++fold)
        for (const auto& domain : cv.fold_training_domains[fold])
            manifests << csv_join({std::to_string(fold), domain}) << "\n";

    std::ofstream oof(fs::path(out_dir) / "oof_scores.csv");
    oof << global.manifest_line() << "\n";
    oof << "domain,label,score\n";
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& row : dataset.rows) {
        double score = cv.oof_scores.at(row.domain);
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.10f", score);
        oof << csv_join({row.domain, std::to_string(row.label), buf}) << "\n";
        scores.push_back(score);
        labels.push_back(row.label);
    }
    std::cout << "trained " << k << " fold models; out-of-fold AUC " << auc(scores, labels)
              << "\n";
    for (size_t fold = 0; fold < cv.fold_models.size(); ++fold)
        std::cout << "  fold " << fold << ": best_round " << cv.fold_models[fold].best_round
                  << " of " << cv.fold_models[fold].trees.size() << " trees\n";
    return 0;
}

std::vector<TreeEnsemble> load_fold_models(const std::string& models_dir) {
    std::vector<TreeEnsemble> models;
    for (int fold = 0;; ++fold) {
        fs::path path = fs::path(models_dir) / ("model_fold" + std::to_string(fold) + ".json");
        if (!fs::exists(path)) break;
        models.push_back(TreeEnsemble::load_file(path.string()));
    }
    if (models.empty())
        throw DomriskError("no model_fold<n>.json files under " + models_dir);
    for (const auto& m : models)
        if (m.schema_hash != models[0].schema_hash)
            throw DomriskError("fold models disagree on schema hash: " + m.schema_hash +
                               " vs " + models[0].schema_hash);
    return models;
}

// ---------------------------------------------------------------- score

int cmd_score(GlobalOptions& global, std::string models_dir, std::string schema_path,
              std::string vectors_path, std::string out_path) {
    global.fill(models_dir, "models");
    global.fill(schema_path, "schema");
    global.fill(vectors_path, "vectors");
    global.fill(out_path, "scores_out");
    if (out_path.empty()) throw DomriskError("score: --out is required");

    auto schema = FeatureSchema::load_file(schema_path);
    auto models = load_fold_models(models_dir);
    if (models[0].schema_hash != schema.schema_hash)
        throw DomriskError("schema hash mismatch: models " + models[0].schema_hash +
                           ", schema " + schema.schema_hash);
    auto [domains, vectors] = load_vector_matrix(vectors_path, schema);

    std::ofstream out(out_path);
    if (!out) throw DomriskError("cannot write scores: " + out_path);
    out << global.manifest_line() << "\n";
    out << "domain,score\n";
    for (size_t i = 0; i < domains.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.10f", cv_predict_mean(models, vectors[i]));
        out << csv_join({domains[i], buf}) << "\n";
    }
    std::cout << "scored " << domains.size() << " domains with " << models.size()
              << " fold models\n";
    return 0;
}

// ---------------------------------------------------------------- evaluate

int cmd_evaluate(GlobalOptions& global, const CLI::App* cmd, const TrainOverrides& opts,
                 std::string dataset_path, std::string vectors_path, std::string schema_path,
                 std::string out_dir, int k, std::vector<std::string> sources,
                 std::string date_cutoff, bool no_cross) {
    global.fill(dataset_path, "dataset");
    global.fill(vectors_path, "vectors");
    global.fill(schema_path, "schema");
    global.fill(out_dir, "out");
    global.fill(k, "k", -1);
    if (k < 0) k = 5;
    if (out_dir.empty()) throw DomriskError("evaluate: --out is required");
    if (sources.empty() && global.config.contains("sources"))
        sources = global.config.at("sources").get<std::vector<std::string>>();
    if (date_cutoff.empty() && global.config.contains("date_cutoff"))
        date_cutoff = global.config.at("date_cutoff").get<std::string>();

    auto schema = FeatureSchema::load_file(schema_path);
    auto dataset = load_dataset_csv(dataset_path, vectors_path, schema);
    TrainParams params = train_params_from(global, cmd, opts);

    ProtocolSpec spec;
    spec.positive_sources = sources;
    spec.k = k;
    spec.rng_seed = global.seed;
    spec.run_cross = !no_cross;
    if (!date_cutoff.empty()) spec.date_cutoff = parse_date(date_cutoff);

    ProtocolReport report = protocol_eval(dataset, params, spec);
    fs::create_directories(out_dir);

    nlohmann::json summary;
    summary["manifest"] = {{"tool", std::string("domrisk v") + kToolVersion},
                           {"seed", global.seed},
                           {"k", k}};
    std::vector<std::pair<std::string, RocCurve>> curves_for_svg;
    for (const auto& curve : report.curves) {
        summary["curves"][curve.name] = curve.auc;
        curves_for_svg.push_back({curve.name, curve.curve});
        std::ofstream points(fs::path(out_dir) /
                             ("roc_" + sanitize_filename(curve.name) + ".csv"));
        points << global.manifest_line() << "\n";
        points << "threshold,fpr,tpr\n";
        for (const auto& p : curve.curve.points) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), "%.10g,%.10f,%.10f", p.threshold, p.fpr, p.tpr);
            points << buf << "\n";
        }
    }

    auto table = calibration(report.primary_scores, report.primary_labels, 40);
    {
        std::ofstream cal(fs::path(out_dir) / "calibration.csv");
        cal << global.manifest_line() << "\n";
        cal << "bin_low,bin_high,mean_predicted,empirical_rate,count\n";
        for (const auto& bin : table.bins) {
            char buf[128];
            std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f,%zu", bin.bin_low, bin.bin_high,
                          bin.mean_predicted, bin.empirical_rate, bin.count);
            cal << buf << "\n";
        }
    }
    {
        std::ofstream svg(fs::path(out_dir) / "roc.svg");
        svg << render_roc_svg(curves_for_svg);
    }
    {
        std::ofstream svg(fs::path(out_dir) / "calibration.svg");
        svg << render_calibration_svg(table);
    }
    {
        std::ofstream svg(fs::path(out_dir) / "score_hist.svg");
        svg << render_score_histogram_svg(report.primary_scores, report.primary_labels);
    }
    {
        std::ofstream out(fs::path(out_dir) / "report.json");
        out << summary.dump(2) << "\n";
    }
    for (const auto& curve : report.curves)
        std::cout << curve.name << ": AUC " << curve.auc << "\n";
    return 0;
}

// ---------------------------------------------------------------- explain

int cmd_explain(GlobalOptions& global, std::string models_dir, std::string schema_path,
                std::string vectors_path, std::string out_dir, bool per_sample_features) {
    global.fill(models_dir, "models");
    global.fill(schema_path, "schema");
    global.fill(vectors_path, "vectors");
    global.fill(out_dir, "out");
    if (out_dir.empty()) throw DomriskError("explain: --out is required");

    auto schema = FeatureSchema::load_file(schema_path);
    auto models = load_fold_models(models_dir);
    if (models[0].schema_hash != schema.schema_hash)
        throw DomriskError("schema hash mismatch: models " + models[0].schema_hash +
                           ", schema " + schema.schema_hash);
    auto [domains, vectors] = load_vector_matrix(vectors_path, schema);

    // fold-averaged attributions, in margin space
    std::vector<AttributionVector> attributions(vectors.size());
    for (size_t m = 0; m < models.size(); ++m) {
        auto fold_attr = shap_matrix_parallel(models[m], vectors);
        for (size_t i = 0; i < vectors.size(); ++i) {
            if (m == 0) {
                attributions[i] = fold_attr[i];
            } else {
                for (size_t f = 0; f < schema.width(); ++f)
                    attributions[i].per_feature[f] += fold_attr[i].per_feature[f];
                attributions[i].base_value += fold_attr[i].base_value;
            }
        }
    }
    double n_models = static_cast<double>(models.size());
    for (auto& attr : attributions) {
        for (auto& v : attr.per_feature) v /= n_models;
        attr.base_value /= n_models;
    }

    // local accuracy against the fold-mean margin
    double max_gap = 0.0;
    for (size_t i = 0; i < vectors.size(); ++i) {
        double mean_margin = 0.0;
        for (const auto& model : models) mean_margin += model.predict_margin(vectors[i].values);
        mean_margin /= n_models;
        double total = attributions[i].base_value;
        for (double v : attributions[i].per_feature) total += v;
        max_gap = std::max(max_gap, std::abs(total - mean_margin));
    }

    fs::create_directories(out_dir);
    {
        std::ofstream out(fs::path(out_dir) / "per_sample_groups.csv");
        out << global.manifest_line() << "\n";
        out << "domain,group_key,value\n";
        for (size_t i = 0; i < vectors.size(); ++i) {
            for (const auto& g : group_contributions(attributions[i], schema)) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.8f", g.value);
                out << csv_join({domains[i], g.group_key, buf}) << "\n";
            }
            if (per_sample_features) {
                for (size_t f = 0; f < schema.width(); ++f) {
                    if (attributions[i].per_feature[f] == 0.0) continue;
                    char buf[32];
                    std::snprintf(buf, sizeof(buf), "%.8f", attributions[i].per_feature[f]);
                    out << csv_join({domains[i], "feature:" + schema.slot_name(f), buf}) << "\n";
                }
            }
        }
    }
    auto write_ranking = [&](const std::string& name,
                             const std::vector<RankedImportance>& ranking) {
        std::ofstream out(fs::path(out_dir) / name);
        out << global.manifest_line() << "\n";
        out << "group_key,mean_abs,rank\n";
        for (size_t r = 0; r < ranking.size(); ++r) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.8f", ranking[r].mean_abs);
            out << csv_join({ranking[r].key, buf, std::to_string(r + 1)}) << "\n";
        }
    };
    write_ranking("global_technologies.csv", global_importance(attributions, schema));

    auto groups = global_group_importance(attributions, schema);
    std::vector<RankedImportance> categories, metas;
    for (const auto& g : groups) {
        if (g.key.rfind("category:", 0) == 0) categories.push_back(g);
        else if (g.key.rfind("meta:", 0) == 0) metas.push_back(g);
        else categories.push_back(g);  // sector rides with categories
    }
    write_ranking("global_categories.csv", categories);
    write_ranking("global_meta.csv", metas);

    std::cout << "explained " << vectors.size() << " samples over " << models.size()
              << " fold models; max |base + sum(phi) - margin| = " << max_gap << "\n";
    return max_gap < 1e-6 ? 0 : 1;
}

// ---------------------------------------------------------------- snapshot-select

int cmd_snapshot_select(GlobalOptions& global, std::string url, std::string date_str,
                        std::string endpoint, std::string stub_path) {
    global.fill(endpoint, "cdx_endpoint");
    CivilDate date = parse_date(date_str);

    std::unique_ptr<CdxClient> client;
    if (!stub_path.empty()) {
        auto stub = std::make_unique<StubCdxClient>();
        std::ifstream in(stub_path);
        if (!in) throw DomriskError("cannot open stub index: " + stub_path);
        nlohmann::json doc;
        in >> doc;
        for (const auto& [stub_url, rows] : doc.items()) {
            for (const auto& row : rows) {
                CdxRow r;
                r.urlkey = row.value("urlkey", "");
                r.timestamp = parse_cdx_timestamp(row.at("timestamp").get<std::string>());
                r.original = row.value("original", stub_url);
                r.mimetype = row.value("mimetype", "text/html");
                r.statuscode = row.value("statuscode", 200);
                r.digest = row.value("digest", "");
                r.length = row.value("length", 0);
                stub->add(stub_url, std::move(r));
            }
        }
        client = std::move(stub);
    } else if (!endpoint.empty()) {
        client = std::make_unique<HttpCdxClient>(endpoint);
    } else {
        throw DomriskError("snapshot-select: --cdx-endpoint or --stub-index is required");
    }

    auto snapshot = select_snapshot(url, date, *client);
    if (!snapshot) {
        std::cout << "absent\n";
        return 0;
    }
    std::cout << format_cdx_timestamp(snapshot->timestamp) << " " << snapshot->original << " "
              << snapshot->statuscode << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"domain technology-signature risk scoring pipeline"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--config", global.config_path, "JSON config file mirroring the run options");
    app.add_option("--seed", global.seed, "global RNG seed recorded in output manifests");
    app.add_flag("--offline", global.offline, "never touch the network; use recorded corpora");
    app.add_flag("--strict-review", global.strict_review,
                 "fail when any domain mapping needs manual review");
    app.add_flag("--record", global.record, "write fetched pages as bundle archives");

    // crawl
    auto* crawl = app.add_subcommand("crawl", "fetch sites and write bundle archives + manifest");
    std::string domains_path, ruleset_path, taxonomy_path, corpus_dir, out_dir;
    crawl->add_option("--domains", domains_path, "domains file (one per line, or rank,domain csv)");
    crawl->add_option("--ruleset", ruleset_path, "fingerprint ruleset JSON");
    crawl->add_option("--taxonomy", taxonomy_path, "taxonomy JSON");
    crawl->add_option("--corpus", corpus_dir, "recorded bundle corpus directory (offline)");
    crawl->add_option("--out", out_dir, "output directory");

    // build
    auto* build = app.add_subcommand("build", "schema + vectors + labeled dataset from crawls");
    std::string manifest_path, bundles_dir, incidents_path, negatives_path, sectors_path,
        search_map_path, build_out;
    int min_support = -1, n_negatives = -1;
    bool use_sector = false;
    build->add_option("--manifest", manifest_path, "crawl manifest csv");
    build->add_option("--bundles", bundles_dir, "crawl output bundles directory");
    build->add_option("--ruleset", ruleset_path, "fingerprint ruleset JSON");
    build->add_option("--taxonomy", taxonomy_path, "taxonomy JSON");
    build->add_option("--incidents", incidents_path, "incident csv");
    build->add_option("--negatives", negatives_path, "ranked negative domains csv");
    build->add_option("--sectors", sectors_path, "domain,code sector csv");
    build->add_option("--search-map", search_map_path, "stub search results JSON");
    build->add_option("--out", build_out, "output directory");
    build->add_option("--min-support", min_support, "feature pruning threshold (default 20)");
    build->add_option("--n-negatives", n_negatives, "sample size from the filtered negatives");
    build->add_flag("--use-sector", use_sector, "append sector one-hot slots to the schema");

    // train
    auto* train_cmd = app.add_subcommand("train", "k-fold cross-validated boosted trees");
    std::string dataset_path, vectors_path, schema_path, train_out;
    int k = -1;
    train_cmd->add_option("--dataset", dataset_path, "dataset csv");
    train_cmd->add_option("--vectors", vectors_path, "vector matrix csv");
    train_cmd->add_option("--schema", schema_path, "schema json");
    train_cmd->add_option("--out", train_out, "output directory");
    train_cmd->add_option("--k", k, "number of folds (default 5)");
    TrainOverrides train_opts;
    train_opts.bind(train_cmd);

    // score
    auto* score = app.add_subcommand("score", "fold-mean probabilities for a vector matrix");
    std::string models_dir, score_out;
    score->add_option("--models", models_dir, "directory with model_fold<n>.json");
    score->add_option("--schema", schema_path, "schema json");
    score->add_option("--vectors", vectors_path, "vector matrix csv");
    score->add_option("--out", score_out, "output scores csv");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "within/cross-source protocol + plots");
    std::string eval_out, date_cutoff;
    std::vector<std::string> sources;
    bool no_cross = false;
    evaluate->add_option("--dataset", dataset_path, "dataset csv");
    evaluate->add_option("--vectors", vectors_path, "vector matrix csv");
    evaluate->add_option("--schema", schema_path, "schema json");
    evaluate->add_option("--out", eval_out, "output directory");
    evaluate->add_option("--k", k, "number of folds (default 5)");
    evaluate->add_option("--sources", sources, "positive source tags to evaluate");
    evaluate->add_option("--date-cutoff", date_cutoff, "train before, score after (YYYY-MM-DD)");
    evaluate->add_flag("--no-cross", no_cross, "skip cross-source curves");
    TrainOverrides eval_opts;
    eval_opts.bind(evaluate);

    // explain
    auto* explain = app.add_subcommand("explain", "per-sample and global group attributions");
    std::string explain_out;
    bool per_sample_features = false;
    explain->add_option("--models", models_dir, "directory with model_fold<n>.json");
    explain->add_option("--schema", schema_path, "schema json");
    explain->add_option("--vectors", vectors_path, "vector matrix csv");
    explain->add_option("--out", explain_out, "output directory");
    explain->add_flag("--per-sample-features", per_sample_features,
                      "also emit nonzero per-sample feature attributions");

    // snapshot-select
    auto* snapshot = app.add_subcommand("snapshot-select", "latest capture before a date");
    std::string snap_url, snap_date, cdx_endpoint, stub_index;
    snapshot->add_option("--url", snap_url, "exact URL to look up")->required();
    snapshot->add_option("--date", snap_date, "query date (YYYY-MM-DD)")->required();
    snapshot->add_option("--cdx-endpoint", cdx_endpoint, "CDX-style HTTP endpoint");
    snapshot->add_option("--stub-index", stub_index, "JSON stub index file");

    for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; }))
        sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        global.load();
        if (crawl->parsed())
            return cmd_crawl(global, domains_path, ruleset_path, taxonomy_path, corpus_dir,
                             out_dir);
        if (build->parsed())
            return cmd_build(global, manifest_path, bundles_dir, ruleset_path, taxonomy_path,
                             incidents_path, negatives_path, sectors_path, search_map_path,
                             build_out, min_support, n_negatives, use_sector);
        if (train_cmd->parsed())
            return cmd_train(global, train_cmd, train_opts, dataset_path, vectors_path,
                             schema_path, train_out, k);
        if (score->parsed())
            return cmd_score(global, models_dir, schema_path, vectors_path, score_out);
        if (evaluate->parsed())
            return cmd_evaluate(global, evaluate, eval_opts, dataset_path, vectors_path,
                                schema_path, eval_out, k, sources, date_cutoff, no_cross);
        if (explain->parsed())
            return cmd_explain(global, models_dir, schema_path, vectors_path, explain_out,
                               per_sample_features);
        if (snapshot->parsed())
            return cmd_snapshot_select(global, snap_url, snap_date, cdx_endpoint, stub_index);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
