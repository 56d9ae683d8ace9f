// Generates a synthetic site corpus (bundle archives, ruleset, taxonomy,
// incident/negative lists, sectors, search map) for demos and tests.

#include <CLI11.hpp>

#include <iostream>

#include "domrisk/synthgen.hpp"

int main(int argc, char** argv) {
    CLI::App app{"synthetic corpus generator"};
    domrisk::SynthConfig config;
    std::string out_dir = "corpus";
    app.add_option("--positives", config.n_positive, "incident sites (default 1000)");
    app.add_option("--negatives", config.n_negative, "non-incident sites (default 1000)");
    app.add_option("--seed", config.seed, "generator seed");
    app.add_option("--signal", config.signal_strength, "class separation in [0,1] (default 1)");
    app.add_option("--subpages", config.subpages, "subpages per site (default 2)");
    app.add_option("--drop-privacy", config.drop_privacy_fraction,
                   "fraction of negatives without a privacy page");
    app.add_option("--sector-coverage", config.sector_coverage,
                   "fraction of sites with a sector label (default 0.8)");
    app.add_option("--out", out_dir, "output directory")->required();
    CLI11_PARSE(app, argc, argv);

    try {
        auto corpus = domrisk::generate_synth_corpus(config);
        domrisk::write_synth_corpus(corpus, out_dir);
        std::cout << "wrote " << corpus.sites.size() << " sites to " << out_dir << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
