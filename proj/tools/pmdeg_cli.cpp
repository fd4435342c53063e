#include "pmdeg/errors.hpp"
#include "pmdeg/pipeline.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <optional>

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    std::string bundle;
    std::string data;
    std::string counts;
};

using Command = std::function<int(const pmdeg::RunConfig&, const std::filesystem::path&)>;
using DataSlot = std::filesystem::path pmdeg::DataPaths::*;

CLI::App* add(CLI::App& app, const std::string& name, const std::string& help, Common& c, bool bundle, DataSlot slot) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", c.config, "flat key = value config file");
    sub->add_option("--seed", c.seed, "master seed (overrides config)");
    sub->add_option("--out", c.out, "output directory");
    if (bundle) sub->add_option("--bundle", c.bundle, "model bundle (overrides config)");
    if (slot) sub->add_option("--data", c.data, "input manifest (overrides config)");
    return sub;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"power-curve fault and degradation pipeline"};
    app.require_subcommand(1);
    Common c;

    struct Entry {
        CLI::App* sub;
        Command run;
        DataSlot slot;
    };
    std::vector<Entry> entries;
    auto* synth = add(app, "synth", "generate a synthetic dataset", c, false, nullptr);
    synth->add_option("--counts", c.counts, "per-state counts, e.g. D1=55,D2=55 or 'preset'");
    entries.push_back({synth, pmdeg::cmd_synth, nullptr});
    entries.push_back({add(app, "fit-features", "fit selection, normalization and KPCA", c, false, &pmdeg::DataPaths::standard),
                       pmdeg::cmd_fit_features, &pmdeg::DataPaths::standard});
    entries.push_back({add(app, "mine", "mine latent degradation states", c, true, &pmdeg::DataPaths::nonfault),
                       pmdeg::cmd_mine, &pmdeg::DataPaths::nonfault});
    entries.push_back({add(app, "train", "tune and train the degradation classifier", c, true, &pmdeg::DataPaths::degradation),
                       pmdeg::cmd_train, &pmdeg::DataPaths::degradation});
    entries.push_back({add(app, "classify", "classify curves with a trained bundle", c, true, &pmdeg::DataPaths::classify),
                       pmdeg::cmd_classify, &pmdeg::DataPaths::classify});
    entries.push_back({add(app, "eval-ablation", "compare method variants on shared splits", c, true,
                           &pmdeg::DataPaths::degradation),
                       pmdeg::cmd_eval_ablation, &pmdeg::DataPaths::degradation});

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        pmdeg::RunConfig config = c.config.empty() ? pmdeg::RunConfig{} : pmdeg::load_run_config(c.config);
        if (c.seed) config.seed = *c.seed;
        if (!c.bundle.empty()) config.bundle = c.bundle;
        if (!c.counts.empty()) config.set("synth.counts", c.counts);
        for (const auto& e : entries) {
            if (!e.sub->parsed()) continue;
            if (e.slot && !c.data.empty()) config.data.*e.slot = c.data;
            return e.run(config, c.out);
        }
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return pmdeg::exit_code_for(e);
    }
}
