#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pmdeg/errors.hpp"
#include "pmdeg/pipeline.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

using namespace pmdeg;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::path(PMDEG_TEST_TMP) / "pipeline" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int cli(const std::string& args) {
    const std::string cmd = std::string(PMDEG_CLI) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

RunConfig small_config() {
    RunConfig c;
    c.set("synth.counts", "N=20,F1=10,F2=10,F3=10,F4=10,F5=10,F6=10,NONFAULT_UNLABELED=400");
    c.set("pso.max_iterations", "5");
    c.set("pso.particles", "6");
    c.set("train.repeats", "2");
    return c;
}

// One shared small run for the command tests.
struct Run {
    fs::path root = scratch("run");
    RunConfig config = small_config();
    int synth_rc = 0, fit_rc = 0, mine_rc = 0;
    Run() {
        synth_rc = cmd_synth(config, root / "syn");
        config.data.standard = root / "syn" / "manifest.csv";
        fit_rc = cmd_fit_features(config, root / "fit");
        config.bundle = root / "fit" / "bundle.json";
        config.data.nonfault = root / "syn" / "manifest.csv";
        mine_rc = cmd_mine(config, root / "mine");
    }
};

const Run& shared() {
    static const Run r;
    return r;
}

std::vector<int> class_labels(int per, int k) {
    std::vector<int> y;
    for (int c = 1; c <= k; ++c)
        for (int i = 0; i < per; ++i) y.push_back(c);
    return y;
}

} // namespace

TEST_CASE("config text") {
    const auto c = parse_run_config("seed = 5\n# comment line\n\npso.kernel_param = sigma  # trailing\n"
                                    "train.split_ratio = 3:2\ndata.standard = sub/m.csv\nmining.density_m = 500\n",
                                    "/base");
    CHECK(c.seed == 5);
    CHECK(c.pso_kernel_param == KernelParam::Sigma);
    CHECK(c.split_train == 3);
    CHECK(c.split_test == 2);
    CHECK(c.data.standard == fs::path("/base/sub/m.csv"));
    CHECK(c.mining.density_m == 500.0);
    CHECK_THROWS_AS(parse_run_config("no.such.key = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("seed = banana\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("train.split_ratio = 4\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("pso.kernel_param = width\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("just words\n"), ConfigError);

    // canonical listing parses back to itself
    const auto again = parse_run_config(c.canonical_text());
    CHECK(again.canonical_text() == c.canonical_text());
    const RunConfig d;
    CHECK(d.kpca_components == 6);
    CHECK(d.kpca_sigma == 2.0);
    CHECK(d.folds == 5);
    CHECK(d.split_train == 4);
    CHECK(d.split_test == 1);
    CHECK(d.mining.base_grid == 4);
}

TEST_CASE("count lists") {
    const auto m = parse_counts("D1=55,D2=10");
    CHECK(m.at(State::D1) == 55);
    CHECK(m.at(State::D2) == 10);
    CHECK_THROWS_AS(parse_counts("D1=x"), ConfigError);
    CHECK_THROWS_AS(parse_counts("Q9=3"), ConfigError);
}

TEST_CASE("stratified split") {
    const auto y = class_labels(55, 6);
    const auto s = stratified_split(y, 4, 1, 3);
    CHECK(s.train.size() == 264);
    CHECK(s.test.size() == 66);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    for (auto t : s.test) CHECK(all.insert(t).second);
    CHECK(all.size() == 330);
    for (int c = 1; c <= 6; ++c) {
        int n = 0;
        for (auto t : s.test) n += y[t] == c;
        CHECK(n == 11);
    }
    const auto again = stratified_split(y, 4, 1, 3);
    CHECK(again.train == s.train);
    CHECK(again.test == s.test);
    CHECK(stratified_split(y, 4, 1, 4).test != s.test);
    CHECK_THROWS_AS(stratified_split(std::vector<int>{1, 2}, 4, 1, 0), DataError);
}

TEST_CASE("seed streams are distinct") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t r = 0; r < 5; ++r) {
        seen.insert(stream_seed(1, SeedStream::Split, r));
        seen.insert(stream_seed(1, SeedStream::CrossValidation, r));
        seen.insert(stream_seed(1, SeedStream::Swarm, r));
    }
    seen.insert(stream_seed(1, SeedStream::Mining));
    CHECK(seen.size() == 16);
    CHECK(stream_seed(1, SeedStream::Split, 0) != stream_seed(2, SeedStream::Split, 0));
}

TEST_CASE("feature bundle") {
    const auto& r = shared();
    REQUIRE(r.synth_rc == 0);
    REQUIRE(r.fit_rc == 0);
    const fs::path p = r.root / "fit" / "bundle.json";
    const auto b = load_bundle(p);
    CHECK(serialize_bundle(b) == slurp(p));
    CHECK(b.features.kpca.components == 6);
    CHECK(b.features.reference.has_value());
    CHECK(!b.svm.has_value());

    auto j = nlohmann::json::parse(slurp(p));
    j["version"] = kBundleVersion + 1;
    const fs::path bad = r.root / "bad_version.json";
    std::ofstream(bad) << j.dump();
    CHECK_THROWS_AS(load_bundle(bad), BundleVersionError);
    CHECK(exit_code_for(BundleVersionError("x")) == 2);
    std::ofstream(r.root / "garbage.json") << "{not json";
    CHECK_THROWS_AS(load_bundle(r.root / "garbage.json"), DataError);
}

TEST_CASE("mine, train, classify, ablation") {
    const auto& r = shared();
    REQUIRE(r.mine_rc == 0);
    const auto report = nlohmann::json::parse(slurp(r.root / "mine" / "mining_report.json"));
    const auto n_states = report["states"].size();
    CHECK(n_states >= 2);
    const auto& P = report["P"], & Q = report["Q"], & R = report["R"];
    CHECK(P.get<int>() >= Q.get<int>());
    CHECK(Q.get<int>() >= R.get<int>());
    const auto mined = load_bundle(r.root / "mine" / "bundle.json");
    CHECK(mined.soms.has_value());

    RunConfig c = r.config;
    c.bundle = r.root / "mine" / "bundle.json";
    c.data.degradation = r.root / "mine" / "degradation" / "manifest.csv";
    REQUIRE(cmd_train(c, r.root / "train") == 0);
    const auto trained = load_bundle(r.root / "train" / "bundle.json");
    REQUIRE(trained.svm.has_value());
    CHECK(trained.svm->classes.size() == n_states);
    const auto tr = nlohmann::json::parse(slurp(r.root / "train" / "train_report.json"));
    CHECK(tr["repeats"].size() == 2);

    c.bundle = r.root / "train" / "bundle.json";
    c.data.classify = c.data.degradation;
    CHECK(cmd_classify(c, r.root / "cls") == 0);
    const auto cls = nlohmann::json::parse(slurp(r.root / "cls" / "classify_report.json"));
    CHECK(cls["accuracy"].get<double>() >= 0.8);

    // one unreadable curve: the rest are still classified, exit 2
    const fs::path broken = r.root / "broken";
    fs::create_directories(broken / "curves");
    const auto entries = read_manifest(c.data.degradation);
    std::vector<ManifestEntry> out;
    for (std::size_t i = 0; i < 5; ++i) {
        auto e = entries[i];
        const fs::path src = c.data.degradation.parent_path() / e.path;
        e.path = fs::path("curves") / src.filename();
        fs::copy_file(src, broken / e.path, fs::copy_options::overwrite_existing);
        out.push_back(e);
    }
    std::ofstream(broken / out[2].path) << "t_s,power_kw\n0.0,1.0\n0.0,2.0\n";
    write_manifest(broken / "manifest.csv", out);
    c.data.classify = broken / "manifest.csv";
    CHECK(cmd_classify(c, r.root / "cls_broken") == 2);
    std::istringstream pred(slurp(r.root / "cls_broken" / "predictions.csv"));
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(pred, line)) rows.push_back(line);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].rfind("sample_id,predicted,votes_", 0) == 0);
    CHECK(rows[3].find("error") != std::string::npos);
    CHECK(rows[1].size() >= 3);
    CHECK(rows[1].substr(rows[1].size() - 2) == "ok");

    c.bundle = r.root / "mine" / "bundle.json";
    c.set("train.repeats", "1");
    REQUIRE(cmd_eval_ablation(c, r.root / "abl") == 0);
    std::istringstream abl(slurp(r.root / "abl" / "ablation.csv"));
    std::getline(abl, line);
    CHECK(line == "metric,KPCA+PSO-SVM,PCA+PSO-SVM,KPCA+SVM,PSO-SVM,SVM");
    int body = 0;
    std::string last;
    while (std::getline(abl, line)) {
        ++body;
        last = line;
    }
    CHECK(body == static_cast<int>(n_states) + 1);
    CHECK(last.rfind("CA,", 0) == 0);
}

TEST_CASE("an empty nonfault set is a data error") {
    const auto& r = shared();
    const fs::path d = scratch("empty_nonfault");
    RunConfig c = small_config();
    c.set("synth.counts", "N=5,F1=5");
    REQUIRE(cmd_synth(c, d / "syn") == 0);
    c.bundle = r.root / "fit" / "bundle.json";
    c.data.nonfault = d / "syn" / "manifest.csv";
    int code = 0;
    try {
        cmd_mine(c, d / "mine");
    } catch (const std::exception& e) {
        code = exit_code_for(e);
    }
    CHECK(code == 2);
}

TEST_CASE("command-line exit codes") {
    const auto& r = shared();
    const fs::path d = scratch("cli");
    std::ofstream(d / "bad.cfg") << "unknown.key = 3\n";
    std::ofstream(d / "ok.cfg") << "synth.counts = N=4,F2=4\n";
    CHECK(cli("synth --config " + (d / "ok.cfg").string() + " --seed 2 --out " + (d / "syn").string()) == 0);
    CHECK(fs::exists(d / "syn" / "manifest.csv"));
    CHECK(cli("synth --config " + (d / "bad.cfg").string() + " --out " + (d / "x").string()) == 1);
    CHECK(cli("synth --config " + (d / "missing.cfg").string() + " --out " + (d / "x").string()) == 1);
    CHECK(cli("frobnicate") == 1);
    CHECK(cli("") == 1);
    CHECK(cli("--help") == 0);
    CHECK(cli("train --out " + (d / "t").string()) == 1); // no data path configured
    CHECK(cli("mine --bundle " + (r.root / "fit" / "bundle.json").string() + " --data " + (d / "nope.csv").string() +
              " --out " + (d / "m").string()) == 2);
    CHECK(cli("classify --bundle " + (r.root / "fit" / "bundle.json").string() + " --data " +
              (r.root / "syn" / "manifest.csv").string() + " --out " + (d / "c").string()) == 2); // bundle has no classifier
}
