#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "grid_search.hpp"
#include "qs3orao/model.hpp"

using namespace qs3orao;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "qs3orao");
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void write_csv(const fs::path& p, const OrdinalDataset& ds) {
    std::ofstream out(p);
    out.precision(17);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (const double v : ds.features.row(i)) out << v << ',';
        out << ds.labels[i] << '\n';
    }
}

struct Workspace {
    fs::path dir;
    Workspace() {
        dir = fs::temp_directory_path() / ("qs3orao_cli_" + std::to_string(std::rand()));
        fs::create_directories(dir);
        write_csv(dir / "train.csv", testing::separable_1d(200, 31));
        write_csv(dir / "test.csv", testing::separable_1d(100, 32));
    }
    ~Workspace() { fs::remove_all(dir); }
    std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("discretize") {
    Workspace ws;
    {
        std::ofstream in(ws / "raw.csv");
        for (int i = 1; i <= 10; ++i) in << 0.5 * i << ',' << 11 - i << '\n';
    }
    auto r = run_cli({"discretize", "--in", ws / "raw.csv", "--out", ws / "binned.csv"});
    REQUIRE(r.code == 0);
    const auto ds = load_dataset(ws / "binned.csv", FileFormat::csv);
    CHECK(ds.labels == std::vector<int>{5, 5, 4, 4, 3, 3, 2, 2, 1, 1});
    CHECK(ds.features(0, 0) == 0.5);
    CHECK(ds.features(9, 0) == 5.0);

    r = run_cli({"discretize", "--in", ws / "raw.csv", "--out", ws / "b2.csv", "--k", "2", "--target-col",
                 "0", "--normalize"});
    REQUIRE(r.code == 0);
    const auto ds2 = load_dataset(ws / "b2.csv", FileFormat::csv);
    CHECK(ds2.labels == std::vector<int>{1, 1, 1, 1, 1, 2, 2, 2, 2, 2});
    CHECK(ds2.features(0, 0) == 1.0);

    std::ofstream(ws / "bad.csv") << "1,2\nx,3\n";
    CHECK(run_cli({"discretize", "--in", ws / "bad.csv", "--out", ws / "o.csv"}).code == cli::kParseError);
    CHECK(run_cli({"discretize", "--in", ws / "missing.csv", "--out", ws / "o.csv"}).code == cli::kParseError);
    CHECK(run_cli({"discretize", "--in", ws / "raw.csv", "--out", ws / "o.csv", "--k", "11"}).code ==
          cli::kConfigError);
}

TEST_CASE("train, predict and eval") {
    Workspace ws;
    auto r = run_cli({"train", "--data", ws / "train.csv", "--n-labeled", "60", "--iters", "300", "--m", "32",
                      "--batch", "4", "--model-out", ws / "m.bin", "--curve-out", ws / "curve.csv",
                      "--json-out", ws / "train.json"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto summary = json::parse(slurp(ws / "train.json"));
    CHECK(summary["schema_version"] == 1);
    CHECK(summary["config"]["iters"] == 300);
    CHECK(summary["config"]["lambda"] == 1.0);
    CHECK(summary["config"]["gamma"] == json::array({0.5}));
    const auto curve = slurp(ws / "curve.csv");
    CHECK(curve.rfind("i,eta,surrogate_risk,elapsed_ns\n", 0) == 0);
    CHECK(std::count(curve.begin(), curve.end(), '\n') == 301);

    r = run_cli({"eval", "--model", ws / "m.bin", "--data", ws / "test.csv"});
    REQUIRE(r.code == 0);
    const auto metrics = json::parse(r.out);
    CHECK(metrics["schema_version"] == 1);
    CHECK(metrics["config"]["k"] == 3);
    CHECK(metrics["metrics"]["per_subproblem_auc"].size() == 2);
    CHECK(metrics["metrics"]["overall_auc"].get<double>() >= 0.95);

    r = run_cli({"predict", "--model", ws / "m.bin", "--in", ws / "test.csv", "--out", ws / "s1.txt"});
    REQUIRE(r.code == 0);
    run_cli({"predict", "--model", ws / "m.bin", "--in", ws / "test.csv", "--out", ws / "s2.txt", "--scores"});
    CHECK(slurp(ws / "s1.txt") == slurp(ws / "s2.txt"));
    const auto model = load_model(ws / "m.bin");
    const auto test = load_dataset(ws / "test.csv", FileFormat::csv);
    std::istringstream lines(slurp(ws / "s1.txt"));
    double first = 0.0;
    lines >> first;
    CHECK(first == predict_score(model, test.features.row(0)));

    r = run_cli({"predict", "--model", ws / "m.bin", "--in", ws / "test.csv", "--labels"});
    REQUIRE(r.code == 0);
    std::istringstream labels(r.out);
    const auto expected = predict_labels(model, test.features);
    std::vector<int> got;
    for (int y = 0; labels >> y;) got.push_back(y);
    CHECK(got == expected);

    CHECK(run_cli({"predict", "--model", ws / "m.bin", "--in", ws / "test.csv", "--labels", "--scores"}).code ==
          cli::kConfigError);
    std::ofstream(ws / "junk.bin") << "not a model";
    CHECK(run_cli({"predict", "--model", ws / "junk.bin", "--in", ws / "test.csv"}).code == cli::kParseError);
}

TEST_CASE("null model evaluates to AUC one half") {
    Workspace ws;
    RankModel model;
    model.spec = {1.0, 1};
    model.m = 2;
    model.k = 3;
    model.coefficients = Matrix(3, 4, 0.0);
    model.thresholds = Thresholds{{-1.0, 1.0}};
    save_model(model, ws / "null.bin");
    const auto r = run_cli({"eval", "--model", ws / "null.bin", "--data", ws / "test.csv", "--json-out",
                            ws / "e.json"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(slurp(ws / "e.json"));
    CHECK(j["metrics"]["overall_auc"] == 0.5);
}

TEST_CASE("exit codes") {
    Workspace ws;
    CHECK(run_cli({"train", "--data", ws / "train.csv", "--theta", "0.5", "--model-out", ws / "m.bin"}).code ==
          cli::kConfigError);
    CHECK(run_cli({"train", "--data", ws / "train.csv", "--n-labeled", "5000", "--model-out", ws / "m.bin"})
              .code == cli::kConfigError);
    CHECK(run_cli({"train", "--data", ws / "nothing.csv", "--model-out", ws / "m.bin"}).code == cli::kParseError);
    CHECK(run_cli({"train", "--model-out", ws / "m.bin"}).code == cli::kConfigError);
    CHECK(run_cli({"frobnicate"}).code == cli::kConfigError);
    CHECK(run_cli({"train", "--data", ws / "train.csv", "--gamma", "0.5,x", "--model-out", ws / "m.bin"}).code ==
          cli::kConfigError);

    std::ofstream(ws / "huge.csv") << "1e308,1\n-1e308,2\n1e307,1\n2e307,2\n";
    const auto r = run_cli({"train", "--data", ws / "huge.csv", "--n-labeled", "2", "--iters", "5",
                            "--sigma", "8", "--model-out", ws / "h.bin"});
    CHECK(r.code == cli::kNumericError);
    CHECK(r.err.find("iteration") != std::string::npos);

    CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("seed override from the environment") {
    Workspace ws;
    setenv("QS3ORAO_SEED", "4242", 1);
    const auto r = run_cli({"train", "--data", ws / "train.csv", "--n-labeled", "30", "--iters", "3", "--m",
                            "2", "--model-out", ws / "m.bin", "--json-out", "-"});
    unsetenv("QS3ORAO_SEED");
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["config"]["seed"] == 4242);
    CHECK(load_model(ws / "m.bin").master_seed == 4242);
}

TEST_CASE("training is reproducible from the echoed config") {
    Workspace ws;
    const std::vector<std::string> args{"train", "--data", ws / "train.csv", "--n-labeled", "30", "--iters",
                                        "20", "--m", "4", "--seed", "9", "--gamma", "0.3,0.6"};
    auto a = args;
    a.insert(a.end(), {"--model-out", ws / "a.bin"});
    auto b = args;
    b.insert(b.end(), {"--model-out", ws / "b.bin"});
    REQUIRE(run_cli(a).code == 0);
    REQUIRE(run_cli(b).code == 0);
    CHECK(slurp(ws / "a.bin") == slurp(ws / "b.bin"));

    std::ofstream(ws / "cfg.ini") << "[train]\nm=4\niters=20\nseed=9\ngamma=\"0.3,0.6\"\nn-labeled=30\n";
    REQUIRE(run_cli({"--config", ws / "cfg.ini", "train", "--data", ws / "train.csv", "--model-out",
                     ws / "c.bin"}).code == 0);
    CHECK(slurp(ws / "c.bin") == slurp(ws / "a.bin"));
}

TEST_CASE("grid search") {
    CHECK(cli::power_of_two_grid(-3, 3) == std::vector<double>{0.125, 0.25, 0.5, 1, 2, 4, 8});
    const auto g = cli::default_gamma_grid();
    REQUIRE(g.size() == 11);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 1.0);
    CHECK(g[3] == doctest::Approx(0.3));

    Workspace ws;
    auto r = run_cli({"grid-search", "--data", ws / "train.csv", "--n-labeled", "60", "--iters", "30", "--m",
                      "4", "--batch", "2", "--lambda-grid", "1", "--sigma-grid", "1", "--gamma-grid", "0.5",
                      "--folds", "3"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    auto j = json::parse(r.out);
    CHECK(j["table"].size() == 1);
    CHECK(j["table"][0]["fold_auc"].size() == 3);
    CHECK(j["best"]["lambda"] == 1.0);

    r = run_cli({"grid-search", "--data", ws / "train.csv", "--n-labeled", "60", "--iters", "30", "--m", "4",
                 "--batch", "2", "--lambda-grid", "0.5,2", "--sigma-grid", "1", "--gamma-grid", "0,1",
                 "--folds", "3", "--jobs", "2"});
    REQUIRE(r.code == 0);
    j = json::parse(r.out);
    CHECK(j["table"].size() == 4);
    CHECK(j["config"]["lambda_grid"] == json::array({0.5, 2.0}));
    double best = 0.0;
    for (const auto& c : j["table"]) best = std::max(best, c["mean_auc"].get<double>());
    CHECK(j["best"]["mean_auc"] == best);
    CHECK(j["best"]["theta"].get<double>() * j["best"]["lambda"].get<double>() == doctest::Approx(1.5));
}

TEST_CASE("folds keep every class in each training part") {
    const auto ds = testing::separable_1d(10, 3);
    const auto folds = cli::make_folds(ds, 5, 1);
    REQUIRE(folds.size() == 5);
    std::size_t total = 0;
    for (const auto& f : folds) total += f.size();
    CHECK(total == ds.size());
}

TEST_CASE("bench") {
    Workspace ws;
    const auto r = run_cli({"bench", "--data", ws / "train.csv", "--n-labeled", "30", "--iters", "10", "--m",
                            "4", "--batch", "2", "--unlabeled-sizes", "10,100,1000", "--repeats", "2",
                            "--raw-out", ws / "raw.csv"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "n_u,mean_train_ns,peak_coeff_bytes");
    std::vector<std::string> mem;
    while (std::getline(in, line)) mem.push_back(line.substr(line.rfind(',') + 1));
    REQUIRE(mem.size() == 3);
    CHECK(mem[0] == mem[1]);
    CHECK(mem[1] == mem[2]);
    CHECK(mem[0] == std::to_string(10 * 8 * 8));
    const auto raw = slurp(ws / "raw.csv");
    CHECK(std::count(raw.begin(), raw.end(), '\n') == 7);
}

}
