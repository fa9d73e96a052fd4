#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "grid_search.hpp"
#include "qs3orao/data.hpp"
#include "qs3orao/error.hpp"
#include "qs3orao/eval.hpp"
#include "qs3orao/model.hpp"
#include "qs3orao/trainer.hpp"

namespace qs3orao::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr int kJsonSchemaVersion = 1;

// Failure to read an input file. Maps to the parse exit code.
class InputError : public Error {
public:
    using Error::Error;
};

template <class Fn>
auto read_input(Fn&& fn) {
    try {
        return fn();
    } catch (const ParseError& e) {
        throw InputError(e.what());
    } catch (const ValidationError& e) {
        throw InputError(e.what());
    } catch (const ModelFormatError& e) {
        throw InputError(e.what());
    }
}

std::vector<double> parse_list(const std::string& text, const char* name) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        std::string tok = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        while (!tok.empty() && tok.front() == ' ') tok.erase(tok.begin());
        while (!tok.empty() && tok.back() == ' ') tok.pop_back();
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size()) {
            throw ConfigError(std::string("--") + name + ": cannot parse '" + tok + "' as a number");
        }
        out.push_back(v);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string list_text(const std::vector<double>& v) {
    std::string s;
    char buf[32];
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s.append(buf, std::to_chars(buf, buf + sizeof buf, v[i]).ptr);
    }
    return s;
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ValidationError("cannot write " + path);
    f << text;
}

std::uint64_t effective_seed(std::uint64_t flag_value) {
    if (const char* env = std::getenv("QS3ORAO_SEED"); env != nullptr && *env != '\0') {
        std::uint64_t v = 0;
        const std::string_view s(env);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) {
            throw ConfigError("QS3ORAO_SEED must be an unsigned integer, got '" + std::string(s) + "'");
        }
        return v;
    }
    return flag_value;
}

json metrics_json(const Metrics& m) {
    json j;
    j["overall_auc"] = m.overall_auc;
    json per = json::array();
    for (const auto& a : m.per_subproblem_auc) per.push_back(a ? json(*a) : json(nullptr));
    j["per_subproblem_auc"] = per;
    j["mae"] = m.mae;
    j["zero_one_error"] = m.zero_one_error;
    j["train_ns"] = m.train_ns;
    j["peak_coeff_bytes"] = m.peak_coeff_bytes;
    return j;
}

// Training flags shared by train, grid-search and bench.
struct TrainFlags {
    std::string data;
    std::string format = "csv";
    std::size_t n_labeled = 500;
    std::uint64_t seed = 1;
    double lambda = 1.0;
    double theta = 1.5;
    double sigma = 1.0;
    std::string gamma = "0.5";
    std::size_t m = 64;
    std::uint64_t iters = 1000;
    std::size_t batch = 16;

    void add_to(CLI::App& app, bool with_model_hparams = true) {
        app.add_option("--data", data, "Training data file")->required();
        app.add_option("--format", format, "Data format: csv or libsvm")->capture_default_str();
        app.add_option("--n-labeled", n_labeled, "Labeled rows to keep; the rest become unlabeled")
            ->capture_default_str();
        app.add_option("--seed", seed, "Split and optimizer seed (QS3ORAO_SEED overrides)")
            ->capture_default_str();
        if (with_model_hparams) {
            app.add_option("--lambda", lambda, "Regularization strength")->capture_default_str();
            app.add_option("--theta", theta, "Step-size scale; eta_i = theta / i")->capture_default_str();
            app.add_option("--sigma", sigma, "Gaussian kernel bandwidth")->capture_default_str();
            app.add_option("--gamma", gamma, "Trade-off: one value or k-1 comma-separated values")
                ->capture_default_str();
        }
        app.add_option("--m", m, "Random frequencies per iteration")->capture_default_str();
        app.add_option("--iters", iters, "Training iterations")->capture_default_str();
        app.add_option("--batch", batch, "Rows sampled per class and from the unlabeled pool")
            ->capture_default_str();
    }

    TrainConfig config() const {
        TrainConfig c;
        c.lambda = lambda;
        c.theta = theta;
        c.sigma = sigma;
        c.gamma = parse_list(gamma, "gamma");
        c.m = m;
        c.t_max = iters;
        c.batch = batch;
        c.master_seed = effective_seed(seed);
        return c;
    }

    json to_json(const TrainConfig& c) const {
        json j;
        j["data"] = data;
        j["format"] = format;
        j["n_labeled"] = n_labeled;
        j["seed"] = c.master_seed;
        j["lambda"] = c.lambda;
        j["theta"] = c.theta;
        j["sigma"] = c.sigma;
        j["gamma"] = c.gamma;
        j["m"] = c.m;
        j["iters"] = c.t_max;
        j["batch"] = c.batch;
        return j;
    }

    SemiSupervisedSplit load_split(std::uint64_t split_seed) const {
        const auto ds = read_input([&] {
            auto loaded = load_dataset(data, parse_file_format(format));
            loaded.require_all_classes();
            return loaded;
        });
        if (n_labeled > ds.size()) {
            throw ConfigError("--n-labeled " + std::to_string(n_labeled) + " exceeds the " +
                              std::to_string(ds.size()) + " rows in " + data);
        }
        try {
            return make_semi_split(ds, n_labeled, split_seed);
        } catch (const ValidationError& e) {
            throw ConfigError(e.what());
        }
    }
};

Matrix load_feature_rows(const std::string& path, const std::string& format, std::size_t d) {
    return read_input([&] {
        if (parse_file_format(format) == FileFormat::libsvm) {
            std::ifstream in(path, std::ios::binary);
            if (!in) throw ValidationError("cannot open " + path);
            std::stringstream buf;
            buf << in.rdbuf();
            Matrix x = parse_labeled_rows(buf.str(), FileFormat::libsvm).features;
            if (x.cols() > d) throw ValidationError("rows have more features than the model");
            Matrix padded(x.rows(), d);
            for (std::size_t r = 0; r < x.rows(); ++r) {
                for (std::size_t c = 0; c < x.cols(); ++c) padded(r, c) = x(r, c);
            }
            return padded;
        }
        Matrix x = load_csv_matrix(path);
        if (x.empty()) return Matrix(0, d);
        if (x.cols() == d + 1) {
            Matrix trimmed(x.rows(), d);
            for (std::size_t r = 0; r < x.rows(); ++r) {
                for (std::size_t c = 0; c < d; ++c) trimmed(r, c) = x(r, c);
            }
            return trimmed;
        }
        if (x.cols() != d) {
            throw ValidationError("rows have " + std::to_string(x.cols()) + " columns, model expects " +
                                  std::to_string(d) + " (optionally followed by a label)");
        }
        return x;
    });
}

int cmd_discretize(const std::string& in_path, const std::string& out_path, int k, int target_col,
                   bool normalize, std::ostream& out) {
    Matrix raw = read_input([&] { return load_csv_matrix(in_path); });
    if (raw.empty()) throw InputError("input " + in_path + " is empty");
    const int cols = static_cast<int>(raw.cols());
    const int target = target_col < 0 ? cols + target_col : target_col;
    if (target < 0 || target >= cols) throw ConfigError("--target-col is out of range");
    if (cols < 2) throw InputError("need at least one feature column besides the target");
    std::vector<double> targets(raw.rows());
    Matrix features(raw.rows(), raw.cols() - 1);
    for (std::size_t r = 0; r < raw.rows(); ++r) {
        std::size_t c_out = 0;
        for (int c = 0; c < cols; ++c) {
            if (c == target) {
                targets[r] = raw(r, static_cast<std::size_t>(c));
            } else {
                features(r, c_out++) = raw(r, static_cast<std::size_t>(c));
            }
        }
    }
    std::vector<int> labels;
    try {
        labels = discretize_equal_frequency(targets, k);
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
    if (normalize) features = normalize_min_max(features);
    std::ostringstream s;
    s << std::setprecision(17);
    for (std::size_t r = 0; r < features.rows(); ++r) {
        for (std::size_t c = 0; c < features.cols(); ++c) s << features(r, c) << ',';
        s << labels[r] << '\n';
    }
    write_text(out_path, s.str(), out);
    return kOk;
}

int cmd_train(const TrainFlags& flags, const std::string& model_out, const std::string& curve_out,
              const std::string& json_out, std::ostream& out, std::ostream& err) {
    const TrainConfig cfg = flags.config();
    const auto split = flags.load_split(cfg.master_seed);
    Trainer trainer(split, cfg);
    for (const auto& w : trainer.warnings()) err << "warning: " << w << '\n';

    std::ostringstream curve;
    curve << std::setprecision(17) << "i,eta,surrogate_risk,elapsed_ns\n";
    std::uint64_t total_ns = 0;
    double last_risk = 0.0;
    for (std::uint64_t i = 0; i < cfg.t_max; ++i) {
        const auto rec = trainer.step();
        total_ns += rec.elapsed_ns;
        last_risk = rec.surrogate_risk;
        if (!curve_out.empty()) {
            curve << rec.iteration << ',' << rec.eta << ',' << rec.surrogate_risk << ',' << rec.elapsed_ns
                  << '\n';
        }
    }
    const RankModel model = trainer.finish();
    try {
        save_model(model, model_out);
    } catch (const ModelFormatError& e) {
        throw ConfigError(e.what());
    }
    if (!curve_out.empty()) write_text(curve_out, curve.str(), out);
    if (!json_out.empty()) {
        json j;
        j["schema_version"] = kJsonSchemaVersion;
        j["command"] = "train";
        j["config"] = flags.to_json(cfg);
        j["model_out"] = model_out;
        j["train_ns"] = total_ns;
        j["final_surrogate_risk"] = last_risk;
        j["peak_coeff_bytes"] = model.coefficient_bytes();
        j["thresholds"] = model.thresholds.b;
        j["warnings"] = trainer.warnings();
        write_text(json_out, j.dump(2) + "\n", out);
    }
    return kOk;
}

int cmd_predict(const std::string& model_path, const std::string& in_path, const std::string& format,
                const std::string& out_path, bool labels, std::ostream& out) {
    const RankModel model = read_input([&] { return load_model(model_path); });
    const Matrix rows = load_feature_rows(in_path, format, model.spec.d);
    std::ostringstream s;
    if (labels) {
        for (const int y : predict_labels(model, rows)) s << y << '\n';
    } else {
        s << std::setprecision(17);
        for (const double f : predict_scores(model, rows)) s << f << '\n';
    }
    write_text(out_path, s.str(), out);
    return kOk;
}

int cmd_eval(const std::string& model_path, const std::string& data_path, const std::string& format,
             const std::string& json_out, std::ostream& out, std::ostream& err) {
    const RankModel model = read_input([&] { return load_model(model_path); });
    const OrdinalDataset ds = read_input([&] {
        std::ifstream in(data_path, std::ios::binary);
        if (!in) throw ValidationError("cannot open " + data_path);
        std::stringstream buf;
        buf << in.rdbuf();
        // Evaluation sets may miss classes; those subproblems are reported absent.
        return parse_labeled_rows(buf.str(), parse_file_format(format), model.k);
    });
    if (ds.dim() != model.spec.d) {
        throw InputError("data has " + std::to_string(ds.dim()) + " features, model expects " +
                         std::to_string(model.spec.d));
    }
    const Metrics m = evaluate_model(model, ds);
    for (const auto& w : m.warnings) err << "warning: " << w << '\n';
    json j;
    j["schema_version"] = kJsonSchemaVersion;
    j["command"] = "eval";
    j["config"] = json{{"model", model_path},
                       {"data", data_path},
                       {"format", format},
                       {"k", model.k},
                       {"d", model.spec.d},
                       {"m", model.m},
                       {"t", model.t()},
                       {"sigma", model.spec.sigma},
                       {"master_seed", model.master_seed}};
    j["metrics"] = metrics_json(m);
    write_text(json_out, j.dump(2) + "\n", out);
    return kOk;
}

int cmd_grid_search(const TrainFlags& flags, const GridSpec& grid_in, const std::string& json_out,
                    std::ostream& out) {
    TrainConfig base = flags.config();
    const auto split = flags.load_split(base.master_seed);
    GridSpec grid = grid_in;
    grid.seed = base.master_seed;
    base.gamma = {grid.gammas.empty() ? 0.5 : grid.gammas.front()};
    const GridResult res = grid_search(split, base, grid);

    json j;
    j["schema_version"] = kJsonSchemaVersion;
    j["command"] = "grid-search";
    json cfg = flags.to_json(base);
    cfg.erase("lambda");
    cfg.erase("theta");
    cfg.erase("sigma");
    cfg.erase("gamma");
    cfg["folds"] = grid.folds;
    cfg["jobs"] = grid.jobs;
    cfg["theta_lambda"] = grid.theta_lambda;
    cfg["lambda_grid"] = grid.lambdas;
    cfg["sigma_grid"] = grid.sigmas;
    cfg["gamma_grid"] = grid.gammas;
    j["config"] = cfg;
    const auto& best = res.cells[res.best];
    j["best"] = json{{"lambda", best.lambda},
                     {"theta", grid.theta_lambda / best.lambda},
                     {"sigma", best.sigma},
                     {"gamma", best.gamma},
                     {"mean_auc", best.mean_auc}};
    json table = json::array();
    for (const auto& c : res.cells) {
        table.push_back(json{{"lambda", c.lambda},
                             {"sigma", c.sigma},
                             {"gamma", c.gamma},
                             {"fold_auc", c.fold_auc},
                             {"mean_auc", c.mean_auc}});
    }
    j["table"] = table;
    write_text(json_out, j.dump(2) + "\n", out);
    return kOk;
}

int cmd_bench(const TrainFlags& flags, const std::vector<std::size_t>& sizes, std::size_t repeats,
              const std::string& csv_out, const std::string& raw_out, std::ostream& out) {
    const TrainConfig cfg = flags.config();
    const auto split = flags.load_split(cfg.master_seed);
    const Matrix& source = split.unlabeled_features;
    if (source.empty()) throw ConfigError("bench needs rows beyond --n-labeled to draw unlabeled pools from");
    const auto rows = bench_scaling(split.labeled, source, cfg, sizes, repeats, cfg.master_seed);
    write_text(csv_out, bench_csv(rows), out);
    if (!raw_out.empty()) {
        std::ostringstream s;
        s << "n_u,trial,train_ns\n";
        for (const auto& r : rows) {
            for (std::size_t t = 0; t < r.trial_ns.size(); ++t) s << r.n_u << ',' << t << ',' << r.trial_ns[t] << '\n';
        }
        write_text(raw_out, s.str(), out);
    }
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Semi-supervised ordinal-regression AUC optimization with streamed random features",
                 "qs3orao"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI file with flag defaults; command-line flags win");

    // discretize
    auto* disc = app.add_subcommand("discretize", "Bin a regression target into k equal-frequency classes");
    std::string disc_in, disc_out;
    int disc_k = 5;
    int disc_target = -1;
    bool disc_normalize = false;
    disc->add_option("--in", disc_in, "Input CSV (no header)")->required();
    disc->add_option("--out", disc_out, "Output CSV: features then integer label")->required();
    disc->add_option("--k", disc_k, "Number of ordinal classes")->capture_default_str();
    disc->add_option("--target-col", disc_target, "Target column (0-based; negative counts from the end)")
        ->capture_default_str();
    disc->add_flag("--normalize", disc_normalize, "Min-max scale feature columns to [0, 1]");

    // train
    auto* tr = app.add_subcommand("train", "Train a ranking model and fit thresholds");
    TrainFlags train_flags;
    train_flags.add_to(*tr);
    std::string model_out, curve_out, train_json;
    tr->add_option("--model-out", model_out, "Model file to write")->required();
    tr->add_option("--curve-out", curve_out, "Per-iteration CSV: i,eta,surrogate_risk,elapsed_ns");
    tr->add_option("--json-out", train_json, "Run summary JSON including the effective config");

    // predict
    auto* pr = app.add_subcommand("predict", "Score rows or assign ordinal labels");
    std::string pr_model, pr_in, pr_out = "-", pr_format = "csv";
    bool pr_scores = false, pr_labels = false;
    pr->add_option("--model", pr_model, "Model file")->required();
    pr->add_option("--in", pr_in, "Rows to score (CSV features, optionally followed by a label)")->required();
    pr->add_option("--out", pr_out, "Output file, '-' for stdout")->capture_default_str();
    pr->add_option("--format", pr_format, "Input format: csv or libsvm")->capture_default_str();
    auto* scores_flag = pr->add_flag("--scores", pr_scores, "Emit one ranking score per row");
    auto* labels_flag = pr->add_flag("--labels", pr_labels, "Emit one ordinal label per row");
    scores_flag->excludes(labels_flag);

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate a model on labeled data");
    std::string ev_model, ev_data, ev_format = "csv", ev_json = "-";
    ev->add_option("--model", ev_model, "Model file")->required();
    ev->add_option("--data", ev_data, "Labeled data file")->required();
    ev->add_option("--format", ev_format, "Data format: csv or libsvm")->capture_default_str();
    ev->add_option("--json-out", ev_json, "Metrics JSON, '-' for stdout")->capture_default_str();

    // grid-search
    auto* gs = app.add_subcommand("grid-search", "Cross-validate lambda, sigma and gamma");
    TrainFlags gs_flags;
    gs_flags.add_to(*gs, false);
    std::string lambda_grid = list_text(power_of_two_grid(-3, 3));
    std::string sigma_grid = list_text(power_of_two_grid(-3, 3));
    std::string gamma_grid = list_text(default_gamma_grid());
    GridSpec grid;
    std::string gs_json = "-";
    gs->add_option("--folds", grid.folds, "Cross-validation folds over the labeled rows")->capture_default_str();
    gs->add_option("--lambda-grid", lambda_grid, "Comma-separated lambda values")->capture_default_str();
    gs->add_option("--sigma-grid", sigma_grid, "Comma-separated sigma values")->capture_default_str();
    gs->add_option("--gamma-grid", gamma_grid, "Comma-separated gamma values")->capture_default_str();
    gs->add_option("--theta-lambda", grid.theta_lambda, "Product theta * lambda held fixed per cell")
        ->capture_default_str();
    gs->add_option("--jobs", grid.jobs, "Cells evaluated concurrently")->capture_default_str();
    gs->add_option("--json-out", gs_json, "Result JSON, '-' for stdout")->capture_default_str();

    // bench
    auto* be = app.add_subcommand("bench", "Training time and coefficient memory against unlabeled pool size");
    TrainFlags be_flags;
    be_flags.add_to(*be);
    std::vector<std::size_t> sizes{1000, 10000, 100000};
    std::size_t repeats = 3;
    std::string be_csv = "-", be_raw;
    be->add_option("--unlabeled-sizes", sizes, "Unlabeled pool sizes")->delimiter(',')->capture_default_str();
    be->add_option("--repeats", repeats, "Trials per size")->capture_default_str();
    be->add_option("--csv-out", be_csv, "Summary CSV, '-' for stdout")->capture_default_str();
    be->add_option("--raw-out", be_raw, "Per-trial CSV: n_u,trial,train_ns");

    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        if (*disc) return cmd_discretize(disc_in, disc_out, disc_k, disc_target, disc_normalize, out);
        if (*tr) return cmd_train(train_flags, model_out, curve_out, train_json, out, err);
        if (*pr) return cmd_predict(pr_model, pr_in, pr_format, pr_out, pr_labels, out);
        if (*ev) return cmd_eval(ev_model, ev_data, ev_format, ev_json, out, err);
        if (*gs) {
            grid.lambdas = parse_list(lambda_grid, "lambda-grid");
            grid.sigmas = parse_list(sigma_grid, "sigma-grid");
            grid.gammas = parse_list(gamma_grid, "gamma-grid");
            return cmd_grid_search(gs_flags, grid, gs_json, out);
        }
        if (*be) return cmd_bench(be_flags, sizes, repeats, be_csv, be_raw, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kParseError;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const NumericError& e) {
        err << "error: " << e.what() << '\n';
        return kNumericError;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return kConfigError;
}

}  // namespace qs3orao::cli
