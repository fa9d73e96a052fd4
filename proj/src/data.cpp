#include "qs3orao/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "qs3orao/error.hpp"
#include "qs3orao/rng.hpp"

namespace qs3orao {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

// Calls fn(line, line_number) for each non-blank line. Handles LF and CRLF.
template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        line = trim(line);
        if (!line.empty()) fn(line, line_no);
    }
}

double parse_real(std::string_view tok, std::size_t line_no) {
    tok = trim(tok);
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || tok.empty()) {
        throw ParseError("expected a real number, got '" + std::string(tok) + "'", line_no);
    }
    return v;
}

long long parse_integer(std::string_view tok, std::size_t line_no, const char* what) {
    tok = trim(tok);
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || tok.empty()) {
        throw ParseError(std::string("expected an integer ") + what + ", got '" +
                             std::string(tok) + "'",
                         line_no);
    }
    return v;
}

int checked_label(long long v, std::size_t line_no) {
    if (v < 1) {
        throw ValidationError("line " + std::to_string(line_no) + ": label " +
                              std::to_string(v) + " is not a positive integer");
    }
    if (v > 1'000'000) {
        throw ValidationError("line " + std::to_string(line_no) + ": label " +
                              std::to_string(v) + " is implausibly large");
    }
    return static_cast<int>(v);
}

std::vector<double> split_reals(std::string_view line, std::size_t line_no) {
    std::vector<double> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(parse_real(line.substr(start, comma - start), line_no));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

OrdinalDataset parse_csv(std::string_view text) {
    std::vector<double> values;
    std::vector<int> labels;
    std::size_t width = 0;
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        const auto last_comma = line.rfind(',');
        if (last_comma == std::string_view::npos) {
            throw ParseError("expected at least one feature and a label", line_no);
        }
        auto feats = split_reals(line.substr(0, last_comma), line_no);
        if (width == 0) width = feats.size();
        if (feats.size() != width) {
            throw ParseError("expected " + std::to_string(width) + " features, got " +
                                 std::to_string(feats.size()),
                             line_no);
        }
        const long long label = parse_integer(line.substr(last_comma + 1), line_no, "label");
        labels.push_back(checked_label(label, line_no));
        values.insert(values.end(), feats.begin(), feats.end());
    });
    Matrix features(labels.size(), width, std::move(values));
    return OrdinalDataset::create(std::move(features), std::move(labels));
}

OrdinalDataset parse_libsvm(std::string_view text) {
    struct Entry {
        std::size_t index;
        double value;
    };
    std::vector<std::vector<Entry>> rows;
    std::vector<int> labels;
    std::size_t dim = 0;
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        std::vector<Entry> row;
        bool first = true;
        std::size_t pos = 0;
        while (pos < line.size()) {
            while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
            if (pos >= line.size()) break;
            auto end = line.find_first_of(" \t", pos);
            if (end == std::string_view::npos) end = line.size();
            const auto tok = line.substr(pos, end - pos);
            pos = end;
            if (first) {
                labels.push_back(checked_label(parse_integer(tok, line_no, "label"), line_no));
                first = false;
                continue;
            }
            const auto colon = tok.find(':');
            if (colon == std::string_view::npos) {
                throw ParseError("expected index:value, got '" + std::string(tok) + "'",
                                 line_no);
            }
            const long long idx = parse_integer(tok.substr(0, colon), line_no, "feature index");
            if (idx < 1) throw ParseError("feature indices are 1-based", line_no);
            const double v = parse_real(tok.substr(colon + 1), line_no);
            row.push_back({static_cast<std::size_t>(idx - 1), v});
            dim = std::max(dim, static_cast<std::size_t>(idx));
        }
        rows.push_back(std::move(row));
    });
    Matrix features(rows.size(), dim);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (const auto& e : rows[r]) features(r, e.index) = e.value;
    }
    return OrdinalDataset::create(std::move(features), std::move(labels));
}

}  // namespace

FileFormat parse_file_format(std::string_view name) {
    if (name == "csv") return FileFormat::csv;
    if (name == "libsvm") return FileFormat::libsvm;
    throw ConfigError("unknown data format '" + std::string(name) + "' (expected csv or libsvm)");
}

OrdinalDataset OrdinalDataset::create(Matrix features, std::vector<int> labels, int k) {
    if (features.rows() != labels.size()) {
        throw ValidationError("feature rows and labels differ in length");
    }
    int max_label = 0;
    for (const int y : labels) {
        if (y < 1) throw ValidationError("label " + std::to_string(y) + " is not in 1..k");
        max_label = std::max(max_label, y);
    }
    if (k == 0) k = max_label;
    if (max_label > k) {
        throw ValidationError("label " + std::to_string(max_label) + " exceeds k = " +
                              std::to_string(k));
    }
    OrdinalDataset ds;
    ds.features = std::move(features);
    ds.labels = std::move(labels);
    ds.k = k;
    ds.priors.assign(static_cast<std::size_t>(k), 0.0);
    if (!ds.labels.empty()) {
        const auto counts = ds.class_counts();
        const double n = static_cast<double>(ds.labels.size());
        for (int c = 0; c < k; ++c) ds.priors[c] = static_cast<double>(counts[c]) / n;
    }
    return ds;
}

std::vector<std::size_t> OrdinalDataset::class_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (const int y : labels) ++counts[y - 1];
    return counts;
}

void OrdinalDataset::require_all_classes() const {
    if (k < 2) throw ValidationError("need at least two ordinal classes, got k = " + std::to_string(k));
    const auto counts = class_counts();
    for (int c = 0; c < k; ++c) {
        if (counts[c] == 0) {
            throw ValidationError("class " + std::to_string(c + 1) + " of " + std::to_string(k) +
                                  " has no instances");
        }
    }
}

OrdinalDataset parse_dataset(std::string_view text, FileFormat format) {
    auto ds = format == FileFormat::csv ? parse_csv(text) : parse_libsvm(text);
    if (ds.size() == 0) throw ValidationError("dataset is empty");
    return ds;
}

OrdinalDataset parse_labeled_rows(std::string_view text, FileFormat format, int k) {
    auto ds = format == FileFormat::csv ? parse_csv(text) : parse_libsvm(text);
    if (k == 0) return ds;
    if (ds.k > k) {
        throw ValidationError("label " + std::to_string(ds.k) + " exceeds the " + std::to_string(k) +
                              " classes expected");
    }
    return OrdinalDataset::create(std::move(ds.features), std::move(ds.labels), k);
}

OrdinalDataset load_dataset(const std::filesystem::path& path, FileFormat format) {
    return parse_dataset(read_file(path), format);
}

Matrix parse_csv_matrix(std::string_view text) {
    Matrix out;
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        const auto row = split_reals(line, line_no);
        if (!out.empty() && row.size() != out.cols()) {
            throw ParseError("expected " + std::to_string(out.cols()) + " columns, got " +
                                 std::to_string(row.size()),
                             line_no);
        }
        out.append_row(row);
    });
    return out;
}

Matrix load_csv_matrix(const std::filesystem::path& path) { return parse_csv_matrix(read_file(path)); }

Matrix normalize_min_max(const Matrix& features) {
    Matrix out = features;
    for (std::size_t c = 0; c < features.cols(); ++c) {
        double lo = 0.0;
        double hi = 0.0;
        for (std::size_t r = 0; r < features.rows(); ++r) {
            const double v = features(r, c);
            if (r == 0 || v < lo) lo = v;
            if (r == 0 || v > hi) hi = v;
        }
        const double span = hi - lo;
        for (std::size_t r = 0; r < features.rows(); ++r) {
            if (!(span > 0.0)) {
                out(r, c) = 0.0;
            } else {
                out(r, c) = std::clamp((features(r, c) - lo) / span, 0.0, 1.0);
            }
        }
    }
    return out;
}

OrdinalDataset normalize_min_max(const OrdinalDataset& ds) {
    OrdinalDataset out = ds;
    out.features = normalize_min_max(ds.features);
    return out;
}

std::vector<int> discretize_equal_frequency(std::span<const double> targets, int k) {
    if (k < 2) throw ValidationError("equal-frequency binning needs k >= 2");
    const std::size_t n = targets.size();
    if (static_cast<std::size_t>(k) > n) {
        throw ValidationError("cannot split " + std::to_string(n) + " targets into " +
                              std::to_string(k) + " bins");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return targets[a] < targets[b]; });
    std::vector<int> labels(n);
    for (std::size_t rank = 0; rank < n; ++rank) {
        labels[order[rank]] = static_cast<int>(rank * static_cast<std::size_t>(k) / n) + 1;
    }
    return labels;
}

SemiSupervisedSplit make_semi_split(const OrdinalDataset& ds, std::size_t n_labeled,
                                    std::uint64_t seed) {
    const std::size_t n = ds.size();
    if (n_labeled > n) {
        throw ValidationError("requested " + std::to_string(n_labeled) +
                              " labeled rows from a dataset of " + std::to_string(n));
    }
    if (n_labeled < static_cast<std::size_t>(ds.k)) {
        throw ValidationError("cannot represent all " + std::to_string(ds.k) + " classes with " +
                              std::to_string(n_labeled) + " labeled rows");
    }
    ds.require_all_classes();

    constexpr int max_attempts = 256;
    SplitMix64 rng(derive_seed(seed, 0x5EED5EEDULL));
    std::vector<std::size_t> order(n);
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        std::iota(order.begin(), order.end(), 0);
        shuffle(order.begin(), order.end(), rng);
        std::vector<bool> seen(static_cast<std::size_t>(ds.k), false);
        std::size_t distinct = 0;
        for (std::size_t i = 0; i < n_labeled; ++i) {
            auto&& s = seen[ds.labels[order[i]] - 1];
            if (!s) {
                s = true;
                ++distinct;
            }
        }
        if (distinct != static_cast<std::size_t>(ds.k)) continue;

        std::vector<std::size_t> labeled_rows(order.begin(), order.begin() + n_labeled);
        std::vector<std::size_t> unlabeled_rows(order.begin() + n_labeled, order.end());
        std::sort(labeled_rows.begin(), labeled_rows.end());
        std::sort(unlabeled_rows.begin(), unlabeled_rows.end());

        std::vector<int> labels;
        labels.reserve(n_labeled);
        for (const auto r : labeled_rows) labels.push_back(ds.labels[r]);

        SemiSupervisedSplit split;
        split.labeled = OrdinalDataset::create(ds.features.select_rows(labeled_rows),
                                               std::move(labels), ds.k);
        split.unlabeled_features = ds.features.select_rows(unlabeled_rows);
        split.split_seed = seed;
        split.labeled_source_rows = std::move(labeled_rows);
        split.unlabeled_source_rows = std::move(unlabeled_rows);
        return split;
    }
    throw ValidationError("could not draw a labeled sample covering every class after " +
                          std::to_string(max_attempts) + " attempts");
}

SubproblemView subproblem_view(const OrdinalDataset& labeled, int j) {
    if (j < 1 || j > labeled.k - 1) {
        throw ValidationError("subproblem index " + std::to_string(j) + " outside 1.." +
                              std::to_string(labeled.k - 1));
    }
    SubproblemView view;
    view.j = j;
    for (std::size_t i = 0; i < labeled.size(); ++i) {
        (labeled.labels[i] > j ? view.positive_rows : view.negative_rows).push_back(i);
    }
    view.pi_hat = labeled.size() == 0 ? 0.0
                                      : static_cast<double>(view.positive_rows.size()) /
                                            static_cast<double>(labeled.size());
    return view;
}

std::vector<SubproblemView> all_subproblem_views(const OrdinalDataset& labeled) {
    std::vector<SubproblemView> views;
    for (int j = 1; j < labeled.k; ++j) views.push_back(subproblem_view(labeled, j));
    return views;
}

}  // namespace qs3orao
