#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "qs3orao/matrix.hpp"

namespace qs3orao {

enum class FileFormat { csv, libsvm };

FileFormat parse_file_format(std::string_view name);

/// Dense features with ordinal labels in 1..k and empirical class priors.
struct OrdinalDataset {
    Matrix features;
    std::vector<int> labels;
    int k = 0;
    std::vector<double> priors;  // priors[c-1] = count(label == c) / n

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t dim() const noexcept { return features.cols(); }

    /// Validates labels against 1..k and computes priors. `k == 0` infers k as the
    /// largest label. Classes may be empty here; `require_all_classes` enforces presence.
    static OrdinalDataset create(Matrix features, std::vector<int> labels, int k = 0);

    void require_all_classes() const;
    std::vector<std::size_t> class_counts() const;
};

/// Labeled subset plus a label-free unlabeled pool, reproducible from the seed.
struct SemiSupervisedSplit {
    OrdinalDataset labeled;
    Matrix unlabeled_features;
    std::uint64_t split_seed = 0;
    std::vector<std::size_t> labeled_source_rows;    // rows of the source dataset
    std::vector<std::size_t> unlabeled_source_rows;

    int k() const noexcept { return labeled.k; }
    std::size_t dim() const noexcept { return labeled.dim(); }
};

/// Binary view j of the ordinal decomposition: classes <= j negative, > j positive.
struct SubproblemView {
    int j = 0;
    std::vector<std::size_t> positive_rows;  // indices into the labeled set
    std::vector<std::size_t> negative_rows;
    double pi_hat = 0.0;
};

/// Reads CSV (label in the last column) or LIBSVM (leading label, 1-based sparse indices).
/// k is the largest label. Gaps in 1..k are allowed here; splitting and training reject them.
OrdinalDataset load_dataset(const std::filesystem::path& path, FileFormat format);
OrdinalDataset parse_dataset(std::string_view text, FileFormat format);

/// Like `parse_dataset` but for held-out data: labels must lie in 1..k (k == 0 infers
/// it) and classes may be absent.
OrdinalDataset parse_labeled_rows(std::string_view text, FileFormat format, int k = 0);

/// Reads CSV rows of reals with no label semantics.
Matrix parse_csv_matrix(std::string_view text);
Matrix load_csv_matrix(const std::filesystem::path& path);

OrdinalDataset normalize_min_max(const OrdinalDataset& ds);
Matrix normalize_min_max(const Matrix& features);

/// Equal-frequency binning by rank; ties keep their original order.
std::vector<int> discretize_equal_frequency(std::span<const double> targets, int k);

SemiSupervisedSplit make_semi_split(const OrdinalDataset& ds, std::size_t n_labeled,
                                    std::uint64_t seed);

SubproblemView subproblem_view(const OrdinalDataset& labeled, int j);
inline SubproblemView subproblem_view(const SemiSupervisedSplit& split, int j) {
    return subproblem_view(split.labeled, j);
}
std::vector<SubproblemView> all_subproblem_views(const OrdinalDataset& labeled);

}  // namespace qs3orao
