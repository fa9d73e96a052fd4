#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>

#include "qs3orao/data.hpp"
#include "qs3orao/error.hpp"
#include "qs3orao/eval.hpp"
#include "qs3orao/model.hpp"
#include "qs3orao/thresholds.hpp"
#include "qs3orao/trainer.hpp"

namespace py = pybind11;
using namespace qs3orao;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
    if (a.ndim() == 1) {
        return Matrix(static_cast<std::size_t>(a.shape(0)), 1,
                      std::vector<double>(a.data(), a.data() + a.size()));
    }
    if (a.ndim() != 2) throw ValidationError("expected a 1-D or 2-D array");
    return Matrix(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                  std::vector<double>(a.data(), a.data() + a.size()));
}

py::array_t<double> to_array(const Matrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    std::copy(m.values().begin(), m.values().end(), out.mutable_data());
    return out;
}

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
    py::array_t<T> out(v.size());
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

OrdinalDataset make_dataset(const Array& x, const std::vector<int>& y, int k) {
    return OrdinalDataset::create(to_matrix(x), y, k);
}

}  // namespace

PYBIND11_MODULE(_qs3orao, mod) {
    mod.doc() = "Semi-supervised ordinal regression by AUC maximization";

    auto base = py::register_exception<Error>(mod, "Error");
    py::register_exception<ParseError>(mod, "ParseError", base.ptr());
    py::register_exception<ValidationError>(mod, "ValidationError", base.ptr());
    py::register_exception<ConfigError>(mod, "ConfigError", base.ptr());
    py::register_exception<NumericError>(mod, "NumericError", base.ptr());
    py::register_exception<ModelFormatError>(mod, "ModelFormatError", base.ptr());

    py::class_<OrdinalDataset>(mod, "Dataset")
        .def(py::init(&make_dataset), py::arg("x"), py::arg("y"), py::arg("k") = 0)
        .def_property_readonly("x", [](const OrdinalDataset& d) { return to_array(d.features); })
        .def_property_readonly("y", [](const OrdinalDataset& d) { return to_array(d.labels); })
        .def_readonly("k", &OrdinalDataset::k)
        .def_readonly("priors", &OrdinalDataset::priors)
        .def("__len__", &OrdinalDataset::size);

    mod.def("load_dataset",
            [](const std::filesystem::path& path, const std::string& format) {
                return load_dataset(path, parse_file_format(format));
            },
            py::arg("path"), py::arg("format") = "csv");
    mod.def("normalize", [](const OrdinalDataset& d) { return normalize_min_max(d); });
    mod.def("discretize",
            [](const std::vector<double>& targets, int k) {
                return to_array(discretize_equal_frequency(targets, k));
            },
            py::arg("targets"), py::arg("k"));

    py::class_<SemiSupervisedSplit>(mod, "Split")
        .def_readonly("labeled", &SemiSupervisedSplit::labeled)
        .def_property_readonly("unlabeled",
                               [](const SemiSupervisedSplit& s) { return to_array(s.unlabeled_features); })
        .def_readonly("seed", &SemiSupervisedSplit::split_seed);
    mod.def("split", &make_semi_split, py::arg("data"), py::arg("n_labeled"), py::arg("seed"));

    py::class_<TrainConfig>(mod, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("lam", &TrainConfig::lambda)
        .def_readwrite("theta", &TrainConfig::theta)
        .def_readwrite("sigma", &TrainConfig::sigma)
        .def_readwrite("gamma", &TrainConfig::gamma)
        .def_readwrite("m", &TrainConfig::m)
        .def_readwrite("t_max", &TrainConfig::t_max)
        .def_readwrite("batch", &TrainConfig::batch)
        .def_readwrite("seed", &TrainConfig::master_seed);

    py::class_<RankModel>(mod, "Model")
        .def_readonly("k", &RankModel::k)
        .def_readonly("m", &RankModel::m)
        .def_readonly("seed", &RankModel::master_seed)
        .def_property_readonly("t", &RankModel::t)
        .def_property_readonly("thresholds", [](const RankModel& r) { return r.thresholds.b; })
        .def_property_readonly("coefficients", [](const RankModel& r) { return to_array(r.coefficients); })
        .def("scores", [](const RankModel& r, const Array& x) { return to_array(predict_scores(r, to_matrix(x))); })
        .def("labels", [](const RankModel& r, const Array& x) { return to_array(predict_labels(r, to_matrix(x))); })
        .def("to_bytes",
             [](const RankModel& r) {
                 const auto bytes = serialize_model(r);
                 return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
             })
        .def_static("from_bytes",
                    [](const py::bytes& b) {
                        const std::string s = b;
                        return deserialize_model(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
                    })
        .def("save", [](const RankModel& r, const std::filesystem::path& p) { save_model(r, p); })
        .def(py::self == py::self);
    mod.def("load_model", &load_model, py::arg("path"));

    mod.def("train",
            [](const SemiSupervisedSplit& split, const TrainConfig& cfg) {
                py::gil_scoped_release release;
                return train(split, cfg);
            },
            py::arg("split"), py::arg("config") = TrainConfig{});

    mod.def("auc",
            [](const std::vector<double>& scores, const std::vector<bool>& positive) {
                if (scores.size() != positive.size()) throw ValidationError("length mismatch");
                auto flags = std::make_unique<bool[]>(positive.size());
                for (std::size_t i = 0; i < positive.size(); ++i) flags[i] = positive[i];
                return auc_rank_sum(scores, std::span<const bool>(flags.get(), positive.size()));
            },
            py::arg("scores"), py::arg("positive"));
    mod.def("fit_thresholds",
            [](const std::vector<double>& scores, const std::vector<int>& labels, int k) {
                return fit_thresholds(scores, labels, k).b;
            },
            py::arg("scores"), py::arg("labels"), py::arg("k"));

    mod.def("evaluate",
            [](const RankModel& model, const OrdinalDataset& data) {
                const auto m = evaluate_model(model, data);
                py::dict out;
                out["overall_auc"] = m.overall_auc;
                out["per_subproblem_auc"] = m.per_subproblem_auc;
                out["mae"] = m.mae;
                out["zero_one_error"] = m.zero_one_error;
                out["warnings"] = m.warnings;
                return out;
            },
            py::arg("model"), py::arg("data"));
}
