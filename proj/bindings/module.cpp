#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "hyperkge/config.hpp"
#include "hyperkge/eval.hpp"
#include "hyperkge/graph.hpp"
#include "hyperkge/hypercomplex.hpp"
#include "hyperkge/io.hpp"
#include "hyperkge/model.hpp"
#include "hyperkge/train.hpp"

namespace py = pybind11;

namespace {

hyperkge::TrainConfig config_from_dict(const py::dict& options) {
  hyperkge::Settings settings;
  for (const auto& item : options) {
    settings[py::str(item.first)] = py::str(item.second);
  }
  hyperkge::TrainConfig config;
  hyperkge::apply_settings(config, settings);
  return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  using namespace hyperkge;
  m.doc() = "quaternion and octonion knowledge graph embeddings";

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError",
                                       PyExc_ArithmeticError);

  py::class_<QuaternionVector>(m, "QuaternionVector")
      .def(py::init<std::vector<double>, std::vector<double>,
                    std::vector<double>, std::vector<double>>(),
           py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"))
      .def_readwrite("a", &QuaternionVector::a)
      .def_readwrite("b", &QuaternionVector::b)
      .def_readwrite("c", &QuaternionVector::c)
      .def_readwrite("d", &QuaternionVector::d)
      .def("dim", &QuaternionVector::dim);

  py::class_<OctonionVector>(m, "OctonionVector")
      .def(py::init<std::array<std::vector<double>, 8>>(),
           py::arg("components"))
      .def_readwrite("x", &OctonionVector::x)
      .def("dim", &OctonionVector::dim);

  m.def("hamilton_product", &hamilton_product, py::arg("q1"), py::arg("q2"));
  m.def("octonion_product", &octonion_product, py::arg("o1"), py::arg("o2"));
  m.def("conjugate",
        py::overload_cast<const QuaternionVector&>(&conjugate), py::arg("q"));
  m.def("conjugate", py::overload_cast<const OctonionVector&>(&conjugate),
        py::arg("o"));
  m.def("norm", py::overload_cast<const QuaternionVector&>(&norm),
        py::arg("q"));
  m.def("norm", py::overload_cast<const OctonionVector&>(&norm), py::arg("o"));
  m.def("normalize",
        py::overload_cast<const QuaternionVector&, double>(&normalize),
        py::arg("q"), py::arg("eps") = kNormalizeEps);
  m.def("normalize",
        py::overload_cast<const OctonionVector&, double>(&normalize),
        py::arg("o"), py::arg("eps") = kNormalizeEps);
  m.def("inner",
        py::overload_cast<const QuaternionVector&, const QuaternionVector&>(
            &inner),
        py::arg("q1"), py::arg("q2"));
  m.def("inner",
        py::overload_cast<const OctonionVector&, const OctonionVector&>(
            &inner),
        py::arg("o1"), py::arg("o2"));

  py::class_<Triple>(m, "Triple")
      .def(py::init<EntityId, RelationId, EntityId>(), py::arg("h"),
           py::arg("r"), py::arg("t"))
      .def_readwrite("h", &Triple::h)
      .def_readwrite("r", &Triple::r)
      .def_readwrite("t", &Triple::t);

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly(
          "num_entities",
          [](const Dataset& d) { return d.store.num_entities(); })
      .def_property_readonly(
          "num_relations",
          [](const Dataset& d) { return d.store.num_relations(); })
      .def_property_readonly(
          "num_train", [](const Dataset& d) { return d.store.train.size(); })
      .def("summary", [](const Dataset& d) { return d.summary.to_text(); })
      .def("entity_id",
           [](const Dataset& d, const std::string& name) {
             return d.vocab.entity_id(name);
           })
      .def("relation_id", [](const Dataset& d, const std::string& name) {
        return d.vocab.relation_id(name);
      });

  m.def("load_dir", &load_dir, py::arg("directory"));
  m.def("add_reciprocals", &add_reciprocals, py::arg("dataset"));

  py::class_<EmbeddingTable>(m, "EmbeddingTable")
      .def_property_readonly("num_entities", &EmbeddingTable::num_entities)
      .def_property_readonly("num_relations", &EmbeddingTable::num_relations)
      .def_property_readonly("dim", &EmbeddingTable::dim)
      .def_property_readonly("components", &EmbeddingTable::components)
      .def_property_readonly(
          "variant",
          [](const EmbeddingTable& t) {
            return std::string(variant_name(t.variant()));
          })
      .def("entity",
           [](const EmbeddingTable& t, EntityId id) {
             const auto row = t.entity(id);
             return std::vector<double>(row.begin(), row.end());
           })
      .def("relation",
           [](const EmbeddingTable& t, RelationId id) {
             const auto row = t.relation(id);
             return std::vector<double>(row.begin(), row.end());
           })
      .def("score", [](const EmbeddingTable& t, const Triple& triple) {
        return score_triple(t, triple);
      });

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("table", &TrainResult::table)
      .def_readonly("best_epoch", &TrainResult::best_epoch)
      .def_readonly("best_mrr", &TrainResult::best_mrr)
      .def_property_readonly("log", [](const TrainResult& r) {
        std::ostringstream out;
        for (const EpochRecord& rec : r.log) {
          out << format_log_line(rec) << '\n';
        }
        return out.str();
      });

  m.def(
      "train",
      [](const Dataset& dataset, const py::dict& options) {
        const TrainConfig config = config_from_dict(options);
        py::gil_scoped_release release;
        return train(dataset.store, config);
      },
      py::arg("dataset"), py::arg("options"));

  py::class_<RankReport>(m, "RankReport")
      .def_readonly("mr", &RankReport::mr)
      .def_readonly("mrr", &RankReport::mrr)
      .def_readonly("hits1", &RankReport::hits1)
      .def_readonly("hits3", &RankReport::hits3)
      .def_readonly("hits10", &RankReport::hits10)
      .def("to_text", [](const RankReport& r) { return r.to_text(); });

  m.def(
      "evaluate",
      [](const EmbeddingTable& table, const Dataset& dataset,
         const std::string& split, bool reciprocal, bool type_constraints,
         const std::string& ties) {
        EvalOptions options;
        const auto s = split_from_name(split);
        if (!s.has_value()) {
          throw UsageError("unknown split: " + split);
        }
        options.split = *s;
        const auto t = tiebreak_from_name(ties);
        if (!t.has_value()) {
          throw UsageError("unknown tie convention: " + ties);
        }
        options.ties = *t;
        options.reciprocal = reciprocal;
        options.type_constraints = type_constraints;
        return evaluate(table, dataset.store, options);
      },
      py::arg("table"), py::arg("dataset"), py::arg("split") = "test",
      py::arg("reciprocal") = false, py::arg("type_constraints") = false,
      py::arg("ties") = "average",
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "save_checkpoint",
      [](const std::filesystem::path& path, const EmbeddingTable& table,
         bool reciprocal) { save_checkpoint(path, table, reciprocal); },
      py::arg("path"), py::arg("table"), py::arg("reciprocal") = false);
  m.def("load_checkpoint", [](const std::filesystem::path& path) {
    Checkpoint ckpt = load_checkpoint(path);
    return py::make_tuple(std::move(ckpt.table), ckpt.reciprocal);
  });

  m.def(
      "parameter_count",
      [](std::size_t num_entities, std::size_t num_relations, std::size_t k,
         const std::string& variant, bool reciprocal) {
        const auto v = variant_from_name(variant);
        if (!v.has_value()) {
          throw UsageError("unknown variant: " + variant);
        }
        return parameter_count(num_entities, num_relations, k, *v,
                               reciprocal);
      },
      py::arg("num_entities"), py::arg("num_relations"), py::arg("k"),
      py::arg("variant") = "quate", py::arg("reciprocal") = false);
}
