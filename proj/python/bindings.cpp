// Copyright 2026 The LCMR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "lcmr/error.hpp"
#include "lcmr/pipeline.hpp"

namespace py = pybind11;
using namespace lcmr;

namespace {

py::dict trace_to_dict(const ForwardTrace& t) {
  py::dict d;
  d["joint_embedding"] = t.joint_embedding;
  d["central_attention"] = t.central_attention;
  d["local_attention"] = t.local_attention;
  d["central_output"] = t.central_output;
  d["local_output"] = t.local_output;
  d["joint_output"] = t.joint_output;
  d["empty_text"] = t.empty_text;
  d["prediction"] = t.prediction;
  return d;
}

py::dict report_to_dict(const EvalReport& r) {
  py::dict d;
  d["k"] = r.k;
  d["hr"] = r.hr;
  d["ndcg"] = r.ndcg;
  py::list users;
  for (const UserEval& u : r.users) {
    users.append(py::make_tuple(u.user, u.rank, u.hit, u.ndcg));
  }
  d["users"] = users;
  return d;
}

py::dict history_to_dict(const TrainHistory& h) {
  py::dict d;
  py::list rows;
  for (const EpochRecord& r : h.epochs) {
    py::dict row;
    row["epoch"] = r.epoch;
    row["loss"] = r.loss;
    row["val_hr10"] = r.val_hr;
    row["val_ndcg10"] = r.val_ndcg;
    row["seconds"] = r.seconds;
    rows.append(row);
  }
  d["epochs"] = rows;
  d["best_epoch"] = h.best_epoch;
  return d;
}

RunConfig config_from(const py::dict& settings) {
  RunConfig cfg;
  for (const auto& [key, value] : settings) {
    apply_setting(cfg, py::str(key).cast<std::string>(),
                  py::str(value).cast<std::string>());
  }
  cfg.validate();
  return cfg;
}

EvalTarget parse_target(const std::string& name) {
  if (name == "test") return EvalTarget::kTest;
  if (name == "val") return EvalTarget::kValidation;
  fail(ErrorKind::kInvalidArgument, "target must be 'test' or 'val', got '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_lcmr, m) {
  m.doc() = "LCMR recommender core";

  static PyObject* error_type =
      PyErr_NewException("lcmr._lcmr.LcmrError", PyExc_RuntimeError, nullptr);
  m.attr("LcmrError") = py::handle(error_type);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type)(std::string(e.what()));
      exc.attr("kind") = std::string(error_kind_name(e.kind()));
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  py::class_<InteractionSet>(m, "InteractionSet")
      .def(py::init<std::int32_t, std::vector<std::vector<ItemId>>>(),
           py::arg("num_items"), py::arg("items_by_user"))
      .def_property_readonly("num_users", &InteractionSet::num_users)
      .def_property_readonly("num_items", &InteractionSet::num_items)
      .def_property_readonly("num_interactions", &InteractionSet::num_interactions)
      .def("items",
           [](const InteractionSet& s, UserId u) {
             auto items = s.items(u);
             return std::vector<ItemId>(items.begin(), items.end());
           })
      .def("contains", &InteractionSet::contains)
      .def("__eq__", [](const InteractionSet& a, const InteractionSet& b) { return a == b; });

  py::class_<ItemCorpus>(m, "ItemCorpus")
      .def(py::init<std::int32_t, std::vector<std::vector<WordId>>>(),
           py::arg("vocab_size"), py::arg("items"))
      .def_property_readonly("vocab_size", &ItemCorpus::vocab_size)
      .def_property_readonly("num_items", &ItemCorpus::num_items)
      .def("words", [](const ItemCorpus& c, ItemId i) {
        auto w = c.words(i);
        return std::vector<WordId>(w.begin(), w.end());
      });

  py::class_<LooSplit>(m, "LooSplit")
      .def_readonly("train", &LooSplit::train)
      .def_property_readonly("val", [](const LooSplit& s) {
        std::vector<std::pair<UserId, ItemId>> out;
        for (const HeldOut& h : s.val) out.emplace_back(h.user, h.item);
        return out;
      })
      .def_property_readonly("test", [](const LooSplit& s) {
        std::vector<std::pair<UserId, ItemId>> out;
        for (const HeldOut& h : s.test) out.emplace_back(h.user, h.item);
        return out;
      })
      .def_readonly("candidates", &LooSplit::candidates)
      .def_readonly("excluded", &LooSplit::excluded)
      .def_readonly("seed", &LooSplit::seed)
      .def_property_readonly("num_users", &LooSplit::num_users)
      .def_property_readonly("num_items", &LooSplit::num_items)
      .def("write", [](const LooSplit& s, const std::filesystem::path& p) {
        write_split(s, p);
      });

  m.def(
      "loo_split",
      [](const InteractionSet& data, std::uint64_t seed, std::int32_t min_interactions,
         std::int32_t num_negatives) {
        SplitOptions o;
        o.seed = seed;
        o.min_interactions = min_interactions;
        o.num_negatives = num_negatives;
        return loo_split(data, o);
      },
      py::arg("interactions"), py::arg("seed") = 0, py::arg("min_interactions") = 3,
      py::arg("num_negatives") = 99);
  m.def("read_split", &read_split, py::arg("path"));

  py::class_<PlantedDataset>(m, "PlantedDataset")
      .def_readonly("interactions", &PlantedDataset::interactions)
      .def_readonly("corpus", &PlantedDataset::corpus)
      .def_readonly("user_group", &PlantedDataset::user_group)
      .def_readonly("item_group", &PlantedDataset::item_group);
  m.def(
      "make_planted",
      [](std::int32_t users, std::int32_t items, std::int32_t groups, double affinity,
         double skew, std::uint64_t seed) {
        PlantedOptions o;
        o.num_users = users;
        o.num_items = items;
        o.num_groups = groups;
        o.affinity = affinity;
        o.popularity_skew = skew;
        o.seed = seed;
        return make_planted(o);
      },
      py::arg("users") = 200, py::arg("items") = 400, py::arg("groups") = 2,
      py::arg("affinity") = 10.0, py::arg("skew") = 1.0, py::arg("seed") = 0);

  py::class_<LcmrConfig>(m, "LcmrConfig")
      .def(py::init<>())
      .def_readwrite("num_users", &LcmrConfig::num_users)
      .def_readwrite("num_items", &LcmrConfig::num_items)
      .def_readwrite("vocab_size", &LcmrConfig::vocab_size)
      .def_readwrite("user_dim", &LcmrConfig::user_dim)
      .def_readwrite("item_dim", &LcmrConfig::item_dim)
      .def_readwrite("hops", &LcmrConfig::hops)
      .def_readwrite("memory_size", &LcmrConfig::memory_size)
      .def_readwrite("beta", &LcmrConfig::beta)
      .def_readwrite("max_words_per_item", &LcmrConfig::max_words_per_item)
      .def_readwrite("init_sigma", &LcmrConfig::init_sigma)
      .def_property(
          "variant", [](const LcmrConfig& c) { return std::string(variant_name(c.variant)); },
          [](LcmrConfig& c, const std::string& v) { c.variant = parse_variant(v); })
      .def("set_joint_dim", &LcmrConfig::set_joint_dim)
      .def("effective_beta", &LcmrConfig::effective_beta);

  py::class_<LcmrModel>(m, "LcmrModel")
      .def(py::init([](const LcmrConfig& cfg, std::uint64_t seed) {
             std::mt19937_64 rng = make_rng(seed, 1);
             return LcmrModel(cfg, rng);
           }),
           py::arg("config"), py::arg("seed") = 0)
      .def_property_readonly("config", &LcmrModel::config)
      .def("parameter_names",
           [](const LcmrModel& model) {
             std::vector<std::string> names;
             for (const Parameter* p : model.parameters()) names.push_back(p->name());
             return names;
           })
      .def("predict",
           [](const LcmrModel& model, UserId u, ItemId i, std::vector<WordId> words) {
             return model.trace(u, i, words).prediction;
           },
           py::arg("user"), py::arg("item"), py::arg("words") = std::vector<WordId>{})
      .def("trace",
           [](const LcmrModel& model, UserId u, ItemId i, std::vector<WordId> words) {
             return trace_to_dict(model.trace(u, i, words));
           },
           py::arg("user"), py::arg("item"), py::arg("words") = std::vector<WordId>{});

  m.def(
      "attend",
      [](std::vector<double> query, std::vector<std::vector<double>> keys,
         std::vector<std::vector<double>> values, double beta) {
        const std::size_t n = keys.size();
        if (n == 0 || values.size() != n) {
          fail(ErrorKind::kInvalidArgument, "keys and values need the same non-zero row count");
        }
        std::vector<double> k, v;
        for (const auto& row : keys) k.insert(k.end(), row.begin(), row.end());
        for (const auto& row : values) v.insert(v.end(), row.begin(), row.end());
        Tape tape;
        const Var q = tape.constant(query, 1, query.size());
        const Var kv = tape.constant(k, n, keys[0].size());
        const Var vv = tape.constant(v, n, values[0].size());
        const Var out = tape.attend(q, kv, vv, beta);
        auto o = tape.value(out);
        auto w = tape.attention_weights(out);
        return py::make_tuple(std::vector<double>(o.begin(), o.end()),
                              std::vector<double>(w.begin(), w.end()));
      },
      py::arg("query"), py::arg("keys"), py::arg("values"), py::arg("beta"));
  m.def("stable_sigmoid", &stable_sigmoid);
  m.def("rank_of_positive", [](double pos, std::vector<double> negs) {
    return rank_of_positive(pos, negs);
  });
  m.def("hr_at_k", [](std::vector<std::int32_t> ranks, std::int32_t k) {
    return hr_at_k(ranks, k);
  }, py::arg("ranks"), py::arg("k") = 10);
  m.def("ndcg_at_k", [](std::vector<std::int32_t> ranks, std::int32_t k) {
    return ndcg_at_k(ranks, k);
  }, py::arg("ranks"), py::arg("k") = 10);
  m.def("itempop_scores", [](const InteractionSet& train) {
    return itempop_scores(train).counts;
  });
  m.def(
      "evaluate_model",
      [](const LcmrModel& model, const LooSplit& split, const ItemCorpus* corpus,
         std::int32_t k, const std::string& target) {
        EvalOptions o;
        o.k = k;
        o.target = parse_target(target);
        return report_to_dict(evaluate(model, split, corpus, o));
      },
      py::arg("model"), py::arg("split"), py::arg("corpus") = nullptr, py::arg("k") = 10,
      py::arg("target") = "test");

  // File-based commands.
  m.def(
      "synth",
      [](const std::filesystem::path& out, std::int32_t users, std::int32_t items,
         std::uint64_t seed) {
        PlantedOptions o;
        o.num_users = users;
        o.num_items = items;
        o.seed = seed;
        std::ostringstream log;
        cmd_synth(o, out, log);
        return log.str();
      },
      py::arg("out_dir"), py::arg("users") = 200, py::arg("items") = 400,
      py::arg("seed") = 0);
  m.def(
      "split",
      [](const std::filesystem::path& corpus_dir, std::uint64_t seed) {
        SplitCommand o;
        o.corpus_dir = corpus_dir;
        o.seed = seed;
        std::ostringstream log;
        return cmd_split(o, log);
      },
      py::arg("corpus_dir"), py::arg("seed") = 0);
  m.def(
      "train",
      [](const py::dict& settings) {
        std::ostringstream log;
        const TrainOutcome outcome = cmd_train(config_from(settings), log);
        py::dict d = history_to_dict(outcome.fit.history);
        d["out_dir"] = outcome.out_dir;
        d["log"] = log.str();
        return d;
      },
      py::arg("settings"));
  m.def(
      "evaluate",
      [](const std::filesystem::path& checkpoint, const std::filesystem::path& split,
         const std::filesystem::path& corpus_dir, std::int32_t k,
         const std::string& target) {
        EvaluateCommand o;
        o.checkpoint = checkpoint;
        o.split = split;
        o.corpus_dir = corpus_dir;
        o.k = k;
        o.target = parse_target(target);
        std::ostringstream log;
        return report_to_dict(cmd_evaluate(o, log));
      },
      py::arg("checkpoint"), py::arg("split"), py::arg("corpus_dir") = "",
      py::arg("k") = 10, py::arg("target") = "test");
  m.def(
      "recommend",
      [](const std::filesystem::path& checkpoint, const std::filesystem::path& split,
         UserId user, std::int32_t n, const std::filesystem::path& corpus_dir) {
        RecommendCommand o;
        o.checkpoint = checkpoint;
        o.split = split;
        o.user = user;
        o.n = n;
        o.corpus_dir = corpus_dir;
        return cmd_recommend(o);
      },
      py::arg("checkpoint"), py::arg("split"), py::arg("user"), py::arg("n") = 10,
      py::arg("corpus_dir") = "");
  m.def("read_history", [](const std::filesystem::path& p) {
    return history_to_dict(read_history(p));
  });
}
