// Copyright 2026 The debcse Authors.
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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "debcse/analysis.hpp"
#include "debcse/corpus.hpp"
#include "debcse/embedding_file.hpp"
#include "debcse/error.hpp"
#include "debcse/negative_miner.hpp"
#include "debcse/positive_miner.hpp"
#include "debcse/records.hpp"
#include "debcse/similarity.hpp"

namespace py = pybind11;
using namespace debcse;

namespace {

OverlapMode overlap_mode(const std::string& name) {
  if (name == "types") return OverlapMode::kTypes;
  if (name == "multiplicity") return OverlapMode::kMultiplicity;
  throw InvalidArgument("overlap mode must be 'types' or 'multiplicity'");
}

py::array_t<float> to_numpy(const EmbeddingMatrix& m) {
  py::array_t<float> out({m.count(), m.dim()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

EmbeddingMatrix from_numpy(const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw InvalidArgument("expected a 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return EmbeddingMatrix(rows, cols, std::vector<float>(a.data(), a.data() + rows * cols));
}

py::dict negatives_dict(const MinedNegatives& n) {
  py::dict d;
  d["anchor"] = n.anchor_id;
  d["negatives"] = n.negative_ids;
  d["p"] = n.probabilities;
  d["cos"] = n.cosines;
  return d;
}

}  // namespace

PYBIND11_MODULE(_debcse, m) {
  m.doc() = "Debiased contrastive data construction: scoring, sampling and metrics";

  static py::exception<DataError> data_error(m, "DataError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidArgument& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const DataError& e) {
      data_error(e.what());
    } catch (const Error& e) {
      PyErr_SetString(PyExc_RuntimeError, e.what());
    }
  });

  m.def("tokenize", &tokenize, py::arg("text"));
  m.def("edit_distance", &edit_distance, py::arg("a"), py::arg("b"), "Token-level Levenshtein distance");
  m.def("char_edit_distance", &char_edit_distance, py::arg("a"), py::arg("b"));
  m.def(
      "lexical_overlap",
      [](const Tokens& a, const Tokens& b, const std::string& mode) { return lexical_overlap(a, b, overlap_mode(mode)); },
      py::arg("a"), py::arg("b"), py::arg("mode") = "multiplicity");
  m.def("softmax", [](const std::vector<double>& v) { return softmax(v); }, py::arg("values"));
  m.def("surface_scores", [](const std::vector<double>& d) { return surface_scores_from_distances(d); },
        py::arg("distances"), "1 - softmax(distances)");
  m.def("semantic_scores", [](const std::vector<double>& c) { return semantic_scores_from_cosines(c); },
        py::arg("cosines"), "softmax(cosines)");
  m.def(
      "ipw_negative_probability",
      [](const std::vector<double>& sur, const std::vector<double>& sem, double lambda_n) {
        return ipw_negative_probability(sur, sem, lambda_n);
      },
      py::arg("s_sur"), py::arg("s_sem"), py::arg("lambda_n") = 0.8);
  m.def(
      "ipw_positive_probability",
      [](const std::vector<double>& sur, const std::vector<double>& sem, double lambda_p) {
        return ipw_positive_probability(sur, sem, lambda_p);
      },
      py::arg("s_sur"), py::arg("s_sem"), py::arg("lambda_p") = 0.8);

  m.def("read_embeddings", [](const std::filesystem::path& p) { return to_numpy(read_embeddings(p)); },
        py::arg("path"), "DEBC file as a (count, dim) float32 array");
  m.def(
      "write_embeddings",
      [](const std::filesystem::path& p, const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
        write_embeddings(from_numpy(a), p);
      },
      py::arg("path"), py::arg("matrix"));
  m.def("candidate_record", &candidate_record, py::arg("anchor_id"), py::arg("candidate"),
        "One line of the external candidate file");
  m.def(
      "load_external_candidates",
      [](const std::filesystem::path& p, std::size_t corpus_size) {
        const ExternalCandidates ext = load_external_candidates(p, corpus_size);
        py::dict d;
        d["by_anchor"] = ext.by_anchor;
        d["malformed"] = ext.malformed;
        d["out_of_range"] = ext.out_of_range;
        return d;
      },
      py::arg("path"), py::arg("corpus_size"));

  m.def(
      "mine_negatives",
      [](const std::filesystem::path& sidecar, const std::filesystem::path& embeddings, double band_lo,
         double band_hi, std::size_t pool_cap, double lambda_n, std::size_t m_neg, std::uint64_t seed,
         std::size_t workers) {
        NegativePoolConfig cfg;
        cfg.band_lo = band_lo;
        cfg.band_hi = band_hi;
        cfg.pool_cap = pool_cap;
        cfg.lambda_n = lambda_n;
        cfg.m = m_neg;
        cfg.seed = seed;
        cfg.validate();
        const Corpus corpus = load_sidecar(sidecar);
        const EmbeddingMatrix emb = read_embeddings(embeddings);
        if (emb.count() != corpus.size()) throw DataError("embedding rows do not match the sidecar");
        NegativeMiningResult r;
        {
          py::gil_scoped_release release;
          r = mine_all_negatives(corpus, emb, cfg, workers);
        }
        py::list mined;
        for (const auto& n : r.mined) mined.append(negatives_dict(n));
        py::dict out;
        out["mined"] = mined;
        out["skipped"] = r.skipped;
        return out;
      },
      py::arg("sidecar"), py::arg("embeddings"), py::arg("band_lo") = 0.25, py::arg("band_hi") = 0.75,
      py::arg("pool_cap") = 64, py::arg("lambda_n") = 0.8, py::arg("m") = 2, py::arg("seed") = 0,
      py::arg("workers") = 1);

  m.def("spearman", [](const std::vector<double>& p, const std::vector<double>& g) { return spearman(p, g); },
        py::arg("pred"), py::arg("gold"));
  m.def(
      "alignment",
      [](const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs) { return alignment(pairs); },
      py::arg("pairs"));
  m.def("uniformity", [](const std::vector<std::vector<double>>& v) { return uniformity(v); }, py::arg("vectors"));
}
