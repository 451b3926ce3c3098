// SPDX-License-Identifier: Apache-2.0
#include "grin/eval.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace grin::eval {

Metrics metrics(const std::vector<double>& y_true,
                const std::vector<double>& y_pred) {
  if (y_true.empty() || y_true.size() != y_pred.size())
    throw Error("metrics: need equal non-zero lengths");
  double n = static_cast<double>(y_true.size());
  double mean = 0.0;
  for (double y : y_true) mean += y;
  mean /= n;
  double ss_res = 0.0, ss_tot = 0.0;
  for (size_t i = 0; i < y_true.size(); ++i) {
    double d = y_true[i] - y_pred[i];
    ss_res += d * d;
    double c = y_true[i] - mean;
    ss_tot += c * c;
  }
  if (ss_tot == 0.0)
    throw DegenerateError("all y_true identical: R^2 undefined");
  Metrics m;
  m.rmse = std::sqrt(ss_res / n);
  m.r2 = 1.0 - ss_res / ss_tot;
  return m;
}

EvalReport sweep_eval(const model::ModelParams& params, model::Aggregator agg,
                      const std::vector<augment::Sample>& test_base,
                      const std::vector<int>& sizes) {
  if (test_base.empty()) throw Error("empty test set");
  if (sizes.empty()) throw Error("no repeat sizes requested");

  // n=1 embeddings for drift, computed once
  std::vector<ad::Tensor> base_emb;
  for (const auto& s : test_base)
    base_emb.push_back(
        model::forward(augment::chain_repeat(s.unit, 1), params, agg)
            .graph_embedding);

  auto cosine = [](const ad::Tensor& a, const ad::Tensor& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
      dot += a.data[i] * b.data[i];
      na += a.data[i] * a.data[i];
      nb += b.data[i] * b.data[i];
    }
    if (na == 0.0 || nb == 0.0) return na == nb ? 1.0 : 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
  };

  EvalReport report;
  for (int n : sizes) {
    std::vector<double> yt, yp;
    double cos_sum = 0.0;
    for (size_t i = 0; i < test_base.size(); ++i) {
      auto emb =
          model::forward(augment::chain_repeat(test_base[i].unit, n), params,
                         agg);
      yt.push_back(test_base[i].label);
      yp.push_back(emb.prediction);
      cos_sum += cosine(emb.graph_embedding, base_emb[i]);
    }
    Metrics m = metrics(yt, yp);
    SizeResult sr;
    sr.repeat_size = n;
    sr.r2 = m.r2;
    sr.rmse = m.rmse;
    sr.count = static_cast<int>(yt.size());
    sr.mean_cosine_to_n1 = cos_sum / static_cast<double>(test_base.size());
    report.per_size.push_back(sr);
  }
  report.r2_gap_first_to_last =
      report.per_size.front().r2 - report.per_size.back().r2;
  return report;
}

std::string report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["per_size"] = nlohmann::ordered_json::array();
  for (const SizeResult& s : r.per_size) {
    nlohmann::ordered_json e;
    e["n"] = s.repeat_size;
    e["r2"] = s.r2;
    e["rmse"] = s.rmse;
    e["count"] = s.count;
    e["mean_cosine_to_n1"] = s.mean_cosine_to_n1;
    j["per_size"].push_back(std::move(e));
  }
  j["r2_gap_first_to_last"] = r.r2_gap_first_to_last;
  j["seed"] = r.seed;
  j["config"] = r.config_echo;
  return j.dump(2);
}

IngestResult ingest_csv_text(const std::string& text) {
  IngestResult out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "smiles,value")
        throw IoError("expected header 'smiles,value', got '" + line + "'");
      header_seen = true;
      continue;
    }
    auto comma = line.find(',');
    if (comma == std::string::npos) {
      out.errors.push_back({lineno, "missing comma"});
      continue;
    }
    std::string smi = line.substr(0, comma);
    std::string val = line.substr(comma + 1);
    try {
      augment::Sample s;
      s.unit = smiles::parse_repeat_unit(smi);
      size_t used = 0;
      s.label = std::stod(val, &used);
      if (used != val.size()) throw Error("trailing characters after value");
      out.samples.push_back(std::move(s));
    } catch (const std::exception& e) {
      out.errors.push_back({lineno, e.what()});
    }
  }
  if (!header_seen) throw IoError("missing 'smiles,value' header");
  return out;
}

IngestResult ingest_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ingest_csv_text(ss.str());
}

double synth_label(const smiles::RepeatUnit& ru) {
  int num_c = 0, num_o = 0, num_odouble = 0;
  for (const auto& a : ru.atoms) {
    if (a.element == "C") ++num_c;
    if (a.element == "O") ++num_o;
  }
  for (const auto& b : ru.bonds)
    if (b.order == smiles::BondOrder::Double &&
        (ru.atoms[b.a].element == "O" || ru.atoms[b.b].element == "O"))
      ++num_odouble;
  return 10.0 * num_c + 25.0 * num_o + 40.0 * num_odouble;
}

std::vector<augment::Sample> synth_corpus(int count, std::uint64_t seed) {
  if (count < 10) throw Error("synth corpus needs count >= 10");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> len_dist(2, 8);
  std::uniform_int_distribution<int> el_dist(0, 9);
  std::uniform_int_distribution<int> branch_dist(0, 9);

  std::vector<augment::Sample> out;
  out.reserve(count);
  while (static_cast<int>(out.size()) < count) {
    int heavy = len_dist(rng);
    std::string text = "*";
    int placed = 0;
    while (placed < heavy) {
      int remaining = heavy - placed;
      // backbone atom: mostly C, some O/N
      int r = el_dist(rng);
      char el = r < 6 ? 'C' : (r < 8 ? 'O' : 'N');
      text += el;
      ++placed;
      // branches only on backbone C, only if room remains
      if (el == 'C' && remaining >= 2) {
        int b = branch_dist(rng);
        if (b < 2) {
          text += "(=O)";
          ++placed;
        } else if (b < 4) {
          text += "(C)";
          ++placed;
        }
      }
    }
    text += "*";
    augment::Sample s;
    s.unit = smiles::parse_repeat_unit(text);  // generator output is valid
    s.label = synth_label(s.unit);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace grin::eval
