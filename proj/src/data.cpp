#include "dlglab/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "dlglab/rng.hpp"

namespace dlglab {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& origin, const std::string& what) {
  fail(ErrorCode::parse_error, origin + ": " + what);
}

int label_id(const json& label, const std::vector<std::string>& classes,
             const std::string& origin, std::size_t edge_index) {
  const std::string where = "hyperedge " + std::to_string(edge_index) + " field 'label'";
  if (label.is_string()) {
    const auto it = std::find(classes.begin(), classes.end(), label.get<std::string>());
    if (it == classes.end())
      parse_fail(origin, where + ": unknown class '" + label.get<std::string>() + "'");
    return static_cast<int>(it - classes.begin());
  }
  if (label.is_number_integer()) {
    const int id = label.get<int>();
    if (id < 0 || id >= static_cast<int>(classes.size()))
      parse_fail(origin, where + ": class index " + std::to_string(id) + " out of range");
    return id;
  }
  parse_fail(origin, where + ": expected class name or index");
}

std::vector<int> vertex_ids(const json& names, const std::unordered_map<std::string, int>& id_of,
                            const std::string& origin, std::size_t edge_index, const char* field) {
  const std::string where = "hyperedge " + std::to_string(edge_index) + " field '" + field + "'";
  if (!names.is_array()) parse_fail(origin, where + ": expected an array of vertex names");
  std::vector<int> out;
  out.reserve(names.size());
  for (const json& name : names) {
    if (!name.is_string()) parse_fail(origin, where + ": vertex names must be strings");
    const auto it = id_of.find(name.get<std::string>());
    if (it == id_of.end())
      parse_fail(origin, where + ": unknown vertex '" + name.get<std::string>() + "'");
    out.push_back(it->second);
  }
  return out;
}

}  // namespace

Dataset parse_dataset_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    parse_fail(origin, e.what());
  }

  if (!j.is_object()) parse_fail(origin, "top level must be an object");
  for (const char* key : {"vertices", "hyperedges", "classes"})
    if (!j.contains(key)) parse_fail(origin, std::string("missing key '") + key + "'");

  std::vector<std::string> classes;
  for (const json& c : j["classes"]) {
    if (!c.is_string()) parse_fail(origin, "field 'classes': entries must be strings");
    classes.push_back(c.get<std::string>());
  }
  if (classes.empty()) parse_fail(origin, "field 'classes' is empty");

  const json& jverts = j["vertices"];
  if (!jverts.is_array() || jverts.empty()) parse_fail(origin, "field 'vertices' must be a nonempty array");
  std::unordered_map<std::string, int> id_of;
  std::vector<std::string> names;
  Eigen::Index feature_dim = -1;
  RMat features;
  for (std::size_t v = 0; v < jverts.size(); ++v) {
    const json& jv = jverts[v];
    const std::string where = "vertex " + std::to_string(v);
    if (!jv.is_object() || !jv.contains("name") || !jv["name"].is_string())
      parse_fail(origin, where + ": needs a string 'name'");
    const std::string name = jv["name"].get<std::string>();
    if (!id_of.emplace(name, static_cast<int>(v)).second)
      parse_fail(origin, where + ": duplicate vertex name '" + name + "'");
    names.push_back(name);
    if (!jv.contains("features") || !jv["features"].is_array())
      parse_fail(origin, where + ": needs a 'features' array");
    const json& feats = jv["features"];
    if (feature_dim < 0) {
      feature_dim = static_cast<Eigen::Index>(feats.size());
      if (feature_dim == 0) parse_fail(origin, where + ": feature vectors must be nonempty");
      features.resize(static_cast<Eigen::Index>(jverts.size()), feature_dim);
    }
    if (static_cast<Eigen::Index>(feats.size()) != feature_dim)
      parse_fail(origin, where + ": feature length " + std::to_string(feats.size()) +
                             " differs from " + std::to_string(feature_dim));
    for (Eigen::Index c = 0; c < feature_dim; ++c) {
      if (!feats[static_cast<std::size_t>(c)].is_number())
        parse_fail(origin, where + ": features must be numbers");
      features(static_cast<Eigen::Index>(v), c) = feats[static_cast<std::size_t>(c)].get<double>();
    }
  }

  const json& jedges = j["hyperedges"];
  if (!jedges.is_array()) parse_fail(origin, "field 'hyperedges' must be an array");
  if (jedges.empty()) parse_fail(origin, "field 'hyperedges' is empty");
  std::vector<Hyperedge> edges;
  std::vector<int> labels;
  for (std::size_t e = 0; e < jedges.size(); ++e) {
    const json& je = jedges[e];
    const std::string where = "hyperedge " + std::to_string(e);
    if (!je.is_object() || !je.contains("head"))
      parse_fail(origin, where + ": needs a 'head' array");
    Hyperedge he;
    he.head = vertex_ids(je["head"], id_of, origin, e, "head");
    if (je.contains("tail")) he.tail = vertex_ids(je["tail"], id_of, origin, e, "tail");
    if (je.contains("weight")) {
      if (!je["weight"].is_number()) parse_fail(origin, where + ": 'weight' must be a number");
      he.weight = je["weight"].get<double>();
    }
    if (!je.contains("label")) parse_fail(origin, where + ": needs a 'label'");
    he.label = label_id(je["label"], classes, origin, e);
    labels.push_back(he.label);
    edges.push_back(std::move(he));
  }

  Dataset ds{DirectedHypergraph(std::move(edges), static_cast<int>(names.size())),
             std::move(features), std::move(labels), std::move(classes), {}};

  if (j.contains("folds")) {
    const json& jfolds = j["folds"];
    if (!jfolds.is_array()) parse_fail(origin, "field 'folds' must be an array");
    const int m = ds.hypergraph.edge_count();
    for (std::size_t f = 0; f < jfolds.size(); ++f) {
      FoldSplit split;
      for (const auto& [key, target] : {std::pair<const char*, std::vector<int>*>{"train", &split.train},
                                        {"val", &split.val},
                                        {"test", &split.test}}) {
        const std::string where = "fold " + std::to_string(f) + " field '" + key + "'";
        if (!jfolds[f].contains(key) || !jfolds[f][key].is_array())
          parse_fail(origin, where + ": expected an array of hyperedge ids");
        for (const json& id : jfolds[f][key]) {
          if (!id.is_number_integer()) parse_fail(origin, where + ": ids must be integers");
          const int v = id.get<int>();
          if (v < 0 || v >= m) parse_fail(origin, where + ": id " + std::to_string(v) + " out of range");
          target->push_back(v);
        }
      }
      ds.folds.push_back(std::move(split));
    }
  }
  return ds;
}

Dataset parse_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open dataset file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset_text(buf.str(), path);
}

std::string serialize_dataset(const Dataset& ds) {
  json j;
  j["classes"] = ds.class_names;

  json jverts = json::array();
  for (int v = 0; v < ds.hypergraph.vertex_count(); ++v) {
    json jv;
    jv["name"] = "v" + std::to_string(v);
    jv["features"] = std::vector<double>(ds.node_features.row(v).begin(),
                                         ds.node_features.row(v).end());
    jverts.push_back(std::move(jv));
  }
  j["vertices"] = std::move(jverts);

  json jedges = json::array();
  for (int e = 0; e < ds.hypergraph.edge_count(); ++e) {
    const Hyperedge& he = ds.hypergraph.edge(e);
    json je;
    auto name_list = [](const std::vector<int>& ids) {
      std::vector<std::string> out;
      out.reserve(ids.size());
      for (int v : ids) out.push_back("v" + std::to_string(v));
      return out;
    };
    je["head"] = name_list(he.head);
    je["tail"] = name_list(he.tail);
    je["weight"] = he.weight;
    je["label"] = ds.class_names.at(static_cast<std::size_t>(ds.labels.at(static_cast<std::size_t>(e))));
    jedges.push_back(std::move(je));
  }
  j["hyperedges"] = std::move(jedges);

  if (!ds.folds.empty()) {
    json jfolds = json::array();
    for (const FoldSplit& f : ds.folds)
      jfolds.push_back(json{{"train", f.train}, {"val", f.val}, {"test", f.test}});
    j["folds"] = std::move(jfolds);
  }
  return j.dump(2);
}

void write_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io_error, "cannot write dataset file " + path);
  out << serialize_dataset(ds) << "\n";
  if (!out) fail(ErrorCode::io_error, "failed writing dataset file " + path);
}

Dataset generate_synthetic(const SynthConfig& cfg) {
  if (cfg.classes < 1 || cfg.edges_per_class < 1 || cfg.feature_dim < 1)
    fail(ErrorCode::invalid_config, "class count, edges per class and feature dim must be >= 1");
  if (cfg.vertex_pool < 2) fail(ErrorCode::invalid_config, "vertex pool needs at least 2 vertices");
  if (cfg.motif_strength < 0.0 || cfg.motif_strength > 1.0)
    fail(ErrorCode::invalid_config, "motif strength must lie in [0, 1]");
  if (cfg.feature_noise < 0.0) fail(ErrorCode::invalid_config, "feature noise must be >= 0");
  const int pool_a = cfg.vertex_pool / 2;
  const int pool_b = cfg.vertex_pool - pool_a;
  if (cfg.head_min < 1 || cfg.head_min > cfg.head_max || cfg.head_max > pool_a ||
      cfg.tail_min < 1 || cfg.tail_min > cfg.tail_max || cfg.tail_max > pool_b)
    fail(ErrorCode::invalid_config, "head/tail size ranges must fit inside the vertex pools");

  Rng rng(derive_seed(cfg.seed, "synth"));

  std::vector<int> ids_a(static_cast<std::size_t>(pool_a));
  std::iota(ids_a.begin(), ids_a.end(), 0);
  std::vector<int> ids_b(static_cast<std::size_t>(pool_b));
  std::iota(ids_b.begin(), ids_b.end(), pool_a);

  auto draw = [&rng](std::vector<int> pool, int count) {
    rng.shuffle(pool);
    pool.resize(static_cast<std::size_t>(count));
    return pool;
  };

  std::vector<Hyperedge> edges;
  std::vector<int> labels;
  for (int k = 0; k < cfg.classes; ++k) {
    for (int t = 0; t < cfg.edges_per_class; ++t) {
      const std::vector<int> part_a = draw(ids_a, rng.uniform_int(cfg.head_min, cfg.head_max));
      const std::vector<int> part_b = draw(ids_b, rng.uniform_int(cfg.tail_min, cfg.tail_max));

      Hyperedge he;
      he.label = k;
      const bool apply_motif = rng.uniform() < cfg.motif_strength;
      if (apply_motif) {
        switch (k % 3) {
          case 0:
            he.head = part_a;
            he.tail = part_b;
            break;
          case 1:
            he.head = part_b;
            he.tail = part_a;
            break;
          default:
            he.head = part_a;
            he.head.insert(he.head.end(), part_b.begin(), part_b.end());
            break;
        }
      } else {
        std::vector<int> all = part_a;
        all.insert(all.end(), part_b.begin(), part_b.end());
        rng.shuffle(all);
        const int cut = rng.uniform_int(1, static_cast<int>(all.size()));
        he.head.assign(all.begin(), all.begin() + cut);
        he.tail.assign(all.begin() + cut, all.end());
      }
      edges.push_back(std::move(he));
      labels.push_back(k);
    }
  }

  // Every vertex must appear somewhere; slot stragglers into the role their
  // pool implies for the chosen edge's class pattern.
  std::vector<char> covered(static_cast<std::size_t>(cfg.vertex_pool), 0);
  for (const Hyperedge& he : edges) {
    for (int v : he.head) covered[static_cast<std::size_t>(v)] = 1;
    for (int v : he.tail) covered[static_cast<std::size_t>(v)] = 1;
  }
  for (int v = 0; v < cfg.vertex_pool; ++v) {
    if (covered[static_cast<std::size_t>(v)]) continue;
    const int e = rng.uniform_int(0, static_cast<int>(edges.size()) - 1);
    const bool in_a = v < pool_a;
    const int pattern = labels[static_cast<std::size_t>(e)] % 3;
    const bool to_head = pattern == 2 || (pattern == 0 && in_a) || (pattern == 1 && !in_a);
    (to_head ? edges[static_cast<std::size_t>(e)].head : edges[static_cast<std::size_t>(e)].tail)
        .push_back(v);
  }

  RMat features(cfg.vertex_pool, cfg.feature_dim);
  for (int v = 0; v < cfg.vertex_pool; ++v) {
    for (int c = 0; c < cfg.feature_dim; ++c) features(v, c) = cfg.feature_noise * rng.normal();
    features(v, 0) += (v < pool_a) ? 1.0 : -1.0;
  }

  std::vector<std::string> class_names;
  for (int k = 0; k < cfg.classes; ++k) class_names.push_back("class_" + std::to_string(k));

  return Dataset{DirectedHypergraph(std::move(edges), cfg.vertex_pool), std::move(features),
                 std::move(labels), std::move(class_names), {}};
}

Dataset make_folds(Dataset ds, int k, std::uint64_t seed) {
  const int m = ds.hypergraph.edge_count();
  if (k < 2) fail(ErrorCode::too_few_samples, "fold count must be >= 2");
  if (m < 4 * k)
    fail(ErrorCode::too_few_samples,
         std::to_string(m) + " hyperedges cannot support " + std::to_string(k) + " folds");

  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(ds.num_classes()));
  for (int e = 0; e < m; ++e) by_class.at(static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(e)])).push_back(e);

  ds.folds.clear();
  for (int f = 0; f < k; ++f) {
    Rng rng(derive_seed(seed, "split", static_cast<std::uint64_t>(f)));
    FoldSplit split;
    // Running ideal-vs-assigned totals keep the global proportions within +-1
    // while each class stays proportional within +-1 as well.
    double ideal[3] = {0.0, 0.0, 0.0};
    long assigned[3] = {0, 0, 0};
    for (std::vector<int> ids : by_class) {
      rng.shuffle(ids);
      const int s = static_cast<int>(ids.size());
      const double frac[3] = {0.5 * s, 0.25 * s, 0.25 * s};
      int take[3];
      int used = 0;
      for (int p = 0; p < 3; ++p) {
        take[p] = static_cast<int>(frac[p]);
        used += take[p];
        ideal[p] += frac[p];
      }
      for (int extra = 0; extra < s - used; ++extra) {
        int best = 0;
        double best_deficit = -1e300;
        for (int p = 0; p < 3; ++p) {
          const double deficit = ideal[p] - static_cast<double>(assigned[p] + take[p]);
          if (deficit > best_deficit + 1e-12) {
            best_deficit = deficit;
            best = p;
          }
        }
        ++take[best];
      }
      int pos = 0;
      std::vector<int>* parts[3] = {&split.train, &split.val, &split.test};
      for (int p = 0; p < 3; ++p) {
        for (int c = 0; c < take[p]; ++c) parts[p]->push_back(ids[static_cast<std::size_t>(pos++)]);
        assigned[p] += take[p];
      }
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.val.begin(), split.val.end());
    std::sort(split.test.begin(), split.test.end());
    if (split.train.empty() || split.val.empty() || split.test.empty())
      fail(ErrorCode::too_few_samples, "a split came out empty; dataset too small");
    ds.folds.push_back(std::move(split));
  }
  return ds;
}

}  // namespace dlglab
