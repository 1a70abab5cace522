#include "dcdir/path_engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace dcdir {

std::span<const MetaPathSchema> default_schemas() {
  static const MetaPathSchema schemas[] = {
      {{EntityType::Product, EntityType::Feature, EntityType::Need, EntityType::Feature,
        EntityType::Product},
       "PFNFP"},
      {{EntityType::Product, EntityType::Need, EntityType::Feature, EntityType::Need,
        EntityType::Product},
       "PNFNP"},
  };
  return schemas;
}

namespace {

struct Dfs {
  const KnowledgeGraph& g;
  const MetaPathSchema& schema;
  int schema_index;
  int target;
  std::size_t cap;
  PathSet& out;
  std::array<int, 5> ents{};
  std::array<int, 4> rels{};

  bool visited(int e, int depth) const {
    for (int i = 0; i < depth; ++i)
      if (ents[static_cast<std::size_t>(i)] == e) return true;
    return false;
  }

  // Extends position `depth` (entities[depth] to fill next). Adjacency is
  // sorted by (entity, relation), so instances appear in entity-tuple
  // lexicographic order and parallel edges collapse onto the lowest
  // relation id.
  bool extend(int depth) {
    if (out.paths.size() >= cap) return false;
    const int cur = ents[static_cast<std::size_t>(depth - 1)];
    int last = -1;
    for (const Neighbor& n : g.adjacency[static_cast<std::size_t>(cur)]) {
      if (n.entity == last) continue;  // parallel edge
      if (g.type_of(n.entity) != schema.types[static_cast<std::size_t>(depth)]) continue;
      if (depth == 4 && n.entity != target) continue;
      if (visited(n.entity, depth)) continue;
      last = n.entity;
      ents[static_cast<std::size_t>(depth)] = n.entity;
      rels[static_cast<std::size_t>(depth - 1)] = n.relation;
      if (depth == 4) {
        PathInstance p;
        p.entities = ents;
        p.relations = rels;
        p.schema_index = schema_index;
        out.paths.push_back(p);
        if (out.paths.size() >= cap) return false;
      } else {
        if (!extend(depth + 1)) return false;
      }
    }
    return true;
  }
};

}  // namespace

PathSet enumerate_paths(const KnowledgeGraph& g, std::span<const int> history, int target,
                        std::span<const MetaPathSchema> schemas, std::size_t cap) {
  if (!g.has_entity(target))
    throw LookupError("enumerate_paths: unknown target entity " + std::to_string(target));
  if (g.type_of(target) != EntityType::Product)
    throw LookupError("enumerate_paths: target " + std::to_string(target) + " is not a Product");

  // start items: distinct history products, target excluded (leave-one-out),
  // position = 1-based index of the last occurrence
  std::vector<std::pair<int, int>> starts;  // (entity, position)
  for (std::size_t i = 0; i < history.size(); ++i) {
    const int item = history[i];
    if (!g.has_entity(item))
      throw LookupError("enumerate_paths: unknown history entity " + std::to_string(item));
    if (g.type_of(item) != EntityType::Product)
      throw LookupError("enumerate_paths: history item " + std::to_string(item) +
                        " is not a Product");
    if (item == target) continue;
    bool found = false;
    for (auto& s : starts)
      if (s.first == item) {
        s.second = static_cast<int>(i) + 1;
        found = true;
      }
    if (!found) starts.push_back({item, static_cast<int>(i) + 1});
  }
  std::sort(starts.begin(), starts.end());

  PathSet out;
  out.target = target;
  for (std::size_t si = 0; si < schemas.size(); ++si) {
    const std::size_t schema_begin = out.paths.size();
    for (const auto& [item, pos] : starts) {
      Dfs dfs{g, schemas[si], static_cast<int>(si), target, cap, out};
      dfs.ents[0] = item;
      const std::size_t before = out.paths.size();
      dfs.extend(1);
      for (std::size_t k = before; k < out.paths.size(); ++k)
        out.paths[k].start_position = pos;
      if (out.paths.size() >= cap) break;
    }
    (void)schema_begin;
    if (out.paths.size() >= cap) break;
  }
  return out;
}

void score_paths(PathSet& ps, const TransDTable& table, std::size_t history_len) {
  if (ps.empty()) throw DomainError("score_paths: empty path set");
  if (history_len < 1) throw DomainError("score_paths: history length must be >= 1");

  // recency: softmax over P_j / |NI| across the whole candidate set
  double mx = -1e300;
  std::vector<double> x(ps.size());
  for (std::size_t j = 0; j < ps.size(); ++j) {
    x[j] = static_cast<double>(ps.paths[j].start_position) / static_cast<double>(history_len);
    mx = std::max(mx, x[j]);
  }
  double z = 0.0;
  for (double& v : x) {
    v = std::exp(v - mx);
    z += v;
  }

  for (std::size_t j = 0; j < ps.size(); ++j) {
    const PathInstance& p = ps.paths[j];
    const Tensor& end = table.entity_vec(p.entities[4]);
    const double end_norm = norm2(end);
    if (end_norm == 0.0)
      throw ScoringError("score_paths: zero-norm embedding for entity " +
                         std::to_string(p.entities[4]));
    double sim = 0.0;
    for (int i = 0; i < 4; ++i) {
      const Tensor& e = table.entity_vec(p.entities[static_cast<std::size_t>(i)]);
      const double n = norm2(e);
      if (n == 0.0)
        throw ScoringError("score_paths: zero-norm embedding for entity " +
                           std::to_string(p.entities[static_cast<std::size_t>(i)]));
      sim += dot_raw(end, e) / (end_norm * n);
    }
    ps.paths[j].recency = x[j] / z;
    ps.paths[j].score = ps.paths[j].recency + sim;
  }
}

namespace {
bool score_order(const PathInstance& a, const PathInstance& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.entities != b.entities) return a.entities < b.entities;
  return a.schema_index < b.schema_index;
}
}  // namespace

PathSet top_k(const PathSet& ps, std::size_t k) {
  if (k < 1) throw DomainError("top_k: k must be >= 1");
  PathSet out;
  out.user = ps.user;
  out.target = ps.target;
  out.paths = ps.paths;
  std::sort(out.paths.begin(), out.paths.end(), score_order);
  if (out.paths.size() > k) out.paths.resize(k);
  return out;
}

PathSet random_k(const PathSet& ps, std::size_t k, Rng& rng) {
  PathSet out;
  out.user = ps.user;
  out.target = ps.target;
  if (k >= ps.size()) {
    out.paths = ps.paths;
    return out;
  }
  auto picks = rng.sample_without_replacement(ps.size(), k);
  std::sort(picks.begin(), picks.end());  // keep enumeration order
  out.paths.reserve(k);
  for (std::size_t i : picks) out.paths.push_back(ps.paths[i]);
  return out;
}

std::vector<int> two_hop_closure(const KnowledgeGraph& g, int item) {
  if (!g.has_entity(item))
    throw LookupError("two_hop_closure: unknown entity " + std::to_string(item));
  std::set<int> seen{item};
  std::vector<int> frontier{item};
  for (int hop = 0; hop < 2; ++hop) {
    std::vector<int> next;
    for (int e : frontier)
      for (const Neighbor& n : g.adjacency[static_cast<std::size_t>(e)])
        if (seen.insert(n.entity).second) next.push_back(n.entity);
    frontier = std::move(next);
  }
  return {seen.begin(), seen.end()};
}

Tensor kge_aggregate_2hop_value(const KnowledgeGraph& g, int item, const TransDTable& table) {
  const auto ids = two_hop_closure(g, item);
  Tensor out = Tensor::vec(static_cast<std::size_t>(table.dim));
  for (int e : ids) {
    const Tensor& v = table.entity_vec(e);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += v.data[i];
  }
  for (auto& v : out.data) v /= static_cast<double>(ids.size());
  return out;
}

std::vector<std::string> validate_path_set(const KnowledgeGraph& g, const PathSet& ps,
                                           std::span<const int> history,
                                           std::span<const MetaPathSchema> schemas) {
  std::vector<std::string> issues;
  std::set<std::pair<int, std::array<int, 5>>> seen;
  for (const PathInstance& p : ps.paths) {
    std::ostringstream tag;
    tag << "path(";
    for (int i = 0; i < 5; ++i) tag << (i ? "," : "") << p.entities[static_cast<std::size_t>(i)];
    tag << ")";
    if (p.schema_index < 0 || static_cast<std::size_t>(p.schema_index) >= schemas.size()) {
      issues.push_back(tag.str() + ": bad schema index");
      continue;
    }
    const MetaPathSchema& schema = schemas[static_cast<std::size_t>(p.schema_index)];
    for (std::size_t i = 0; i < 5; ++i)
      if (g.type_of(p.entities[i]) != schema.types[i])
        issues.push_back(tag.str() + ": entity " + std::to_string(p.entities[i]) +
                         " violates schema position " + std::to_string(i));
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = i + 1; j < 5; ++j)
        if (p.entities[i] == p.entities[j])
          issues.push_back(tag.str() + ": not a simple path");
    if (p.entities[4] != ps.target) issues.push_back(tag.str() + ": endpoint is not the target");
    if (std::find(history.begin(), history.end(), p.entities[0]) == history.end())
      issues.push_back(tag.str() + ": start is not a history item");
    for (std::size_t i = 0; i + 1 < 5; ++i) {
      bool connected = false;
      for (const Neighbor& n : g.adjacency[static_cast<std::size_t>(p.entities[i])])
        if (n.entity == p.entities[i + 1]) connected = true;
      if (!connected)
        issues.push_back(tag.str() + ": consecutive entities not adjacent at step " +
                         std::to_string(i));
    }
    if (!seen.insert({p.schema_index, p.entities}).second)
      issues.push_back(tag.str() + ": duplicate instance");
  }
  return issues;
}

std::string format_path_line(const KnowledgeGraph& g, const PathInstance& p) {
  std::ostringstream os;
  os << p.score << '\t';
  for (int i = 0; i < 5; ++i) {
    if (i > 0)
      os << " -[" << g.relations[static_cast<std::size_t>(p.relations[static_cast<std::size_t>(i - 1)])]
         << "]- ";
    os << g.name_of(p.entities[static_cast<std::size_t>(i)]);
  }
  return os.str();
}

}  // namespace dcdir
