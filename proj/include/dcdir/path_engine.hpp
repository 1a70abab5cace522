#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "dcdir/kg.hpp"
#include "dcdir/rng.hpp"
#include "dcdir/transd.hpp"

namespace dcdir {

/// Fixed-length entity-type pattern a path must follow. Both schemas start
/// and end at Product.
struct MetaPathSchema {
  std::array<EntityType, 5> types;
  std::string name;
};

/// The two schemas the model traverses: Product-Feature-Need-Feature-Product
/// and Product-Need-Feature-Need-Product.
std::span<const MetaPathSchema> default_schemas();

struct PathInstance {
  std::array<int, 5> entities;
  std::array<int, 4> relations;  // provenance metadata, not embedded
  int schema_index = 0;
  int start_position = 0;  // 1-based index of entities[0] in the history, 1 = oldest
  double score = 0.0;
  double recency = 0.0;  // softmax part of the score; the set sums to 1
};

struct PathSet {
  int user = -1;
  int target = -1;
  std::vector<PathInstance> paths;
  bool empty() const { return paths.empty(); }
  std::size_t size() const { return paths.size(); }
};

/// Every schema-conforming simple path from a history item to the target,
/// over the undirected adjacency, for all schemas. The target is removed
/// from the start set when it appears in the history. Output order is
/// (schema, entity tuple) lexicographic; at most `cap` instances.
///
/// Parallel edges between the same entity pair produce one instance; the
/// lowest relation id is kept as provenance.
PathSet enumerate_paths(const KnowledgeGraph& g, std::span<const int> history, int target,
                        std::span<const MetaPathSchema> schemas, std::size_t cap = 10000);

/// Fills scores in place: a recency softmax over start positions normalized
/// across the whole set, plus the cosine similarity of each interior entity
/// to the path's endpoint.
void score_paths(PathSet& ps, const TransDTable& table, std::size_t history_len);

/// K highest-scoring paths; ties break by (score desc, entity tuple asc).
PathSet top_k(const PathSet& ps, std::size_t k);

/// Uniform sample of K paths without replacement (ablation arm).
PathSet random_k(const PathSet& ps, std::size_t k, Rng& rng);

/// Mean embedding of the item and its distinct 1-hop and 2-hop undirected
/// neighbors.
Tensor kge_aggregate_2hop_value(const KnowledgeGraph& g, int item, const TransDTable& table);

/// Entity ids pooled by the 2-hop aggregation, sorted ascending.
std::vector<int> two_hop_closure(const KnowledgeGraph& g, int item);

/// Structural check of engine output against the schema/simplicity/endpoint
/// rules; returns human-readable violations (empty when valid).
std::vector<std::string> validate_path_set(const KnowledgeGraph& g, const PathSet& ps,
                                           std::span<const int> history,
                                           std::span<const MetaPathSchema> schemas);

/// One line per path: `score<TAB>e1 name -[r1]- e2 name ... e5 name`.
std::string format_path_line(const KnowledgeGraph& g, const PathInstance& p);

}  // namespace dcdir
