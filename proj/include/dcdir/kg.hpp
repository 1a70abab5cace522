#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dcdir/errors.hpp"

namespace dcdir {

enum class EntityType { Product, Feature, Need };

EntityType parse_entity_type(const std::string& s);
const char* to_string(EntityType t);

struct Entity {
  std::string name;
  EntityType type;
};

struct Triple {
  int head;
  int relation;
  int tail;
  bool operator==(const Triple&) const = default;
};

enum class EdgeDir { Forward, Reverse };

struct Neighbor {
  int entity;
  int relation;
  EdgeDir dir;
};

/// Typed knowledge graph over Product/Feature/Need entities. Immutable after
/// construction; adjacency is the undirected view of the triples with the
/// stored direction kept as metadata, sorted by (entity, relation) so every
/// traversal is deterministic.
struct KnowledgeGraph {
  std::vector<Entity> entities;          // dense internal ids, file order
  std::vector<std::string> relations;    // dense ids, first-appearance order
  std::vector<Triple> triples;
  std::vector<std::vector<Neighbor>> adjacency;

  std::size_t entity_count() const { return entities.size(); }
  std::size_t relation_count() const { return relations.size(); }
  std::size_t triple_count() const { return triples.size(); }

  bool has_entity(int e) const {
    return e >= 0 && static_cast<std::size_t>(e) < entities.size();
  }
  EntityType type_of(int e) const;
  const std::string& name_of(int e) const;
  /// Internal id by display name; LookupError if absent.
  int entity_by_name(const std::string& name) const;
};

struct SchemaReport {
  std::size_t n_products = 0;
  std::size_t n_features = 0;
  std::size_t n_needs = 0;
  std::size_t n_relations = 0;
  std::size_t n_triples = 0;
  std::vector<std::string> violations;
  std::size_t n_entities() const { return n_products + n_features + n_needs; }
};

/// Builds a validated graph from in-memory parts (used by the synthetic
/// generator and tests). Throws on duplicate triples or dangling ids.
KnowledgeGraph build_kg(std::vector<Entity> entities, std::vector<std::string> relations,
                        std::vector<Triple> triples);

/// Loads entities.tsv (`entity_id<TAB>name<TAB>type`) and triples.tsv
/// (`head_id<TAB>relation_name<TAB>tail_id`). `#` lines are comments.
/// External ids may be arbitrary integers; internal ids are dense and
/// assigned in file order.
KnowledgeGraph load_kg(const std::string& entities_path, const std::string& triples_path);

void save_kg(const KnowledgeGraph& g, const std::string& entities_path,
             const std::string& triples_path);

/// Undirected neighbors of e, optionally filtered by entity type, ordered
/// by (entity id, relation id) ascending.
std::vector<Neighbor> neighbors(const KnowledgeGraph& g, int e,
                                std::optional<EntityType> required_type = std::nullopt);

SchemaReport stats(const KnowledgeGraph& g);

}  // namespace dcdir
