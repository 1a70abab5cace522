#include "dcdir/kg.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace dcdir {

EntityType parse_entity_type(const std::string& s) {
  if (s == "Product") return EntityType::Product;
  if (s == "Feature") return EntityType::Feature;
  if (s == "Need") return EntityType::Need;
  throw ParseError("unknown entity type '" + s + "' (expected Product|Feature|Need)");
}

const char* to_string(EntityType t) {
  switch (t) {
    case EntityType::Product: return "Product";
    case EntityType::Feature: return "Feature";
    case EntityType::Need: return "Need";
  }
  return "?";
}

EntityType KnowledgeGraph::type_of(int e) const {
  if (!has_entity(e)) throw LookupError("unknown entity id " + std::to_string(e));
  return entities[static_cast<std::size_t>(e)].type;
}

const std::string& KnowledgeGraph::name_of(int e) const {
  if (!has_entity(e)) throw LookupError("unknown entity id " + std::to_string(e));
  return entities[static_cast<std::size_t>(e)].name;
}

int KnowledgeGraph::entity_by_name(const std::string& name) const {
  for (std::size_t i = 0; i < entities.size(); ++i)
    if (entities[i].name == name) return static_cast<int>(i);
  throw LookupError("unknown entity name '" + name + "'");
}

namespace {

void build_adjacency(KnowledgeGraph& g) {
  g.adjacency.assign(g.entities.size(), {});
  for (const Triple& t : g.triples) {
    g.adjacency[static_cast<std::size_t>(t.head)].push_back(
        {t.tail, t.relation, EdgeDir::Forward});
    g.adjacency[static_cast<std::size_t>(t.tail)].push_back(
        {t.head, t.relation, EdgeDir::Reverse});
  }
  for (auto& nbrs : g.adjacency)
    std::sort(nbrs.begin(), nbrs.end(), [](const Neighbor& a, const Neighbor& b) {
      if (a.entity != b.entity) return a.entity < b.entity;
      return a.relation < b.relation;
    });
}

void validate(const KnowledgeGraph& g) {
  std::set<std::tuple<int, int, int>> seen;
  for (const Triple& t : g.triples) {
    if (!g.has_entity(t.head))
      throw LookupError("triple references unknown head entity id " + std::to_string(t.head));
    if (!g.has_entity(t.tail))
      throw LookupError("triple references unknown tail entity id " + std::to_string(t.tail));
    if (t.relation < 0 || static_cast<std::size_t>(t.relation) >= g.relations.size())
      throw LookupError("triple references unknown relation id " + std::to_string(t.relation));
    if (!seen.insert({t.head, t.relation, t.tail}).second)
      throw ParseError("duplicate triple (" + std::to_string(t.head) + "," +
                       g.relations[static_cast<std::size_t>(t.relation)] + "," +
                       std::to_string(t.tail) + ")");
  }
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, '\t')) out.push_back(field);
  return out;
}

}  // namespace

KnowledgeGraph build_kg(std::vector<Entity> entities, std::vector<std::string> relations,
                        std::vector<Triple> triples) {
  KnowledgeGraph g;
  g.entities = std::move(entities);
  g.relations = std::move(relations);
  g.triples = std::move(triples);
  validate(g);
  build_adjacency(g);
  return g;
}

KnowledgeGraph load_kg(const std::string& entities_path, const std::string& triples_path) {
  std::ifstream ef(entities_path);
  if (!ef) throw ParseError("cannot open " + entities_path);
  KnowledgeGraph g;
  std::unordered_map<long long, int> ext_to_internal;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ef, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3)
      throw ParseError(entities_path + ":" + std::to_string(lineno) +
                       ": expected 3 tab-separated fields, got " + std::to_string(fields.size()));
    long long ext;
    try {
      ext = std::stoll(fields[0]);
    } catch (const std::exception&) {
      throw ParseError(entities_path + ":" + std::to_string(lineno) + ": bad entity id '" +
                       fields[0] + "'");
    }
    if (!ext_to_internal.emplace(ext, static_cast<int>(g.entities.size())).second)
      throw ParseError(entities_path + ":" + std::to_string(lineno) + ": duplicate entity id " +
                       fields[0]);
    EntityType type;
    try {
      type = parse_entity_type(fields[2]);
    } catch (const ParseError& e) {
      throw ParseError(entities_path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    g.entities.push_back({fields[1], type});
  }

  std::ifstream tf(triples_path);
  if (!tf) throw ParseError("cannot open " + triples_path);
  std::unordered_map<std::string, int> rel_ids;
  lineno = 0;
  while (std::getline(tf, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3)
      throw ParseError(triples_path + ":" + std::to_string(lineno) +
                       ": expected 3 tab-separated fields, got " + std::to_string(fields.size()));
    long long h, t;
    try {
      h = std::stoll(fields[0]);
      t = std::stoll(fields[2]);
    } catch (const std::exception&) {
      throw ParseError(triples_path + ":" + std::to_string(lineno) + ": bad entity id");
    }
    auto hit = ext_to_internal.find(h);
    if (hit == ext_to_internal.end())
      throw LookupError(triples_path + ":" + std::to_string(lineno) +
                        ": dangling reference to entity id " + fields[0]);
    auto tit = ext_to_internal.find(t);
    if (tit == ext_to_internal.end())
      throw LookupError(triples_path + ":" + std::to_string(lineno) +
                        ": dangling reference to entity id " + fields[2]);
    auto [rit, inserted] = rel_ids.emplace(fields[1], static_cast<int>(g.relations.size()));
    if (inserted) g.relations.push_back(fields[1]);
    g.triples.push_back({hit->second, rit->second, tit->second});
  }
  validate(g);
  build_adjacency(g);
  return g;
}

void save_kg(const KnowledgeGraph& g, const std::string& entities_path,
             const std::string& triples_path) {
  std::ofstream ef(entities_path);
  if (!ef) throw ParseError("cannot write " + entities_path);
  for (std::size_t i = 0; i < g.entities.size(); ++i)
    ef << i << '\t' << g.entities[i].name << '\t' << to_string(g.entities[i].type) << '\n';
  std::ofstream tf(triples_path);
  if (!tf) throw ParseError("cannot write " + triples_path);
  for (const Triple& t : g.triples)
    tf << t.head << '\t' << g.relations[static_cast<std::size_t>(t.relation)] << '\t' << t.tail
       << '\n';
}

std::vector<Neighbor> neighbors(const KnowledgeGraph& g, int e,
                                std::optional<EntityType> required_type) {
  if (!g.has_entity(e)) throw LookupError("neighbors: unknown entity id " + std::to_string(e));
  const auto& all = g.adjacency[static_cast<std::size_t>(e)];
  if (!required_type) return all;
  std::vector<Neighbor> out;
  for (const Neighbor& n : all)
    if (g.type_of(n.entity) == *required_type) out.push_back(n);
  return out;
}

SchemaReport stats(const KnowledgeGraph& g) {
  SchemaReport r;
  for (const Entity& e : g.entities) {
    switch (e.type) {
      case EntityType::Product: ++r.n_products; break;
      case EntityType::Feature: ++r.n_features; break;
      case EntityType::Need: ++r.n_needs; break;
    }
  }
  r.n_relations = g.relations.size();
  r.n_triples = g.triples.size();
  std::set<std::tuple<int, int, int>> seen;
  for (const Triple& t : g.triples) {
    if (!g.has_entity(t.head))
      r.violations.push_back("orphan head id " + std::to_string(t.head));
    if (!g.has_entity(t.tail))
      r.violations.push_back("orphan tail id " + std::to_string(t.tail));
    if (!seen.insert({t.head, t.relation, t.tail}).second)
      r.violations.push_back("duplicate triple (" + std::to_string(t.head) + "," +
                             std::to_string(t.relation) + "," + std::to_string(t.tail) + ")");
  }
  return r;
}

}  // namespace dcdir
