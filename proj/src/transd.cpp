#include "dcdir/transd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "dcdir/optim.hpp"
#include "dcdir/rng.hpp"

namespace dcdir {

const Tensor& TransDTable::entity_vec(int e) const {
  if (!has_entity(e)) throw LookupError("transd: unknown entity id " + std::to_string(e));
  return ent[static_cast<std::size_t>(e)].value;
}

Tensor& TransDTable::entity_vec_mut(int e) {
  if (!has_entity(e)) throw LookupError("transd: unknown entity id " + std::to_string(e));
  return ent[static_cast<std::size_t>(e)].value;
}

Tensor project_value(const Tensor& e, const Tensor& e_p, const Tensor& r_p) {
  const double c = dot_raw(e_p, e);
  Tensor out = e;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += c * r_p.data[i];
  return out;
}

Tape::Id project(Tape& tape, Tape::Id e, Tape::Id e_p, Tape::Id r_p) {
  return tape.add(e, tape.scale(r_p, tape.dot(e_p, e)));
}

double transd_energy(const TransDTable& table, const Triple& t) {
  if (!table.has_entity(t.head) || !table.has_entity(t.tail))
    throw LookupError("transd_energy: unknown entity id");
  if (t.relation < 0 || static_cast<std::size_t>(t.relation) >= table.rel.size())
    throw LookupError("transd_energy: unknown relation id " + std::to_string(t.relation));
  const std::size_t h = static_cast<std::size_t>(t.head);
  const std::size_t r = static_cast<std::size_t>(t.relation);
  const std::size_t tt = static_cast<std::size_t>(t.tail);
  Tensor hp = project_value(table.ent[h].value, table.ent_p[h].value, table.rel_p[r].value);
  Tensor tp = project_value(table.ent[tt].value, table.ent_p[tt].value, table.rel_p[r].value);
  double s = 0.0;
  for (std::size_t i = 0; i < hp.size(); ++i) {
    const double d = hp.data[i] + table.rel[r].value.data[i] - tp.data[i];
    s += d * d;
  }
  return s;
}

Tape::Id transd_energy_node(Tape& tape, TransDTable& table, const Triple& t) {
  if (!table.has_entity(t.head) || !table.has_entity(t.tail))
    throw LookupError("transd_energy: unknown entity id");
  const std::size_t h = static_cast<std::size_t>(t.head);
  const std::size_t r = static_cast<std::size_t>(t.relation);
  const std::size_t tt = static_cast<std::size_t>(t.tail);
  auto rp = tape.param(table.rel_p[r]);
  auto hperp = project(tape, tape.param(table.ent[h]), tape.param(table.ent_p[h]), rp);
  auto tperp = project(tape, tape.param(table.ent[tt]), tape.param(table.ent_p[tt]), rp);
  return tape.sum_squares(tape.sub(tape.add(hperp, tape.param(table.rel[r])), tperp));
}

namespace {

Tensor random_unit_ball(Rng& rng, int dim) {
  Tensor t = Tensor::vec(static_cast<std::size_t>(dim));
  const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
  for (auto& v : t.data) v = rng.uniform(-bound, bound);
  const double n = norm2(t);
  if (n > 1.0)
    for (auto& v : t.data) v /= n;
  return t;
}

void project_unit_ball(Tensor& t) {
  const double n = norm2(t);
  if (n > 1.0)
    for (auto& v : t.data) v /= n;
}

/// Largest s in [0,1] with |e + s*c*r|^2 <= 1, for the convex quadratic in s.
double max_feasible_scale(const Tensor& e, double c, const Tensor& r) {
  const double A = c * c * dot_raw(r, r);
  const double B = 2.0 * c * dot_raw(e, r);
  const double C = dot_raw(e, e) - 1.0;
  if (A < 1e-300) return 1.0;
  const double disc = B * B - 4.0 * A * C;
  if (disc <= 0.0) return 1.0;
  const double root = (-B + std::sqrt(disc)) / (2.0 * A);
  return std::clamp(root, 0.0, 1.0);
}

}  // namespace

void enforce_norms(TransDTable& table, const KnowledgeGraph& g) {
  for (auto& p : table.ent) project_unit_ball(p.value);
  for (auto& p : table.rel) project_unit_ball(p.value);
  // Shrink entity projection vectors until every projected head/tail in the
  // triple set fits the unit ball. Shrinking e_p only moves e_perp toward e,
  // which already fits, so one pass per entity suffices.
  std::vector<double> scale(table.ent.size(), 1.0);
  for (const Triple& t : g.triples) {
    for (int slot = 0; slot < 2; ++slot) {
      const std::size_t e = static_cast<std::size_t>(slot == 0 ? t.head : t.tail);
      const std::size_t r = static_cast<std::size_t>(t.relation);
      const double c = dot_raw(table.ent_p[e].value, table.ent[e].value);
      const double s =
          max_feasible_scale(table.ent[e].value, c, table.rel_p[r].value);
      scale[e] = std::min(scale[e], s);
    }
  }
  for (std::size_t e = 0; e < table.ent.size(); ++e)
    if (scale[e] < 1.0)
      for (auto& v : table.ent_p[e].value.data) v *= scale[e];
}

TransDTable init_transd(const KnowledgeGraph& g, const TransDConfig& cfg) {
  if (cfg.dim < 1) throw ConfigError("transd: dim must be >= 1");
  if (cfg.margin <= 0.0) throw ConfigError("transd: margin must be positive");
  Rng rng(Rng::derive(cfg.seed, "transd-init"));
  TransDTable table;
  table.dim = cfg.dim;
  table.ent.reserve(g.entity_count());
  table.ent_p.reserve(g.entity_count());
  for (std::size_t i = 0; i < g.entity_count(); ++i) {
    table.ent.emplace_back("kg.e." + std::to_string(i), random_unit_ball(rng, cfg.dim));
    table.ent_p.emplace_back("kg.ep." + std::to_string(i), random_unit_ball(rng, cfg.dim));
  }
  for (std::size_t i = 0; i < g.relation_count(); ++i) {
    table.rel.emplace_back("kg.r." + std::to_string(i), random_unit_ball(rng, cfg.dim));
    table.rel_p.emplace_back("kg.rp." + std::to_string(i), random_unit_ball(rng, cfg.dim));
  }
  return table;
}

namespace {

struct CorruptionPools {
  // entity ids grouped by type, for type-compatible negative sampling
  std::vector<std::vector<int>> by_type;
  std::set<std::tuple<int, int, int>> existing;

  explicit CorruptionPools(const KnowledgeGraph& g) : by_type(3) {
    for (std::size_t i = 0; i < g.entity_count(); ++i)
      by_type[static_cast<std::size_t>(g.entities[i].type)].push_back(static_cast<int>(i));
    for (const Triple& t : g.triples) existing.insert({t.head, t.relation, t.tail});
  }

  /// Corrupts head or tail with a type-compatible entity yielding a
  /// non-existing triple. Falls back to any-entity corruption (with a
  /// warning) when the needed type pool is degenerate.
  Triple corrupt(const KnowledgeGraph& g, const Triple& t, Rng& rng, bool* warned) const {
    const bool corrupt_head = rng.bernoulli(0.5);
    const int original = corrupt_head ? t.head : t.tail;
    const auto& pool = by_type[static_cast<std::size_t>(g.type_of(original))];
    for (int attempt = 0; attempt < 64; ++attempt) {
      const auto& source = (pool.size() > 1) ? pool : all_pool(g);
      if (pool.size() <= 1 && !*warned) {
        std::cerr << "[transd] warning: type pool for "
                  << to_string(g.type_of(original))
                  << " is degenerate; falling back to any-entity corruption\n";
        *warned = true;
      }
      const int cand = source[rng.uniform_int(source.size())];
      if (cand == original) continue;
      Triple c = t;
      (corrupt_head ? c.head : c.tail) = cand;
      if (!existing.count({c.head, c.relation, c.tail})) return c;
    }
    // Dense graph corner: accept an existing triple as negative rather than loop.
    Triple c = t;
    const auto& source = (pool.size() > 1) ? pool : all_pool(g);
    (corrupt_head ? c.head : c.tail) = source[rng.uniform_int(source.size())];
    return c;
  }

 private:
  mutable std::vector<int> all_;
  const std::vector<int>& all_pool(const KnowledgeGraph& g) const {
    if (all_.empty())
      for (std::size_t i = 0; i < g.entity_count(); ++i) all_.push_back(static_cast<int>(i));
    return all_;
  }
};

}  // namespace

double margin_loss(const TransDTable& table, const KnowledgeGraph& g, double margin,
                   std::uint64_t seed) {
  if (g.triples.empty()) return 0.0;
  CorruptionPools pools(g);
  Rng rng(Rng::derive(seed, "transd-loss"));
  bool warned = true;  // silent during measurement
  double total = 0.0;
  for (const Triple& t : g.triples) {
    const Triple neg = pools.corrupt(g, t, rng, &warned);
    total += std::max(0.0, margin + transd_energy(table, t) - transd_energy(table, neg));
  }
  return total / static_cast<double>(g.triples.size());
}

TransDTable pretrain(const KnowledgeGraph& g, const TransDConfig& cfg) {
  if (g.triples.empty()) throw ConfigError("transd pretrain: graph has no triples");
  TransDTable table = init_transd(g, cfg);
  if (cfg.epochs == 0) return table;

  CorruptionPools pools(g);
  Rng rng(Rng::derive(cfg.seed, "transd-train"));
  bool warned = false;

  std::vector<std::size_t> order(g.triples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  Tape tape;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t idx : order) {
      const Triple& pos = g.triples[idx];
      for (int k = 0; k < cfg.negatives; ++k) {
        const Triple neg = pools.corrupt(g, pos, rng, &warned);
        tape.reset();
        auto e_pos = transd_energy_node(tape, table, pos);
        auto e_neg = transd_energy_node(tape, table, neg);
        const double violation =
            cfg.margin + tape.value(e_pos).data[0] - tape.value(e_neg).data[0];
        if (violation <= 0.0) continue;
        auto diff = tape.sub(e_pos, e_neg);
        tape.backward(diff);
        const std::size_t h = static_cast<std::size_t>(pos.head);
        const std::size_t tl = static_cast<std::size_t>(pos.tail);
        const std::size_t nh = static_cast<std::size_t>(neg.head);
        const std::size_t nt = static_cast<std::size_t>(neg.tail);
        const std::size_t r = static_cast<std::size_t>(pos.relation);
        Parameter* touched[] = {&table.ent[h],   &table.ent_p[h],  &table.ent[tl],
                                &table.ent_p[tl], &table.ent[nh],   &table.ent_p[nh],
                                &table.ent[nt],   &table.ent_p[nt], &table.rel[r],
                                &table.rel_p[r]};
        sgd_step(touched, cfg.lr);
      }
    }
    enforce_norms(table, g);
  }
  return table;
}

void save_transd(const TransDTable& table, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot write " + path);
  f << "# dim\t" << table.dim << "\n";
  char buf[64];
  auto dump = [&](const char* kind, const std::vector<Parameter>& ps) {
    for (std::size_t i = 0; i < ps.size(); ++i) {
      f << i << '\t' << kind;
      for (double v : ps[i].value.data) {
        std::snprintf(buf, sizeof buf, "%a", v);
        f << '\t' << buf;
      }
      f << '\n';
    }
  };
  dump("e", table.ent);
  dump("ep", table.ent_p);
  dump("r", table.rel);
  dump("rp", table.rel_p);
}

TransDTable load_transd(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open " + path);
  TransDTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream is(line);
    if (line[0] == '#') {
      std::string hash, key;
      is >> hash >> key;
      if (key == "dim") is >> table.dim;
      continue;
    }
    std::size_t id;
    std::string kind;
    is >> id >> kind;
    Tensor v = Tensor::vec(static_cast<std::size_t>(table.dim));
    std::string tok;
    for (int i = 0; i < table.dim; ++i) {
      if (!(is >> tok))
        throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                         std::to_string(table.dim) + " floats");
      v.data[static_cast<std::size_t>(i)] = std::stod(tok);  // stod parses %a hex floats
    }
    auto place = [&](std::vector<Parameter>& ps, const char* prefix) {
      if (ps.size() != id)
        throw ParseError(path + ":" + std::to_string(lineno) + ": ids must be dense and ordered");
      ps.emplace_back(std::string(prefix) + std::to_string(id), std::move(v));
    };
    if (kind == "e") place(table.ent, "kg.e.");
    else if (kind == "ep") place(table.ent_p, "kg.ep.");
    else if (kind == "r") place(table.rel, "kg.r.");
    else if (kind == "rp") place(table.rel_p, "kg.rp.");
    else throw ParseError(path + ":" + std::to_string(lineno) + ": unknown kind '" + kind + "'");
  }
  if (table.ent.size() != table.ent_p.size() || table.rel.size() != table.rel_p.size())
    throw ParseError(path + ": embedding/projection tables are misaligned");
  return table;
}

}  // namespace dcdir
