#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "dcdir/path_engine.hpp"
#include "testutil.hpp"

using namespace dcdir;

namespace {

KnowledgeGraph load_toy() {
  return load_kg(testutil::fixtures_dir() + "/toy/entities.tsv",
                 testutil::fixtures_dir() + "/toy/triples.tsv");
}

bool adjacent(const KnowledgeGraph& g, int a, int b) {
  for (const Neighbor& n : g.adjacency[static_cast<std::size_t>(a)])
    if (n.entity == b) return true;
  return false;
}

// Independent oracle: checks every typed 5-tuple of entity ids directly.
std::set<std::pair<int, std::array<int, 5>>> brute_force(const KnowledgeGraph& g,
                                                         std::span<const int> history,
                                                         int target) {
  std::set<int> starts(history.begin(), history.end());
  starts.erase(target);
  std::set<std::pair<int, std::array<int, 5>>> found;
  const auto schemas = default_schemas();
  const int n = static_cast<int>(g.entity_count());
  for (std::size_t si = 0; si < schemas.size(); ++si) {
    const auto& types = schemas[si].types;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d) {
            std::array<int, 5> tup = {a, b, c, d, target};
            bool ok = starts.count(a) > 0;
            for (int i = 0; ok && i < 5; ++i)
              ok = g.type_of(tup[static_cast<std::size_t>(i)]) == types[static_cast<std::size_t>(i)];
            for (int i = 0; ok && i < 5; ++i)
              for (int j = i + 1; j < 5; ++j)
                if (tup[static_cast<std::size_t>(i)] == tup[static_cast<std::size_t>(j)]) ok = false;
            for (int i = 0; ok && i < 4; ++i)
              ok = adjacent(g, tup[static_cast<std::size_t>(i)], tup[static_cast<std::size_t>(i + 1)]);
            if (ok) found.insert({static_cast<int>(si), tup});
          }
  }
  return found;
}

TransDTable toy_table(const KnowledgeGraph& g, int dim, std::uint64_t seed) {
  TransDConfig cfg;
  cfg.dim = dim;
  cfg.epochs = 0;
  cfg.seed = seed;
  return init_transd(g, cfg);
}

}  // namespace

TEST_CASE("empty history yields an empty path set") {
  KnowledgeGraph g = load_toy();
  PathSet ps = enumerate_paths(g, {}, g.entity_by_name("AXBFB"), default_schemas());
  CHECK(ps.empty());
}

TEST_CASE("the documented example chain is recovered") {
  KnowledgeGraph g = load_toy();
  const int gef = g.entity_by_name("GEF");
  const int axbfb = g.entity_by_name("AXBFB");
  int history[] = {gef};
  PathSet ps = enumerate_paths(g, history, axbfb, default_schemas());
  std::array<int, 5> expected = {gef, g.entity_by_name("compensate critical illness"),
                                 g.entity_by_name("insure critical illness"),
                                 g.entity_by_name("high premium"), axbfb};
  bool found = false;
  for (const auto& p : ps.paths)
    if (p.schema_index == 0 && p.entities == expected) found = true;
  CHECK(found);
  CHECK(validate_path_set(g, ps, history, default_schemas()).empty());
}

TEST_CASE("enumeration matches the brute-force oracle on the toy graph") {
  KnowledgeGraph g = load_toy();
  // several history/target combinations, including target inside history
  std::vector<std::vector<int>> histories = {
      {0}, {0, 2}, {0, 2, 4}, {1, 0}, {5, 3, 2, 0}, {1, 2, 3, 4, 5}};
  for (const auto& h : histories) {
    for (int target = 0; target < 6; ++target) {
      PathSet ps = enumerate_paths(g, h, target, default_schemas());
      auto oracle = brute_force(g, h, target);
      std::set<std::pair<int, std::array<int, 5>>> got;
      for (const auto& p : ps.paths) got.insert({p.schema_index, p.entities});
      CHECK(got.size() == ps.size());  // no duplicates in output
      CHECK(got == oracle);
      CHECK(validate_path_set(g, ps, h, default_schemas()).empty());
    }
  }
}

TEST_CASE("enumeration order is deterministic and lexicographic per schema") {
  KnowledgeGraph g = load_toy();
  int history[] = {0, 1, 3, 4};
  PathSet a = enumerate_paths(g, history, 2, default_schemas());
  PathSet b = enumerate_paths(g, history, 2, default_schemas());
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.paths[i].entities == b.paths[i].entities);
    if (i > 0 && a.paths[i - 1].schema_index == a.paths[i].schema_index)
      CHECK(a.paths[i - 1].entities < a.paths[i].entities);
  }
}

TEST_CASE("unknown ids are lookup errors") {
  KnowledgeGraph g = load_toy();
  int history[] = {0};
  CHECK_THROWS_AS((void)enumerate_paths(g, history, 999, default_schemas()), LookupError);
  int bad_history[] = {999};
  CHECK_THROWS_AS((void)enumerate_paths(g, bad_history, 1, default_schemas()), LookupError);
  // feature as target is rejected
  CHECK_THROWS_AS((void)enumerate_paths(g, history, g.entity_by_name("high premium"),
                                        default_schemas()),
                  LookupError);
}

TEST_CASE("recency terms: singleton is exactly 1, equal positions split evenly") {
  KnowledgeGraph g = load_toy();
  TransDTable table = toy_table(g, 8, 3);

  int history[] = {0};
  PathSet ps = enumerate_paths(g, history, 1, default_schemas());
  REQUIRE(ps.size() >= 1);
  PathSet single;
  single.target = ps.target;
  single.paths = {ps.paths[0]};
  score_paths(single, table, 1);
  CHECK(single.paths[0].recency == doctest::Approx(1.0).epsilon(1e-12));

  // two instances sharing the same start position
  int hist2[] = {0, 1, 3, 4};
  PathSet ps2 = enumerate_paths(g, hist2, 2, default_schemas());
  REQUIRE(ps2.size() >= 2);
  PathSet pair;
  pair.target = ps2.target;
  pair.paths = {ps2.paths[0], ps2.paths[1]};
  pair.paths[0].start_position = 1;
  pair.paths[1].start_position = 1;
  score_paths(pair, table, 3);
  CHECK(pair.paths[0].recency == doctest::Approx(0.5));
  CHECK(pair.paths[1].recency == doctest::Approx(0.5));
}

TEST_CASE("recency terms sum to one across larger sets") {
  KnowledgeGraph g = load_toy();
  TransDTable table = toy_table(g, 8, 4);
  int history[] = {0, 1, 3, 4};
  PathSet ps = enumerate_paths(g, history, 2, default_schemas());
  REQUIRE(ps.size() > 2);
  score_paths(ps, table, 4);
  double sum = 0.0;
  for (const auto& p : ps.paths) sum += p.recency;
  CHECK(std::fabs(sum - 1.0) < 1e-12);
}

TEST_CASE("similarity term hits the cosine extremes") {
  // hand-built two-entity-type table, d = 2
  std::vector<Entity> ents(5, Entity{"p", EntityType::Product});
  ents[1].type = EntityType::Feature;
  ents[2].type = EntityType::Need;
  ents[3].type = EntityType::Feature;
  KnowledgeGraph g = build_kg(ents, {"r"},
                              {{0, 0, 1}, {1, 0, 2}, {3, 0, 2}, {4, 0, 3}});
  TransDTable table = toy_table(g, 2, 1);
  for (int i = 0; i < 4; ++i) table.ent[static_cast<std::size_t>(i)].value = Tensor::from({1, 0});

  int history[] = {0};
  PathSet ps = enumerate_paths(g, history, 4, default_schemas());
  REQUIRE(ps.size() == 1);

  table.ent[4].value = Tensor::from({0, 1});  // orthogonal endpoint
  score_paths(ps, table, 1);
  CHECK(ps.paths[0].score - ps.paths[0].recency == doctest::Approx(0.0).epsilon(1e-12));

  table.ent[4].value = Tensor::from({1, 0});  // aligned endpoint
  score_paths(ps, table, 1);
  CHECK(ps.paths[0].score - ps.paths[0].recency == doctest::Approx(4.0));

  // positive rescaling of any entity leaves the similarity unchanged
  table.ent[2].value = Tensor::from({17.5, 0});
  score_paths(ps, table, 1);
  CHECK(ps.paths[0].score - ps.paths[0].recency == doctest::Approx(4.0));

  table.ent[3].value = Tensor::from({0, 0});  // zero norm must be named
  try {
    score_paths(ps, table, 1);
    FAIL("expected ScoringError");
  } catch (const ScoringError& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
}

TEST_CASE("top_k equals a full-sort oracle and keeps only best scores") {
  KnowledgeGraph g = load_toy();
  TransDTable table = toy_table(g, 8, 11);
  int history[] = {0, 1, 3, 4};
  PathSet ps = enumerate_paths(g, history, 2, default_schemas());
  score_paths(ps, table, 4);
  REQUIRE(ps.size() >= 4);

  for (std::size_t k : {std::size_t(1), std::size_t(2), std::size_t(3), ps.size() + 10}) {
    PathSet sel = top_k(ps, k);
    CHECK(sel.size() == std::min(k, ps.size()));

    // independent oracle: full sort with an explicitly written comparator
    std::vector<PathInstance> sorted = ps.paths;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const PathInstance& a, const PathInstance& b) {
                       if (a.score > b.score) return true;
                       if (a.score < b.score) return false;
                       return a.entities < b.entities;
                     });
    for (std::size_t i = 0; i < sel.size(); ++i) {
      CHECK(sel.paths[i].entities == sorted[i].entities);
      CHECK(sel.paths[i].score == sorted[i].score);
    }
    // no excluded path strictly beats an included one
    double worst_kept = sel.paths.back().score;
    std::set<std::array<int, 5>> kept;
    for (const auto& p : sel.paths) kept.insert(p.entities);
    for (const auto& p : ps.paths)
      if (!kept.count(p.entities)) CHECK(p.score <= worst_kept);
  }
}

TEST_CASE("random_k is seeded, size-correct, and near-uniform") {
  KnowledgeGraph g = load_toy();
  TransDTable table = toy_table(g, 8, 13);
  int history[] = {0, 1, 3, 4};
  PathSet ps = enumerate_paths(g, history, 2, default_schemas());
  score_paths(ps, table, 4);
  const std::size_t n = ps.size();
  REQUIRE(n >= 4);

  Rng r1(55), r2(55);
  PathSet a = random_k(ps, 2, r1);
  PathSet b = random_k(ps, 2, r2);
  REQUIRE(a.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK(a.paths[i].entities == b.paths[i].entities);

  Rng r3(1);
  CHECK(random_k(ps, n + 5, r3).size() == n);

  // selection frequency over many seeds approaches k/n
  const std::size_t k = 2;
  std::map<std::array<int, 5>, int> counts;
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    Rng rng(Rng::derive(99, "mc", static_cast<std::uint64_t>(t)));
    PathSet sel2 = random_k(ps, k, rng);
    for (const auto& p : sel2.paths) counts[p.entities]++;
  }
  const double expect = static_cast<double>(k) / static_cast<double>(n);
  for (const auto& p : ps.paths) {
    const double freq = counts[p.entities] / static_cast<double>(trials);
    CHECK(std::fabs(freq - expect) < 0.02);
  }
}

TEST_CASE("2-hop aggregation matches a BFS oracle") {
  KnowledgeGraph g = load_toy();
  TransDTable table = toy_table(g, 6, 21);

  for (int item = 0; item < 6; ++item) {
    // oracle: BFS to depth 2 over the undirected adjacency
    std::set<int> want{item};
    for (const Neighbor& n1 : g.adjacency[static_cast<std::size_t>(item)]) {
      want.insert(n1.entity);
      for (const Neighbor& n2 : g.adjacency[static_cast<std::size_t>(n1.entity)])
        want.insert(n2.entity);
    }
    Tensor mean = Tensor::vec(6);
    for (int e : want)
      for (std::size_t i = 0; i < 6; ++i)
        mean.data[i] += table.entity_vec(e).data[i] / static_cast<double>(want.size());

    Tensor got = kge_aggregate_2hop_value(g, item, table);
    for (std::size_t i = 0; i < 6; ++i) CHECK(got.data[i] == doctest::Approx(mean.data[i]));
  }

  // isolated item: only its own embedding
  std::vector<Entity> ents = {{"lone", EntityType::Product}, {"other", EntityType::Product}};
  KnowledgeGraph iso = build_kg(ents, {}, {});
  TransDTable t2 = toy_table(iso, 4, 2);
  Tensor got = kge_aggregate_2hop_value(iso, 0, t2);
  CHECK(got.data == t2.entity_vec(0).data);

  // star: item plus two direct neighbors and nothing else
  std::vector<Entity> star = {{"c", EntityType::Product},
                              {"f", EntityType::Feature},
                              {"n", EntityType::Need}};
  KnowledgeGraph sg = build_kg(star, {"r"}, {{0, 0, 1}, {0, 0, 2}});
  TransDTable t3 = toy_table(sg, 4, 9);
  Tensor sm = kge_aggregate_2hop_value(sg, 0, t3);
  for (std::size_t i = 0; i < 4; ++i) {
    const double want = (t3.entity_vec(0).data[i] + t3.entity_vec(1).data[i] +
                         t3.entity_vec(2).data[i]) / 3.0;
    CHECK(sm.data[i] == doctest::Approx(want));
  }

  CHECK_THROWS_AS((void)kge_aggregate_2hop_value(g, 999, table), LookupError);
}

TEST_CASE("enumeration cap truncates deterministically") {
  KnowledgeGraph g = load_toy();
  int history[] = {0, 1, 3, 4};
  PathSet full = enumerate_paths(g, history, 2, default_schemas());
  REQUIRE(full.size() > 3);
  PathSet capped = enumerate_paths(g, history, 2, default_schemas(), 3);
  REQUIRE(capped.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(capped.paths[i].entities == full.paths[i].entities);
}
