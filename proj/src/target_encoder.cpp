#include "dcdir/target_encoder.hpp"

namespace dcdir {

Tape::Id encode_path(Tape& tape, GruCell& cell, const PathInstance& path, TransDTable& table,
                     bool fine_tune) {
  Tape::Id h = tape.constant(Tensor::vec(static_cast<std::size_t>(cell.dim)));
  for (int e : path.entities) {
    Parameter& emb = table.ent[static_cast<std::size_t>(e)];
    Tape::Id x = fine_tune ? tape.param(emb) : tape.constant(&emb.value);
    h = gru_step(tape, cell, x, h);
  }
  return h;
}

TargetFeature user_target_feature(Tape& tape, GruCell& cell, const PathSet& topk,
                                  TransDTable& table, NoPathFallback& fallback, bool fine_tune) {
  if (topk.empty()) return {tape.param(fallback.vec), true, 0};
  std::vector<Tape::Id> rows;
  rows.reserve(topk.size());
  for (const PathInstance& p : topk.paths)
    rows.push_back(encode_path(tape, cell, p, table, fine_tune));
  return {tape.max_pool(rows), false, rows.size()};
}

Tape::Id predict(Tape& tape, Tape::Id user_feature, Tape::Id item_feature) {
  return tape.sigmoid(tape.dot(user_feature, item_feature));
}

double predict_value(const Tensor& user_feature, const Tensor& item_feature) {
  if (user_feature.size() != item_feature.size())
    throw DimensionError("predict: features " + user_feature.shape_str() + " vs " +
                         item_feature.shape_str());
  return sigmoid_scalar(dot_raw(user_feature, item_feature));
}

namespace {
std::vector<int> attribute_ids(const KnowledgeGraph& g, int item) {
  std::vector<int> ids;
  for (const Neighbor& n : g.adjacency[static_cast<std::size_t>(item)]) {
    const EntityType t = g.type_of(n.entity);
    if (t == EntityType::Feature || t == EntityType::Need)
      if (ids.empty() || ids.back() != n.entity) ids.push_back(n.entity);
  }
  return ids;
}
}  // namespace

Tape::Id encode_attributes(Tape& tape, const KnowledgeGraph& g, int item, TransDTable& table,
                           bool fine_tune) {
  if (!g.has_entity(item))
    throw LookupError("encode_attributes: unknown entity " + std::to_string(item));
  const auto ids = attribute_ids(g, item);
  if (ids.empty()) return tape.constant(Tensor::vec(static_cast<std::size_t>(table.dim)));
  std::vector<Tape::Id> rows;
  for (int e : ids) {
    Parameter& emb = table.ent[static_cast<std::size_t>(e)];
    rows.push_back(fine_tune ? tape.param(emb) : tape.constant(&emb.value));
  }
  return tape.scale_const(tape.add_n(rows), 1.0 / static_cast<double>(rows.size()));
}

Tensor encode_attributes_value(const KnowledgeGraph& g, int item, const TransDTable& table) {
  if (!g.has_entity(item))
    throw LookupError("encode_attributes: unknown entity " + std::to_string(item));
  const auto ids = attribute_ids(g, item);
  Tensor out = Tensor::vec(static_cast<std::size_t>(table.dim));
  if (ids.empty()) return out;
  for (int e : ids) {
    const Tensor& v = table.entity_vec(e);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += v.data[i];
  }
  for (auto& v : out.data) v *= 1.0 / static_cast<double>(ids.size());
  return out;
}

Tape::Id encode_2hop(Tape& tape, const KnowledgeGraph& g, int item, TransDTable& table,
                     bool fine_tune) {
  const auto ids = two_hop_closure(g, item);
  std::vector<Tape::Id> rows;
  rows.reserve(ids.size());
  for (int e : ids) {
    Parameter& emb = table.ent[static_cast<std::size_t>(e)];
    rows.push_back(fine_tune ? tape.param(emb) : tape.constant(&emb.value));
  }
  return tape.scale_const(tape.add_n(rows), 1.0 / static_cast<double>(rows.size()));
}

}  // namespace dcdir
