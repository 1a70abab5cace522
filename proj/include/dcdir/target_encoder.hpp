#pragma once

#include <span>

#include "dcdir/gru.hpp"
#include "dcdir/path_engine.hpp"

namespace dcdir {

/// Learned stand-in for the target-domain user feature when a user/target
/// pair has no schema-conforming path at all.
struct NoPathFallback {
  Parameter vec;
  static NoPathFallback init(int dim) {
    return {Parameter("fallback.u0", Tensor::vec(static_cast<std::size_t>(dim)))};
  }
};

/// Runs the target-domain cell over a path's entity embeddings from a zero
/// state and returns the final hidden state. With fine_tune the entity
/// vectors join the tape as parameters, otherwise they enter as constants.
Tape::Id encode_path(Tape& tape, GruCell& cell, const PathInstance& path, TransDTable& table,
                     bool fine_tune);

struct TargetFeature {
  Tape::Id node;
  bool used_fallback = false;
  std::size_t pooled_paths = 0;
};

/// Elementwise max over the encodings of the selected paths; the fallback
/// vector when the set is empty.
TargetFeature user_target_feature(Tape& tape, GruCell& cell, const PathSet& topk,
                                  TransDTable& table, NoPathFallback& fallback, bool fine_tune);

/// sigma(u . v): interaction probability from user and item features.
Tape::Id predict(Tape& tape, Tape::Id user_feature, Tape::Id item_feature);
double predict_value(const Tensor& user_feature, const Tensor& item_feature);

/// Mean embedding of the product's directly linked Feature/Need entities
/// (attribute-only user/item representation); zero vector when the product
/// has no such links.
Tape::Id encode_attributes(Tape& tape, const KnowledgeGraph& g, int item, TransDTable& table,
                           bool fine_tune);
Tensor encode_attributes_value(const KnowledgeGraph& g, int item, const TransDTable& table);

/// 2-hop aggregation on the tape (ablation arm of the target feature).
Tape::Id encode_2hop(Tape& tape, const KnowledgeGraph& g, int item, TransDTable& table,
                     bool fine_tune);

}  // namespace dcdir
