#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcdir/autodiff.hpp"
#include "dcdir/kg.hpp"

namespace dcdir {

struct TransDConfig {
  int dim = 50;
  double margin = 1.0;
  int epochs = 100;
  double lr = 0.01;
  int negatives = 1;  // corruptions per positive
  std::uint64_t seed = 7;
};

/// Entity/relation embeddings with their projection vectors, all dimension d.
/// Entity and relation dims are equal here, so the projected vector reduces
/// to e + (e_p . e) r_p with no identity-matrix padding.
struct TransDTable {
  int dim = 0;
  std::vector<Parameter> ent;    // embedding e, by internal entity id
  std::vector<Parameter> ent_p;  // projection vector e_p
  std::vector<Parameter> rel;    // embedding r, by internal relation id
  std::vector<Parameter> rel_p;  // projection vector r_p

  const Tensor& entity_vec(int e) const;
  Tensor& entity_vec_mut(int e);
  bool has_entity(int e) const {
    return e >= 0 && static_cast<std::size_t>(e) < ent.size();
  }
};

/// Projected embedding value: e + (e_p . e) r_p.
Tensor project_value(const Tensor& e, const Tensor& e_p, const Tensor& r_p);

/// Same projection recorded on a tape.
Tape::Id project(Tape& tape, Tape::Id e, Tape::Id e_p, Tape::Id r_p);

/// Squared-L2 translation energy |h_perp + r - t_perp|^2; lower means more
/// plausible.
double transd_energy(const TransDTable& table, const Triple& triple);

Tape::Id transd_energy_node(Tape& tape, TransDTable& table, const Triple& triple);

/// Seeded random init (uniform in [-6/sqrt(d), 6/sqrt(d)], then projected to
/// the unit ball) without any training; pretrain() with epochs=0 returns this.
TransDTable init_transd(const KnowledgeGraph& g, const TransDConfig& cfg);

/// Margin-ranking pretraining with type-compatible head-or-tail corruption
/// and per-epoch norm re-projection.
TransDTable pretrain(const KnowledgeGraph& g, const TransDConfig& cfg);

/// Mean margin loss over all triples with one seeded corruption each.
double margin_loss(const TransDTable& table, const KnowledgeGraph& g, double margin,
                   std::uint64_t seed);

/// Re-projects embeddings to the unit ball and shrinks projection vectors
/// until every training triple's projected head/tail also fits.
void enforce_norms(TransDTable& table, const KnowledgeGraph& g);

/// Checkpoint: TSV lines `id<TAB>kind(e|ep|r|rp)<TAB>v0 .. v{d-1}` with
/// hex-float values, so a round-trip is bit-exact.
void save_transd(const TransDTable& table, const std::string& path);
TransDTable load_transd(const std::string& path);

}  // namespace dcdir
