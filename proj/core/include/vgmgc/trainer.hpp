#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vgmgc/cluster.hpp"
#include "vgmgc/dataio.hpp"
#include "vgmgc/encoder.hpp"
#include "vgmgc/nn/optim.hpp"
#include "vgmgc/vargen.hpp"

namespace vgmgc {

/// Everything that persists across epochs.
struct TrainState {
  PosteriorNet posterior;
  std::vector<ViewEncoder> encoders;
  nn::Mlp global_decoder;
  nn::Adam optimizer;
  Beliefs beliefs;
  PriorBeta prior;
  int epoch = 0;
  /// psi(X^v, A^v) depends only on the data, so it is computed once.
  std::vector<Matrix> specific;

  static TrainState init(const MultiViewDataset& dataset, const RunConfig& config);
  std::vector<nn::ParamMatrix*> parameters();
};

/// Quantities held fixed while one epoch's objective is differentiated.
struct EpochConstants {
  PriorBeta prior;
  /// Logistic noise of the relaxed consensus sample (all zero in eval mode).
  Matrix noise;
  std::vector<double> beliefs;
  std::vector<Matrix> view_centroids;
  Matrix global_centroids;
  /// Sharpened target P computed from the fused embedding.
  Matrix target;
  Labels pseudo_labels;
};

struct ObjectiveTerms {
  Var reconstruction;  ///< L_r
  Var clustering;      ///< L_c
  Var elbo;            ///< L_E
  Var total;           ///< L_r + gamma_c L_c - gamma_E L_E
  std::vector<Var> view_embeddings;
  ConsensusSample consensus;
};

/// Records the full objective on `tape`. Dropout masks come from `rng` when
/// `training`; everything else random is fixed by `constants`.
ObjectiveTerms build_objective(nn::Tape& tape, TrainState& state, const MultiViewDataset& dataset,
                               const RunConfig& config, const EpochConstants& constants, bool training, nn::Rng& rng);

struct EvalOutputs {
  std::vector<Matrix> view_embeddings;
  /// Consensus edges sampled at U = 0.5.
  Matrix consensus;
};

/// Deterministic forward pass: no dropout, median consensus sample.
EvalOutputs evaluate_embeddings(TrainState& state, const MultiViewDataset& dataset, const RunConfig& config);

/// Steps (1)-(7) of an epoch up to, but excluding, the gradient step: prior,
/// pseudo-labels, belief update, centroids, target and consensus noise.
/// Leaves `state` untouched apart from the forward evaluation.
EpochConstants prepare_epoch(TrainState& state, const MultiViewDataset& dataset, const RunConfig& config);

struct EpochReport {
  LossRecord losses;
  std::vector<double> beliefs;
  Labels pseudo_labels;
};

/// One full epoch including backward and the Adam step. Throws
/// NonFiniteError naming the first loss term that is not finite.
EpochReport train_epoch(TrainState& state, const MultiViewDataset& dataset, const RunConfig& config);

struct FitResult {
  ClusterResult clusters;
  std::optional<ClusteringScores> scores;
  /// Row 0 is the initial beliefs, then one row per epoch.
  std::vector<std::vector<double>> beliefs_history;
  std::vector<LossRecord> losses;
  std::vector<Matrix> view_embeddings;
  Matrix fused_embedding;
  Matrix consensus;
};

/// Runs `config.epochs` epochs and clusters the final eval-mode fused embedding.
FitResult fit(const MultiViewDataset& dataset, const RunConfig& config);

RunArtifacts to_artifacts(const FitResult& result, const RunConfig& config);

}  // namespace vgmgc
