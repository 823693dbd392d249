#include "vgmgc/trainer.hpp"

#include <cmath>
#include <string>

namespace vgmgc {

namespace {

// Tags that keep the k-means calls of one epoch on separate seeds.
constexpr std::uint64_t pseudo_tag = 0x70;
constexpr std::uint64_t view_tag = 0x100;
constexpr std::uint64_t global_tag = 0x71;
constexpr std::uint64_t final_tag = 0x72;

std::uint64_t epoch_seed(const RunConfig& config, int epoch, std::uint64_t tag) {
  return nn::mix_seed(nn::mix_seed(config.seed, static_cast<std::uint64_t>(epoch)), tag);
}

KMeansOptions kmeans_options(const RunConfig& config) {
  KMeansOptions opts;
  opts.restarts = config.restarts;
  return opts;
}

void require_finite(double value, const char* term, int epoch) {
  if (!std::isfinite(value)) {
    throw NonFiniteError("epoch " + std::to_string(epoch) + ": " + term + " is not finite (" + std::to_string(value) +
                         ")");
  }
}

}  // namespace

TrainState TrainState::init(const MultiViewDataset& dataset, const RunConfig& config) {
  config.validate();
  dataset.validate();
  TrainState state;
  state.posterior = PosteriorNet::create(dataset.x_global.cols(), config.hidden, config.dropout,
                                         nn::mix_seed(config.seed, 1));
  for (std::size_t v = 0; v < dataset.num_views(); ++v) {
    const auto& view = dataset.views[v];
    state.encoders.push_back(ViewEncoder::create(view.features.cols(), config.hidden, config.embed_dim,
                                                 nn::mix_seed(config.seed, 100 + v)));
    state.specific.push_back(message_pass(view.features, row_normalize(view.graph), config.order));
  }
  state.global_decoder = make_global_decoder(config.hidden, config.hidden, dataset.x_global.cols(), config.dropout,
                                             nn::mix_seed(config.seed, 2));
  state.optimizer = nn::Adam(nn::AdamConfig{config.lr});
  state.beliefs = Beliefs::unit(dataset.num_views(), config.rho);
  return state;
}

std::vector<nn::ParamMatrix*> TrainState::parameters() {
  std::vector<nn::ParamMatrix*> out = posterior.parameters();
  for (ViewEncoder& enc : encoders) {
    for (nn::ParamMatrix* p : enc.parameters()) out.push_back(p);
  }
  for (auto& p : global_decoder.params) out.push_back(&p);
  return out;
}

ObjectiveTerms build_objective(nn::Tape& tape, TrainState& state, const MultiViewDataset& dataset,
                               const RunConfig& config, const EpochConstants& constants, bool training, nn::Rng& rng) {
  const std::size_t views = dataset.num_views();
  if (constants.beliefs.size() != views || constants.view_centroids.size() != views) {
    throw InvalidArgument("build_objective: epoch constants do not match the view count");
  }
  ObjectiveTerms terms;
  const Var x_global = tape.constant(dataset.x_global);
  const PosteriorLogits post = infer_posterior(tape, x_global, state.posterior, training, rng);
  terms.consensus = relax_with_noise(tape, post.alpha, constants.noise, config.tau);
  const Var s_norm = nn::row_normalize(terms.consensus.s);

  std::vector<Var> q_views;
  std::vector<Var> decoded;
  Var recon;
  for (std::size_t v = 0; v < views; ++v) {
    const Matrix& x_v = dataset.views[v].features;
    Var z = encode_view_cached(tape, x_v, state.specific[v], s_norm, state.encoders[v].embed, config.order, training,
                               rng);
    terms.view_embeddings.push_back(z);
    Var r = reconstruction_loss(tape, x_v, z, state.encoders[v].decoder, training, rng);
    recon = recon.valid() ? nn::add(recon, r) : r;
    q_views.push_back(soft_assignment(z, constants.view_centroids[v]));
    decoded.push_back(decode_adjacency_logits(z));
  }
  recon = nn::add(recon, reconstruction_loss(tape, dataset.x_global, post.q_embed, state.global_decoder, training, rng));
  terms.reconstruction = recon;

  const Var z_fused = fuse(terms.view_embeddings, constants.beliefs);
  terms.clustering = clustering_loss(constants.target, q_views, soft_assignment(z_fused, constants.global_centroids));

  const std::vector<Graph> graphs = dataset.graphs();
  terms.elbo = elbo_loss(tape, graphs, decoded, terms.consensus, constants.prior);

  Var total = terms.reconstruction;
  if (config.gamma_c != 0.0) total = nn::add(total, nn::scale(terms.clustering, config.gamma_c));
  if (config.gamma_E != 0.0) total = nn::sub(total, nn::scale(terms.elbo, config.gamma_E));
  terms.total = total;
  return terms;
}

EvalOutputs evaluate_embeddings(TrainState& state, const MultiViewDataset& dataset, const RunConfig& config) {
  nn::Tape tape;
  nn::Rng unused(0);
  const PosteriorLogits post = infer_posterior(tape, tape.constant(dataset.x_global), state.posterior, false, unused);
  const ConsensusSample sample =
      relax_with_noise(tape, post.alpha, Matrix::Zero(dataset.n(), dataset.n()), config.tau);
  const Var s_norm = nn::row_normalize(sample.s);
  EvalOutputs out;
  for (std::size_t v = 0; v < dataset.num_views(); ++v) {
    out.view_embeddings.push_back(encode_view_cached(tape, dataset.views[v].features, state.specific[v], s_norm,
                                                     state.encoders[v].embed, config.order, false, unused)
                                      .value());
  }
  out.consensus = sample.s.value();
  return out;
}

EpochConstants prepare_epoch(TrainState& state, const MultiViewDataset& dataset, const RunConfig& config) {
  const int c = dataset.clusters;
  const KMeansOptions opts = kmeans_options(config);
  const std::vector<Graph> graphs = dataset.graphs();
  EpochConstants k;
  k.prior = compute_prior_beta(graphs, state.beliefs.b);

  const EvalOutputs eval = evaluate_embeddings(state, dataset, config);
  k.pseudo_labels = kmeans(fuse(eval.view_embeddings, state.beliefs.b), c, epoch_seed(config, state.epoch, pseudo_tag),
                           opts)
                        .labels;
  std::vector<Labels> view_labels;
  for (std::size_t v = 0; v < eval.view_embeddings.size(); ++v) {
    ClusterResult r = kmeans(eval.view_embeddings[v], c, epoch_seed(config, state.epoch, view_tag + v), opts);
    view_labels.push_back(std::move(r.labels));
    k.view_centroids.push_back(std::move(r.centroids));
  }
  k.beliefs = update_beliefs(k.pseudo_labels, view_labels, config.rho).b;

  const Matrix z_fused = fuse(eval.view_embeddings, k.beliefs);
  k.global_centroids = kmeans(z_fused, c, epoch_seed(config, state.epoch, global_tag), opts).centroids;
  k.target = target_distribution(soft_assignment(z_fused, k.global_centroids));

  nn::Rng noise_rng = nn::make_stream(config.seed, static_cast<std::uint64_t>(state.epoch), nn::Stream::consensus);
  k.noise = logistic_noise(dataset.n(), dataset.n(), noise_rng);
  return k;
}

EpochReport train_epoch(TrainState& state, const MultiViewDataset& dataset, const RunConfig& config) {
  EpochConstants k = prepare_epoch(state, dataset, config);
  state.prior = k.prior;

  const std::vector<nn::ParamMatrix*> params = state.parameters();
  nn::zero_grad(params);
  nn::Rng dropout_rng = nn::make_stream(config.seed, static_cast<std::uint64_t>(state.epoch), nn::Stream::dropout);
  nn::Tape tape;
  const ObjectiveTerms terms = build_objective(tape, state, dataset, config, k, true, dropout_rng);

  EpochReport report;
  report.losses = {state.epoch, terms.reconstruction.scalar(), terms.clustering.scalar(), terms.elbo.scalar(),
                   terms.total.scalar()};
  require_finite(report.losses.reconstruction, "L_r", state.epoch);
  require_finite(report.losses.clustering, "L_c", state.epoch);
  require_finite(report.losses.elbo, "L_E", state.epoch);
  require_finite(report.losses.total, "total loss", state.epoch);

  tape.backward(terms.total);
  for (const nn::ParamMatrix* p : params) {
    if (!p->grad.allFinite()) throw NonFiniteError("epoch " + std::to_string(state.epoch) + ": gradient is not finite");
  }
  state.optimizer.step(params);

  state.beliefs.b = k.beliefs;
  report.beliefs = k.beliefs;
  report.pseudo_labels = std::move(k.pseudo_labels);
  ++state.epoch;
  return report;
}

FitResult fit(const MultiViewDataset& dataset, const RunConfig& config) {
  TrainState state = TrainState::init(dataset, config);
  FitResult result;
  result.beliefs_history.push_back(state.beliefs.b);
  for (int e = 0; e < config.epochs; ++e) {
    EpochReport report = train_epoch(state, dataset, config);
    result.losses.push_back(report.losses);
    result.beliefs_history.push_back(std::move(report.beliefs));
  }
  EvalOutputs eval = evaluate_embeddings(state, dataset, config);
  result.fused_embedding = fuse(eval.view_embeddings, state.beliefs.b);
  result.clusters = kmeans(result.fused_embedding, dataset.clusters, epoch_seed(config, config.epochs, final_tag),
                           kmeans_options(config));
  if (dataset.labels) result.scores = evaluate(*dataset.labels, result.clusters.labels);
  result.view_embeddings = std::move(eval.view_embeddings);
  result.consensus = std::move(eval.consensus);
  return result;
}

RunArtifacts to_artifacts(const FitResult& result, const RunConfig& config) {
  RunArtifacts a;
  a.labels = result.clusters.labels;
  a.scores = result.scores;
  a.beliefs_history = result.beliefs_history;
  a.losses = result.losses;
  a.view_embeddings = result.view_embeddings;
  a.fused_embedding = result.fused_embedding;
  a.config = config;
  return a;
}

}  // namespace vgmgc
