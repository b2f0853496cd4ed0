#pragma once

#include "latmdp/dataset.hpp"
#include "latmdp/nets/adam.hpp"
#include "latmdp/nets/checkpoint.hpp"
#include "latmdp/repr/losses.hpp"

#include <json.hpp>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace latmdp::repr {

enum class Baseline { OURS, MDP_H, D_MDP, JSAE, JSAE_C };

inline Baseline baseline_from_string(const std::string& s) {
  if (s == "OURS" || s == "ours") return Baseline::OURS;
  if (s == "MDP_H" || s == "mdp-h" || s == "mdp_h") return Baseline::MDP_H;
  if (s == "D_MDP" || s == "d-mdp" || s == "d_mdp") return Baseline::D_MDP;
  if (s == "JSAE" || s == "jsae") return Baseline::JSAE;
  if (s == "JSAE_C" || s == "jsae-c" || s == "jsae_c") return Baseline::JSAE_C;
  throw std::invalid_argument("unknown baseline: " + s);
}

inline const char* to_string(Baseline b) {
  switch (b) {
    case Baseline::OURS: return "OURS";
    case Baseline::MDP_H: return "MDP_H";
    case Baseline::D_MDP: return "D_MDP";
    case Baseline::JSAE: return "JSAE";
    case Baseline::JSAE_C: return "JSAE_C";
  }
  return "?";
}

struct BaselineWiring {
  LossWeights weights;
  bool use_psi = true;
};

/// Applies a method's loss/wiring configuration on top of base weights:
/// OURS keeps all four losses with the action encoder active; MDP-H drops
/// the decoder loss and bypasses psi_e (true one-hot actions); D-MDP further
/// drops the contrastive term; JSAE drops only the contrastive term; JSAE-C
/// restores it (coinciding with OURS under this adaptation).
inline BaselineWiring configure_baseline(Baseline b, LossWeights base) {
  base.validate();
  BaselineWiring w{base, true};
  switch (b) {
    case Baseline::OURS:
      break;
    case Baseline::MDP_H:
      w.weights.w_delta = 0;
      w.use_psi = false;
      break;
    case Baseline::D_MDP:
      w.weights.w_c = 0;
      w.weights.w_delta = 0;
      w.use_psi = false;
      break;
    case Baseline::JSAE:
      w.weights.w_c = 0;
      break;
    case Baseline::JSAE_C:
      break;
  }
  return w;
}

struct ReprConfig {
  Baseline baseline = Baseline::OURS;
  LossWeights weights;
  double learning_rate = 5e-4;
  int batch_size = 256;
  int epochs = 100;
  int dim_s = 10;
  int dim_a = 5;
  std::uint64_t seed = 0;
  bool stop_target_gradient = false;
  bool psi_state_free = false;
  bool dedupe_observations = true;

  void validate() const {
    weights.validate();
    if (learning_rate <= 0) throw std::invalid_argument("ReprConfig: learning_rate <= 0");
    if (batch_size <= 0 || epochs <= 0)
      throw std::invalid_argument("ReprConfig: batch_size/epochs must be positive");
    if (dim_s <= 0 || dim_a <= 0) throw std::invalid_argument("ReprConfig: dims must be positive");
  }
};

struct EpochLosses {
  int epoch = 0;
  double L_T = 0, L_R = 0, L_c = 0, L_delta = 0, total = 0;
};

struct ReprTrainResult {
  nets::ModelBundle<Real> bundle;
  BaselineWiring wiring;
  std::vector<EpochLosses> curve;
};

inline nets::BundleDims bundle_dims_for(const ReprConfig& cfg, const DatasetHeader& header) {
  const BaselineWiring wiring = configure_baseline(cfg.baseline, cfg.weights);
  nets::BundleDims dims;
  dims.image_h = header.image_height;
  dims.image_w = header.image_width;
  dims.n_actions = header.n_actions;
  dims.dim_s = cfg.dim_s;
  dims.dim_a = cfg.dim_a;
  dims.use_psi = wiring.use_psi;
  dims.psi_state_free = cfg.psi_state_free;
  return dims;
}

/// Runs `epochs` passes of minibatch ADAM over the fixed dataset and returns
/// the trained bundle plus per-epoch loss components. Aborts on non-finite
/// loss. Deterministic given the config seed.
inline ReprTrainResult train_representation(const ReprConfig& cfg, const Dataset& data) {
  cfg.validate();
  if (data.transitions.size() < static_cast<std::size_t>(cfg.batch_size))
    throw std::invalid_argument("train_representation: dataset smaller than batch size");

  const BaselineWiring wiring = configure_baseline(cfg.baseline, cfg.weights);
  ReprTrainResult result{nets::ModelBundle<Real>(bundle_dims_for(cfg, data.header)), wiring, {}};
  nets::ModelBundle<Real>& bundle = result.bundle;
  bundle.init(substream(cfg.seed, 0xb0));

  ReplayBuffer<Transition> buffer(data.transitions.size(), substream(cfg.seed, 0xb1));
  for (const Transition& t : data.transitions) buffer.push(t);

  const bool train_decoder = wiring.weights.w_delta > 0 && wiring.use_psi;
  nets::AdamConfig adam_cfg;
  adam_cfg.learning_rate = cfg.learning_rate;
  nets::Adam<Real> opt(bundle.trainable_params(train_decoder), adam_cfg);

  const bool need_negatives =
      wiring.weights.w_c > 0 && data.transitions.size() > static_cast<std::size_t>(cfg.batch_size);
  const int steps_per_epoch =
      std::max<int>(1, static_cast<int>(data.transitions.size()) / cfg.batch_size);
  const ReprOptions opts{cfg.stop_target_gradient};

  result.curve.reserve(cfg.epochs);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochLosses acc{epoch};
    for (int step = 0; step < steps_per_epoch; ++step) {
      auto batch = buffer.sample_batch(cfg.batch_size);
      std::vector<const Observation*> negatives;
      if (need_negatives) negatives = sample_negatives(buffer, batch);
      ReprBatch<Real> rb = build_repr_batch<Real>(batch, negatives, data.header.n_actions,
                                                  cfg.dedupe_observations);
      bundle.zero_grads();
      LossValues losses = repr_forward_backward(bundle, rb, wiring.weights, opts, true);
      if (!std::isfinite(losses.total))
        throw std::runtime_error("train_representation: loss diverged (non-finite)");
      opt.step();
      acc.L_T += losses.L_T;
      acc.L_R += losses.L_R;
      acc.L_c += losses.L_c;
      acc.L_delta += losses.L_delta;
      acc.total += losses.total;
    }
    acc.L_T /= steps_per_epoch;
    acc.L_R /= steps_per_epoch;
    acc.L_c /= steps_per_epoch;
    acc.L_delta /= steps_per_epoch;
    acc.total /= steps_per_epoch;
    result.curve.push_back(acc);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Bundle persistence: the nets checkpoint container plus a JSON dims record
// so a bundle can be reconstructed from the file alone.
// ---------------------------------------------------------------------------

inline std::string bundle_config_json(const nets::BundleDims& d, std::uint64_t init_seed) {
  nlohmann::json j;
  j["image_h"] = d.image_h;
  j["image_w"] = d.image_w;
  j["n_actions"] = d.n_actions;
  j["dim_s"] = d.dim_s;
  j["dim_a"] = d.dim_a;
  j["use_psi"] = d.use_psi;
  j["psi_state_free"] = d.psi_state_free;
  j["conv1_filters"] = d.conv1_filters;
  j["conv2_filters"] = d.conv2_filters;
  j["init_seed"] = init_seed;
  return j.dump();
}

inline void save_bundle(const std::string& path, nets::ModelBundle<Real>& bundle,
                        const std::string& fingerprint) {
  nets::CheckpointMeta meta{fingerprint, bundle_config_json(bundle.dims, bundle.init_seed)};
  nets::save_checkpoint<Real>(path, bundle.params(), meta);
}

inline nets::ModelBundle<Real> load_bundle(const std::string& path,
                                           nets::CheckpointMeta* meta_out = nullptr) {
  nets::CheckpointMeta meta = nets::peek_checkpoint(path);
  nlohmann::json j = nlohmann::json::parse(meta.config_json);
  nets::BundleDims dims;
  dims.image_h = j.at("image_h").get<int>();
  dims.image_w = j.at("image_w").get<int>();
  dims.n_actions = j.at("n_actions").get<int>();
  dims.dim_s = j.at("dim_s").get<int>();
  dims.dim_a = j.at("dim_a").get<int>();
  dims.use_psi = j.at("use_psi").get<bool>();
  dims.psi_state_free = j.at("psi_state_free").get<bool>();
  dims.conv1_filters = j.at("conv1_filters").get<int>();
  dims.conv2_filters = j.at("conv2_filters").get<int>();
  nets::ModelBundle<Real> bundle(dims);
  bundle.init_seed = j.at("init_seed").get<std::uint64_t>();
  nets::load_checkpoint<Real>(path, bundle.params());
  if (meta_out) *meta_out = meta;
  return bundle;
}

}  // namespace latmdp::repr
