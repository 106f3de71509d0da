#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wsd/pairgen.hpp"
#include "wsd/rng.hpp"
#include "wsd/vocab.hpp"

namespace wsd::nn {

enum class HeadKind : std::uint8_t { TokenCls, SentCls, SentClsWs };

HeadKind parse_head_kind(std::string_view name);
std::string_view to_string(HeadKind head);

// Sent-CLS-WS differs from Sent-CLS only in its inputs: it expects the
// weak-supervision markup that pairgen::build_pairs(ws=true) produces.
inline bool wants_ws_markup(HeadKind head) { return head == HeadKind::SentClsWs; }

struct EncoderConfig {
  std::size_t vocab_size = 0;  // filled in from the vocabulary at train time
  std::size_t max_seq_length = 512;
  std::size_t model_dim = 128;
  std::size_t num_layers = 4;
  std::size_t num_heads = 4;
  std::size_t feedforward_dim = 512;
  double dropout_rate = 0.1;
  HeadKind head = HeadKind::SentCls;

  void validate() const;
};

struct TrainConfig {
  std::size_t batch_size = 10;
  double learning_rate = 2e-6;
  double num_epochs = 6.0;
  std::size_t grad_accum_steps = 3;
  std::uint64_t seed = 42;
  std::size_t vocab_min_count = 1;

  void validate() const;
};

// `paper` mirrors the published hyper-parameter column; `toy` is the
// desk-scale preset that actually converges from random initialization.
EncoderConfig paper_encoder_preset();
TrainConfig paper_train_preset();
EncoderConfig toy_encoder_preset();
TrainConfig toy_train_preset();

struct EncodedPair {
  std::vector<std::int32_t> token_ids;   // [BOS] context [SEP] gloss [SEP]
  std::vector<std::int8_t> segment_ids;  // 0 through the first SEP, then 1
  std::vector<std::int8_t> target_mask;  // 1 on the (possibly shifted) span
  int label = 0;
};

// Packs one pair into the sequence budget. The gloss is truncated from the
// right first, then context tokens from the side farther from the target
// span; BOS, both SEPs, and the span itself are never dropped.
EncodedPair encode_pair(const pairgen::ContextGlossPair& pair,
                        const Vocabulary& vocab, const EncoderConfig& config);

struct LayerParams {
  Eigen::MatrixXd wq, wk, wv, wo;        // model_dim x model_dim
  Eigen::MatrixXd bq, bk, bv, bo;        // 1 x model_dim
  Eigen::MatrixXd ln1_gain, ln1_bias;    // 1 x model_dim
  Eigen::MatrixXd w1;                    // model_dim x feedforward_dim
  Eigen::MatrixXd b1;                    // 1 x feedforward_dim
  Eigen::MatrixXd w2;                    // feedforward_dim x model_dim
  Eigen::MatrixXd b2;                    // 1 x model_dim
  Eigen::MatrixXd ln2_gain, ln2_bias;    // 1 x model_dim
};

struct ModelParameters {
  Eigen::MatrixXd tok_emb;               // vocab_size x model_dim
  Eigen::MatrixXd pos_emb;               // max_seq_length x model_dim
  Eigen::MatrixXd seg_emb;               // 2 x model_dim
  Eigen::MatrixXd emb_ln_gain, emb_ln_bias;  // 1 x model_dim
  std::vector<LayerParams> layers;
  Eigen::MatrixXd head_w;                // model_dim x 2
  Eigen::MatrixXd head_b;                // 1 x 2

  // Visits every tensor in fixed declared order (checkpoint layout order).
  void for_each_tensor(
      const std::function<void(const std::string&, Eigen::MatrixXd&)>& fn);
  void for_each_tensor(
      const std::function<void(const std::string&, const Eigen::MatrixXd&)>& fn)
      const;

  std::size_t parameter_count() const;
  bool all_finite() const;
};

// Truncated normal (sigma 0.02) weights, zero biases, zero head — so the
// fresh model scores every pair (0, 0).
ModelParameters init_parameters(const EncoderConfig& config, rng::Engine& eng);
ModelParameters zero_like(const ModelParameters& params);

struct ClassifierOutput {
  std::array<double, 2> logits{0.0, 0.0};  // [no-match, match]
};

// Deterministic when train_mode is false. In train mode, dropout draws come
// from `dropout_rng`; passing nullptr disables dropout.
std::vector<ClassifierOutput> forward(const ModelParameters& params,
                                      std::span<const EncodedPair> batch,
                                      const EncoderConfig& config,
                                      bool train_mode = false,
                                      rng::Engine* dropout_rng = nullptr);

// Mean softmax cross-entropy.
double loss(std::span<const ClassifierOutput> outputs,
            std::span<const int> labels);

std::array<double, 2> softmax_pair(const std::array<double, 2>& logits);

// Mean loss over the batch; adds the batch-mean gradient into `grads`.
double forward_backward(const ModelParameters& params,
                        std::span<const EncodedPair> batch,
                        const EncoderConfig& config, ModelParameters& grads,
                        rng::Engine* dropout_rng = nullptr);

}  // namespace wsd::nn
