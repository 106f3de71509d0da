#pragma once

#include <span>
#include <string>
#include <vector>

#include "wsd/encoder.hpp"

namespace wsd::nn {

// Adam with fixed beta1 0.9, beta2 0.999, eps 1e-8; no warmup, no decay.
class AdamOptimizer {
 public:
  AdamOptimizer(const ModelParameters& shape, double learning_rate);
  void step(ModelParameters& params, const ModelParameters& grads);
  std::size_t steps_taken() const { return t_; }

 private:
  double lr_;
  std::size_t t_ = 0;
  ModelParameters m_;
  ModelParameters v_;
};

struct LossLogRow {
  std::size_t epoch = 0;  // 1-based
  std::size_t step = 0;   // global optimizer step, 1-based
  double loss = 0.0;      // mean micro-batch loss over the accumulation window
};

struct TrainResult {
  ModelParameters params;
  Vocabulary vocab;
  EncoderConfig encoder_config;  // vocab_size filled in
  std::vector<double> epoch_losses;
  std::vector<LossLogRow> loss_log;
};

// Deterministic given the seed: shuffle order, init, and dropout streams are
// all derived from it. Parameters change only on accumulation-window
// boundaries, with window gradients averaged. A NaN loss aborts with the
// offending micro-batch index.
TrainResult train(std::span<const pairgen::ContextGlossPair> pairs,
                  EncoderConfig encoder_config, const TrainConfig& train_config);

std::string write_loss_log_csv(std::span<const LossLogRow> rows);

}  // namespace wsd::nn
