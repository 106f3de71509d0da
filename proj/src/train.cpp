#include "wsd/train.hpp"

#include <cmath>
#include <cstdio>

#include "wsd/error.hpp"

namespace wsd::nn {

namespace {
constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;
}  // namespace

AdamOptimizer::AdamOptimizer(const ModelParameters& shape, double learning_rate)
    : lr_(learning_rate), m_(zero_like(shape)), v_(zero_like(shape)) {}

void AdamOptimizer::step(ModelParameters& params, const ModelParameters& grads) {
  ++t_;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));

  // Parallel iteration over (params, grads, m, v) in declared tensor order.
  std::vector<Eigen::MatrixXd*> ps, ms, vs;
  std::vector<const Eigen::MatrixXd*> gs;
  params.for_each_tensor(
      [&ps](const std::string&, Eigen::MatrixXd& t) { ps.push_back(&t); });
  m_.for_each_tensor(
      [&ms](const std::string&, Eigen::MatrixXd& t) { ms.push_back(&t); });
  v_.for_each_tensor(
      [&vs](const std::string&, Eigen::MatrixXd& t) { vs.push_back(&t); });
  grads.for_each_tensor(
      [&gs](const std::string&, const Eigen::MatrixXd& t) { gs.push_back(&t); });

  for (std::size_t i = 0; i < ps.size(); ++i) {
    Eigen::MatrixXd& p = *ps[i];
    Eigen::MatrixXd& m = *ms[i];
    Eigen::MatrixXd& v = *vs[i];
    const Eigen::MatrixXd& g = *gs[i];
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
    Eigen::ArrayXXd mhat = m.array() / bc1;
    Eigen::ArrayXXd vhat = v.array() / bc2;
    p.array() -= lr_ * mhat / (vhat.sqrt() + kEps);
  }
}

TrainResult train(std::span<const pairgen::ContextGlossPair> pairs,
                  EncoderConfig encoder_config,
                  const TrainConfig& train_config) {
  train_config.validate();
  if (pairs.empty())
    fail(ErrorKind::Precondition, "training set is empty");
  bool has_pos = false, has_neg = false;
  for (const auto& p : pairs) (p.positive ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    fail(ErrorKind::Precondition,
         "training set must contain both positive and negative pairs");

  TrainResult result;
  result.vocab = Vocabulary::build(pairs, train_config.vocab_min_count);
  encoder_config.vocab_size = result.vocab.size();
  encoder_config.validate();
  result.encoder_config = encoder_config;

  std::vector<EncodedPair> encoded;
  encoded.reserve(pairs.size());
  for (const auto& p : pairs)
    encoded.push_back(encode_pair(p, result.vocab, encoder_config));

  rng::Engine init_stream(rng::mix(train_config.seed, "init"));
  result.params = init_parameters(encoder_config, init_stream);
  rng::Engine dropout_stream(rng::mix(train_config.seed, "dropout"));

  AdamOptimizer optimizer(result.params, train_config.learning_rate);
  ModelParameters window_grads = zero_like(result.params);

  const std::size_t n = encoded.size();
  const std::size_t micro_per_epoch =
      (n + train_config.batch_size - 1) / train_config.batch_size;
  const std::size_t full_epochs =
      static_cast<std::size_t>(std::floor(train_config.num_epochs));
  const double frac = train_config.num_epochs - static_cast<double>(full_epochs);
  const std::size_t tail_micro = static_cast<std::size_t>(
      std::ceil(frac * static_cast<double>(micro_per_epoch) - 1e-12));
  const std::size_t total_epoch_slots = full_epochs + (tail_micro > 0 ? 1 : 0);

  std::vector<std::size_t> order(n);
  for (std::size_t epoch = 0; epoch < total_epoch_slots; ++epoch) {
    const std::size_t micro_this_epoch =
        epoch < full_epochs ? micro_per_epoch : tail_micro;

    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng::Engine shuffle_stream(
        rng::mix(train_config.seed, "shuffle:" + std::to_string(epoch)));
    rng::shuffle(order, shuffle_stream);

    double epoch_loss_sum = 0.0;
    std::size_t epoch_micro = 0;
    double window_loss_sum = 0.0;
    std::size_t window_micro = 0;

    auto flush_window = [&]() {
      if (window_micro == 0) return;
      const double inv = 1.0 / static_cast<double>(window_micro);
      window_grads.for_each_tensor(
          [inv](const std::string&, Eigen::MatrixXd& g) { g *= inv; });
      optimizer.step(result.params, window_grads);
      if (!result.params.all_finite())
        fail(ErrorKind::Validation,
             "non-finite parameter after optimizer step " +
                 std::to_string(optimizer.steps_taken()));
      result.loss_log.push_back({epoch + 1, optimizer.steps_taken(),
                                 window_loss_sum / static_cast<double>(window_micro)});
      window_grads.for_each_tensor(
          [](const std::string&, Eigen::MatrixXd& g) { g.setZero(); });
      window_loss_sum = 0.0;
      window_micro = 0;
    };

    for (std::size_t b = 0; b < micro_this_epoch; ++b) {
      const std::size_t lo = b * train_config.batch_size;
      const std::size_t hi = std::min(n, lo + train_config.batch_size);
      std::vector<EncodedPair> micro;
      micro.reserve(hi - lo);
      for (std::size_t i = lo; i < hi; ++i) micro.push_back(encoded[order[i]]);

      const double micro_loss = forward_backward(
          result.params, micro, encoder_config, window_grads,
          encoder_config.dropout_rate > 0.0 ? &dropout_stream : nullptr);
      if (!std::isfinite(micro_loss))
        fail(ErrorKind::Validation,
             "non-finite loss at epoch " + std::to_string(epoch + 1) +
                 ", micro-batch " + std::to_string(b + 1));
      window_loss_sum += micro_loss;
      epoch_loss_sum += micro_loss;
      ++window_micro;
      ++epoch_micro;
      if (window_micro == train_config.grad_accum_steps) flush_window();
    }
    flush_window();  // partial window at epoch end still updates

    result.epoch_losses.push_back(
        epoch_micro > 0 ? epoch_loss_sum / static_cast<double>(epoch_micro)
                        : 0.0);
  }

  return result;
}

std::string write_loss_log_csv(std::span<const LossLogRow> rows) {
  std::string out = "epoch,step,loss\n";
  char buf[64];
  for (const LossLogRow& row : rows) {
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%.17g\n", row.epoch, row.step,
                  row.loss);
    out += buf;
  }
  return out;
}

}  // namespace wsd::nn
