#include "wsd/encoder.hpp"

#include <algorithm>
#include <cctype>

#include "wsd/error.hpp"
#include "wsd/strings.hpp"

namespace wsd::nn {

HeadKind parse_head_kind(std::string_view name) {
  std::string n;
  for (char c : name)
    if (c != '-' && c != '_')
      n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (n == "tokencls") return HeadKind::TokenCls;
  if (n == "sentcls") return HeadKind::SentCls;
  if (n == "sentclsws") return HeadKind::SentClsWs;
  fail(ErrorKind::Config, "unknown head kind '" + std::string(name) +
                              "' (expected token-cls, sent-cls, or sent-cls-ws)");
}

std::string_view to_string(HeadKind head) {
  switch (head) {
    case HeadKind::TokenCls: return "token-cls";
    case HeadKind::SentCls: return "sent-cls";
    case HeadKind::SentClsWs: return "sent-cls-ws";
  }
  return "sent-cls";
}

void EncoderConfig::validate() const {
  if (num_heads == 0 || model_dim == 0 || num_layers == 0)
    fail(ErrorKind::Config, "model_dim, num_layers, num_heads must be positive");
  if (model_dim % num_heads != 0)
    fail(ErrorKind::Config, "model_dim " + std::to_string(model_dim) +
                                " not divisible by num_heads " +
                                std::to_string(num_heads));
  if (max_seq_length < 8)
    fail(ErrorKind::Config, "max_seq_length must be >= 8");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0)
    fail(ErrorKind::Config, "dropout_rate must be in [0, 1)");
  if (vocab_size < 4)
    fail(ErrorKind::Config, "vocab_size must cover the reserved tokens");
}

void TrainConfig::validate() const {
  if (batch_size == 0) fail(ErrorKind::Config, "batch_size must be positive");
  if (learning_rate <= 0.0)
    fail(ErrorKind::Config, "learning_rate must be positive");
  if (num_epochs < 0.0)
    fail(ErrorKind::Config, "num_epochs must be non-negative");
  if (grad_accum_steps < 1)
    fail(ErrorKind::Config, "grad_accum_steps must be >= 1");
}

EncoderConfig paper_encoder_preset() {
  EncoderConfig cfg;
  cfg.max_seq_length = 512;
  cfg.model_dim = 128;
  cfg.num_layers = 4;
  cfg.num_heads = 4;
  cfg.feedforward_dim = 512;
  cfg.dropout_rate = 0.1;
  return cfg;
}

TrainConfig paper_train_preset() {
  TrainConfig cfg;
  cfg.batch_size = 10;
  cfg.learning_rate = 2e-6;
  cfg.num_epochs = 6.0;
  cfg.grad_accum_steps = 3;
  return cfg;
}

EncoderConfig toy_encoder_preset() {
  EncoderConfig cfg;
  cfg.max_seq_length = 128;
  cfg.model_dim = 32;
  cfg.num_layers = 2;
  cfg.num_heads = 4;
  cfg.feedforward_dim = 128;
  cfg.dropout_rate = 0.0;
  return cfg;
}

TrainConfig toy_train_preset() {
  TrainConfig cfg;
  cfg.batch_size = 16;
  cfg.learning_rate = 1e-3;
  cfg.num_epochs = 10.0;
  cfg.grad_accum_steps = 1;
  return cfg;
}

EncodedPair encode_pair(const pairgen::ContextGlossPair& pair,
                        const Vocabulary& vocab, const EncoderConfig& config) {
  if (pair.target_start >= pair.target_end ||
      pair.target_end > pair.context.size())
    fail(ErrorKind::Precondition,
         "pair '" + pair.instance_id + "' has an invalid target span");

  const std::vector<std::string> gloss_tokens = strings::split_ws(pair.gloss);
  const std::size_t budget = config.max_seq_length - 3;  // BOS + two SEPs
  const std::size_t span_len = pair.target_end - pair.target_start;
  if (span_len > budget)
    fail(ErrorKind::Encoding, "pair '" + pair.instance_id +
                                  "' target span of " +
                                  std::to_string(span_len) +
                                  " tokens cannot fit max_seq_length " +
                                  std::to_string(config.max_seq_length));

  // Gloss gives way first, from the right.
  std::size_t gloss_keep = gloss_tokens.size();
  if (pair.context.size() + gloss_keep > budget)
    gloss_keep = budget > pair.context.size() ? budget - pair.context.size() : 0;

  // Then the context sheds tokens from whichever side is farther from the span.
  std::size_t ctx_lo = 0;
  std::size_t ctx_hi = pair.context.size();
  while (ctx_hi - ctx_lo + gloss_keep > budget) {
    std::size_t left_gap = pair.target_start - ctx_lo;
    std::size_t right_gap = ctx_hi - pair.target_end;
    if (left_gap > right_gap)
      ++ctx_lo;
    else
      --ctx_hi;
  }

  EncodedPair enc;
  const std::size_t total = 1 + (ctx_hi - ctx_lo) + 1 + gloss_keep + 1;
  enc.token_ids.reserve(total);
  enc.segment_ids.reserve(total);
  enc.token_ids.push_back(Vocabulary::kBos);
  for (std::size_t i = ctx_lo; i < ctx_hi; ++i)
    enc.token_ids.push_back(vocab.id_of(pair.context[i]));
  enc.token_ids.push_back(Vocabulary::kSep);
  const std::size_t context_half = enc.token_ids.size();
  for (std::size_t i = 0; i < gloss_keep; ++i)
    enc.token_ids.push_back(vocab.id_of(gloss_tokens[i]));
  enc.token_ids.push_back(Vocabulary::kSep);

  enc.segment_ids.assign(enc.token_ids.size(), 1);
  std::fill(enc.segment_ids.begin(),
            enc.segment_ids.begin() + static_cast<std::ptrdiff_t>(context_half),
            0);

  enc.target_mask.assign(enc.token_ids.size(), 0);
  for (std::size_t i = pair.target_start; i < pair.target_end; ++i)
    enc.target_mask[1 + i - ctx_lo] = 1;

  enc.label = pair.positive ? 1 : 0;
  return enc;
}

// ---------------------------------------------------------------------------
// Parameters

namespace {

void fill_truncated_normal(Eigen::MatrixXd& m, rng::Engine& eng, double sigma) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) = rng::truncated_normal(eng, sigma);
}

}  // namespace

void ModelParameters::for_each_tensor(
    const std::function<void(const std::string&, Eigen::MatrixXd&)>& fn) {
  fn("tok_emb", tok_emb);
  fn("pos_emb", pos_emb);
  fn("seg_emb", seg_emb);
  fn("emb_ln_gain", emb_ln_gain);
  fn("emb_ln_bias", emb_ln_bias);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    LayerParams& lp = layers[l];
    fn(p + "wq", lp.wq);
    fn(p + "bq", lp.bq);
    fn(p + "wk", lp.wk);
    fn(p + "bk", lp.bk);
    fn(p + "wv", lp.wv);
    fn(p + "bv", lp.bv);
    fn(p + "wo", lp.wo);
    fn(p + "bo", lp.bo);
    fn(p + "ln1_gain", lp.ln1_gain);
    fn(p + "ln1_bias", lp.ln1_bias);
    fn(p + "w1", lp.w1);
    fn(p + "b1", lp.b1);
    fn(p + "w2", lp.w2);
    fn(p + "b2", lp.b2);
    fn(p + "ln2_gain", lp.ln2_gain);
    fn(p + "ln2_bias", lp.ln2_bias);
  }
  fn("head_w", head_w);
  fn("head_b", head_b);
}

void ModelParameters::for_each_tensor(
    const std::function<void(const std::string&, const Eigen::MatrixXd&)>& fn)
    const {
  auto& self = const_cast<ModelParameters&>(*this);
  self.for_each_tensor(
      [&fn](const std::string& name, Eigen::MatrixXd& m) { fn(name, m); });
}

std::size_t ModelParameters::parameter_count() const {
  std::size_t n = 0;
  for_each_tensor([&n](const std::string&, const Eigen::MatrixXd& m) {
    n += static_cast<std::size_t>(m.size());
  });
  return n;
}

bool ModelParameters::all_finite() const {
  bool ok = true;
  for_each_tensor([&ok](const std::string&, const Eigen::MatrixXd& m) {
    if (!m.allFinite()) ok = false;
  });
  return ok;
}

ModelParameters init_parameters(const EncoderConfig& config, rng::Engine& eng) {
  config.validate();
  const auto V = static_cast<Eigen::Index>(config.vocab_size);
  const auto L = static_cast<Eigen::Index>(config.max_seq_length);
  const auto D = static_cast<Eigen::Index>(config.model_dim);
  const auto F = static_cast<Eigen::Index>(config.feedforward_dim);
  constexpr double kSigma = 0.02;

  ModelParameters p;
  p.tok_emb.resize(V, D);
  p.pos_emb.resize(L, D);
  p.seg_emb.resize(2, D);
  fill_truncated_normal(p.tok_emb, eng, kSigma);
  fill_truncated_normal(p.pos_emb, eng, kSigma);
  fill_truncated_normal(p.seg_emb, eng, kSigma);
  p.emb_ln_gain = Eigen::MatrixXd::Ones(1, D);
  p.emb_ln_bias = Eigen::MatrixXd::Zero(1, D);

  p.layers.resize(config.num_layers);
  for (LayerParams& lp : p.layers) {
    lp.wq.resize(D, D);
    lp.wk.resize(D, D);
    lp.wv.resize(D, D);
    lp.wo.resize(D, D);
    fill_truncated_normal(lp.wq, eng, kSigma);
    fill_truncated_normal(lp.wk, eng, kSigma);
    fill_truncated_normal(lp.wv, eng, kSigma);
    fill_truncated_normal(lp.wo, eng, kSigma);
    lp.bq = Eigen::MatrixXd::Zero(1, D);
    lp.bk = Eigen::MatrixXd::Zero(1, D);
    lp.bv = Eigen::MatrixXd::Zero(1, D);
    lp.bo = Eigen::MatrixXd::Zero(1, D);
    lp.ln1_gain = Eigen::MatrixXd::Ones(1, D);
    lp.ln1_bias = Eigen::MatrixXd::Zero(1, D);
    lp.w1.resize(D, F);
    lp.w2.resize(F, D);
    fill_truncated_normal(lp.w1, eng, kSigma);
    fill_truncated_normal(lp.w2, eng, kSigma);
    lp.b1 = Eigen::MatrixXd::Zero(1, F);
    lp.b2 = Eigen::MatrixXd::Zero(1, D);
    lp.ln2_gain = Eigen::MatrixXd::Ones(1, D);
    lp.ln2_bias = Eigen::MatrixXd::Zero(1, D);
  }

  p.head_w = Eigen::MatrixXd::Zero(D, 2);
  p.head_b = Eigen::MatrixXd::Zero(1, 2);
  return p;
}

ModelParameters zero_like(const ModelParameters& params) {
  ModelParameters z = params;
  z.for_each_tensor([](const std::string&, Eigen::MatrixXd& m) {
    m.setZero();
  });
  return z;
}

}  // namespace wsd::nn
