#include <cmath>
#include <numbers>

#include "wsd/encoder.hpp"
#include "wsd/error.hpp"

// Forward and hand-derived backward passes for the compact encoder.
// Everything runs in double precision; sequences are padded to the batch
// maximum and PAD positions are excluded from attention keys and pooling,
// so padding cannot leak into any logit or gradient.

namespace wsd::nn {

namespace {

constexpr double kLayerNormEps = 1e-5;

double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2));
}

double gelu_grad(double x) {
  constexpr double inv_sqrt_2pi = 0.3989422804014327;
  double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  double pdf = inv_sqrt_2pi * std::exp(-0.5 * x * x);
  return cdf + x * pdf;
}

struct RowStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd invstd;
};

void layer_norm_forward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& gain,
                        const Eigen::MatrixXd& bias, Eigen::MatrixXd& y,
                        RowStats& stats) {
  const Eigen::Index rows = x.rows();
  const Eigen::Index dim = x.cols();
  stats.mean.resize(rows);
  stats.invstd.resize(rows);
  y.resize(rows, dim);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double mu = x.row(r).mean();
    const double var =
        (x.row(r).array() - mu).square().sum() / static_cast<double>(dim);
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    stats.mean(r) = mu;
    stats.invstd(r) = inv;
    y.row(r) = (((x.row(r).array() - mu) * inv) * gain.row(0).array() +
                bias.row(0).array())
                   .matrix();
  }
}

using RowArray = Eigen::Array<double, 1, Eigen::Dynamic>;

void layer_norm_backward(const Eigen::MatrixXd& x, const RowStats& stats,
                         const Eigen::MatrixXd& gain, const Eigen::MatrixXd& dy,
                         Eigen::MatrixXd& dx, Eigen::MatrixXd& dgain,
                         Eigen::MatrixXd& dbias) {
  const Eigen::Index rows = x.rows();
  const Eigen::Index dim = x.cols();
  dx.resize(rows, dim);
  for (Eigen::Index r = 0; r < rows; ++r) {
    RowArray xhat = (x.row(r).array() - stats.mean(r)) * stats.invstd(r);
    RowArray dyr = dy.row(r).array();
    dgain.row(0).array() += dyr * xhat;
    dbias.row(0).array() += dyr;
    RowArray dxhat = dyr * gain.row(0).array();
    const double m1 = dxhat.sum() / static_cast<double>(dim);
    const double m2 = (dxhat * xhat).sum() / static_cast<double>(dim);
    dx.row(r) = (stats.invstd(r) * (dxhat - m1 - xhat * m2)).matrix();
  }
}

struct LayerCache {
  Eigen::MatrixXd x_in;
  Eigen::MatrixXd q, k, v;
  std::vector<Eigen::MatrixXd> att;  // per head, rows = queries
  Eigen::MatrixXd headcat, attproj, drop1;
  Eigen::MatrixXd res1, x_mid;
  RowStats ln1;
  Eigen::MatrixXd u, g, ffn, drop2;
  Eigen::MatrixXd res2, x_out;
  RowStats ln2;
};

struct SeqCache {
  std::vector<std::int32_t> ids;   // padded to the batch maximum
  std::vector<std::int8_t> segs;
  std::vector<std::int8_t> mask;   // 1 = real token
  std::vector<Eigen::Index> pool_positions;
  Eigen::MatrixXd emb_sum, x0, drop0;
  RowStats emb_ln;
  std::vector<LayerCache> layers;
  Eigen::VectorXd pooled;
  std::array<double, 2> logits{0.0, 0.0};
};

Eigen::MatrixXd sample_dropout_mask(Eigen::Index rows, Eigen::Index cols,
                                    double rate, rng::Engine& eng) {
  Eigen::MatrixXd m(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = rng::uniform01(eng) < rate ? 0.0 : keep_scale;
  return m;
}

void masked_softmax_rows(const Eigen::MatrixXd& scores,
                         const std::vector<std::int8_t>& key_mask,
                         Eigen::MatrixXd& out) {
  const Eigen::Index rows = scores.rows();
  const Eigen::Index cols = scores.cols();
  out.setZero(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < cols; ++j)
      if (key_mask[static_cast<std::size_t>(j)] && scores(i, j) > mx)
        mx = scores(i, j);
    double z = 0.0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!key_mask[static_cast<std::size_t>(j)]) continue;
      out(i, j) = std::exp(scores(i, j) - mx);
      z += out(i, j);
    }
    for (Eigen::Index j = 0; j < cols; ++j)
      if (key_mask[static_cast<std::size_t>(j)]) out(i, j) /= z;
  }
}

void run_forward_seq(const ModelParameters& params, const EncoderConfig& cfg,
                     SeqCache& c, bool train_mode, rng::Engine* dropout_rng) {
  const auto len = static_cast<Eigen::Index>(c.ids.size());
  const auto D = static_cast<Eigen::Index>(cfg.model_dim);
  const auto H = static_cast<Eigen::Index>(cfg.num_heads);
  const Eigen::Index Dh = D / H;
  const double scale = 1.0 / std::sqrt(static_cast<double>(Dh));
  const bool use_dropout =
      train_mode && cfg.dropout_rate > 0.0 && dropout_rng != nullptr;

  c.emb_sum.resize(len, D);
  for (Eigen::Index t = 0; t < len; ++t) {
    c.emb_sum.row(t) = params.tok_emb.row(c.ids[static_cast<std::size_t>(t)]) +
                       params.pos_emb.row(t) +
                       params.seg_emb.row(c.segs[static_cast<std::size_t>(t)]);
  }
  layer_norm_forward(c.emb_sum, params.emb_ln_gain, params.emb_ln_bias, c.x0,
                     c.emb_ln);
  if (use_dropout) {
    c.drop0 = sample_dropout_mask(len, D, cfg.dropout_rate, *dropout_rng);
    c.x0 = c.x0.cwiseProduct(c.drop0);
  }

  c.layers.resize(cfg.num_layers);
  Eigen::MatrixXd x = c.x0;
  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    LayerCache& lc = c.layers[l];
    const LayerParams& lp = params.layers[l];
    lc.x_in = x;

    lc.q = (x * lp.wq).rowwise() + lp.bq.row(0);
    lc.k = (x * lp.wk).rowwise() + lp.bk.row(0);
    lc.v = (x * lp.wv).rowwise() + lp.bv.row(0);

    lc.att.resize(static_cast<std::size_t>(H));
    lc.headcat.resize(len, D);
    for (Eigen::Index h = 0; h < H; ++h) {
      auto qh = lc.q.middleCols(h * Dh, Dh);
      auto kh = lc.k.middleCols(h * Dh, Dh);
      auto vh = lc.v.middleCols(h * Dh, Dh);
      Eigen::MatrixXd scores = qh * kh.transpose() * scale;
      masked_softmax_rows(scores, c.mask, lc.att[static_cast<std::size_t>(h)]);
      lc.headcat.middleCols(h * Dh, Dh) =
          lc.att[static_cast<std::size_t>(h)] * vh;
    }
    lc.attproj = (lc.headcat * lp.wo).rowwise() + lp.bo.row(0);
    Eigen::MatrixXd att_dropped = lc.attproj;
    if (use_dropout) {
      lc.drop1 = sample_dropout_mask(len, D, cfg.dropout_rate, *dropout_rng);
      att_dropped = att_dropped.cwiseProduct(lc.drop1);
    }
    lc.res1 = lc.x_in + att_dropped;
    layer_norm_forward(lc.res1, lp.ln1_gain, lp.ln1_bias, lc.x_mid, lc.ln1);

    lc.u = (lc.x_mid * lp.w1).rowwise() + lp.b1.row(0);
    lc.g = lc.u.unaryExpr([](double v) { return gelu(v); });
    lc.ffn = (lc.g * lp.w2).rowwise() + lp.b2.row(0);
    Eigen::MatrixXd ffn_dropped = lc.ffn;
    if (use_dropout) {
      lc.drop2 = sample_dropout_mask(len, D, cfg.dropout_rate, *dropout_rng);
      ffn_dropped = ffn_dropped.cwiseProduct(lc.drop2);
    }
    lc.res2 = lc.x_mid + ffn_dropped;
    layer_norm_forward(lc.res2, lp.ln2_gain, lp.ln2_bias, lc.x_out, lc.ln2);
    x = lc.x_out;
  }

  const Eigen::MatrixXd& top = c.layers.back().x_out;
  c.pooled = Eigen::VectorXd::Zero(D);
  for (Eigen::Index p : c.pool_positions) c.pooled += top.row(p).transpose();
  c.pooled /= static_cast<double>(c.pool_positions.size());

  Eigen::RowVector2d logits =
      c.pooled.transpose() * params.head_w + params.head_b.row(0);
  c.logits = {logits(0), logits(1)};
}

void run_backward_seq(const ModelParameters& params, const EncoderConfig& cfg,
                      const SeqCache& c, const Eigen::RowVector2d& dlogits,
                      ModelParameters& grads) {
  const auto len = static_cast<Eigen::Index>(c.ids.size());
  const auto D = static_cast<Eigen::Index>(cfg.model_dim);
  const auto H = static_cast<Eigen::Index>(cfg.num_heads);
  const Eigen::Index Dh = D / H;
  const double scale = 1.0 / std::sqrt(static_cast<double>(Dh));
  const bool used_dropout = c.drop0.size() > 0;

  grads.head_w += c.pooled * dlogits;
  grads.head_b.row(0) += dlogits;

  Eigen::VectorXd dpooled = params.head_w * dlogits.transpose();
  Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(len, D);
  const double pool_share = 1.0 / static_cast<double>(c.pool_positions.size());
  for (Eigen::Index p : c.pool_positions)
    dx.row(p) += dpooled.transpose() * pool_share;

  for (std::size_t l = cfg.num_layers; l-- > 0;) {
    const LayerCache& lc = c.layers[l];
    const LayerParams& lp = params.layers[l];
    LayerParams& gl = grads.layers[l];

    // x_out = LN2(res2)
    Eigen::MatrixXd dres2;
    layer_norm_backward(lc.res2, lc.ln2, lp.ln2_gain, dx, dres2, gl.ln2_gain,
                        gl.ln2_bias);

    // res2 = x_mid + drop(ffn)
    Eigen::MatrixXd dx_mid = dres2;
    Eigen::MatrixXd dffn =
        used_dropout ? dres2.cwiseProduct(lc.drop2).eval() : dres2;

    // ffn = gelu(x_mid W1 + b1) W2 + b2
    gl.b2.row(0) += dffn.colwise().sum();
    gl.w2 += lc.g.transpose() * dffn;
    Eigen::MatrixXd dg = dffn * lp.w2.transpose();
    Eigen::MatrixXd du =
        dg.cwiseProduct(lc.u.unaryExpr([](double v) { return gelu_grad(v); }));
    gl.b1.row(0) += du.colwise().sum();
    gl.w1 += lc.x_mid.transpose() * du;
    dx_mid += du * lp.w1.transpose();

    // x_mid = LN1(res1)
    Eigen::MatrixXd dres1;
    layer_norm_backward(lc.res1, lc.ln1, lp.ln1_gain, dx_mid, dres1,
                        gl.ln1_gain, gl.ln1_bias);

    // res1 = x_in + drop(attproj)
    Eigen::MatrixXd dx_in = dres1;
    Eigen::MatrixXd dattproj =
        used_dropout ? dres1.cwiseProduct(lc.drop1).eval() : dres1;

    // attproj = headcat Wo + bo
    gl.bo.row(0) += dattproj.colwise().sum();
    gl.wo += lc.headcat.transpose() * dattproj;
    Eigen::MatrixXd dheadcat = dattproj * lp.wo.transpose();

    Eigen::MatrixXd dq(len, D), dk(len, D), dv(len, D);
    for (Eigen::Index h = 0; h < H; ++h) {
      const Eigen::MatrixXd& a = lc.att[static_cast<std::size_t>(h)];
      auto qh = lc.q.middleCols(h * Dh, Dh);
      auto kh = lc.k.middleCols(h * Dh, Dh);
      auto vh = lc.v.middleCols(h * Dh, Dh);
      auto dctx = dheadcat.middleCols(h * Dh, Dh);

      Eigen::MatrixXd da = dctx * vh.transpose();
      dv.middleCols(h * Dh, Dh) = a.transpose() * dctx;

      // softmax backward row-wise; masked columns stay exactly zero
      Eigen::MatrixXd ds(len, len);
      for (Eigen::Index i = 0; i < len; ++i) {
        const double dot = a.row(i).dot(da.row(i));
        ds.row(i) = (a.row(i).array() * (da.row(i).array() - dot)).matrix();
      }
      dq.middleCols(h * Dh, Dh) = ds * kh * scale;
      dk.middleCols(h * Dh, Dh) = ds.transpose() * qh * scale;
    }

    gl.bq.row(0) += dq.colwise().sum();
    gl.bk.row(0) += dk.colwise().sum();
    gl.bv.row(0) += dv.colwise().sum();
    gl.wq += lc.x_in.transpose() * dq;
    gl.wk += lc.x_in.transpose() * dk;
    gl.wv += lc.x_in.transpose() * dv;
    dx_in += dq * lp.wq.transpose() + dk * lp.wk.transpose() +
             dv * lp.wv.transpose();

    dx = std::move(dx_in);
  }

  // x0 = drop(LN(emb_sum))
  Eigen::MatrixXd dln0 = used_dropout ? dx.cwiseProduct(c.drop0).eval() : dx;
  Eigen::MatrixXd demb;
  layer_norm_backward(c.emb_sum, c.emb_ln, params.emb_ln_gain, dln0, demb,
                      grads.emb_ln_gain, grads.emb_ln_bias);
  for (Eigen::Index t = 0; t < len; ++t) {
    if (!c.mask[static_cast<std::size_t>(t)]) continue;
    grads.tok_emb.row(c.ids[static_cast<std::size_t>(t)]) += demb.row(t);
    grads.pos_emb.row(t) += demb.row(t);
    grads.seg_emb.row(c.segs[static_cast<std::size_t>(t)]) += demb.row(t);
  }
}

std::vector<SeqCache> prepare_batch(std::span<const EncodedPair> batch,
                                    const EncoderConfig& cfg) {
  std::size_t max_len = 0;
  for (const EncodedPair& p : batch) {
    if (p.token_ids.empty())
      fail(ErrorKind::Precondition, "empty encoded pair");
    if (p.token_ids.size() > cfg.max_seq_length)
      fail(ErrorKind::Precondition, "encoded pair longer than max_seq_length");
    max_len = std::max(max_len, p.token_ids.size());
  }

  std::vector<SeqCache> caches(batch.size());
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const EncodedPair& p = batch[s];
    SeqCache& c = caches[s];
    c.ids.assign(max_len, Vocabulary::kPad);
    c.segs.assign(max_len, 0);
    c.mask.assign(max_len, 0);
    for (std::size_t t = 0; t < p.token_ids.size(); ++t) {
      const std::int32_t id = p.token_ids[t];
      if (id < 0 || static_cast<std::size_t>(id) >= cfg.vocab_size)
        fail(ErrorKind::Validation,
             "token id " + std::to_string(id) + " out of vocabulary range [0, " +
                 std::to_string(cfg.vocab_size) + ")");
      c.ids[t] = id;
      c.segs[t] = p.segment_ids[t];
      c.mask[t] = 1;
    }
    if (cfg.head == HeadKind::TokenCls) {
      for (std::size_t t = 0; t < p.target_mask.size(); ++t)
        if (p.target_mask[t])
          c.pool_positions.push_back(static_cast<Eigen::Index>(t));
      if (c.pool_positions.empty())
        fail(ErrorKind::Precondition, "token-cls pair without a target mask");
    } else {
      c.pool_positions.push_back(0);  // BOS
    }
  }
  return caches;
}

}  // namespace

std::vector<ClassifierOutput> forward(const ModelParameters& params,
                                      std::span<const EncodedPair> batch,
                                      const EncoderConfig& config,
                                      bool train_mode,
                                      rng::Engine* dropout_rng) {
  config.validate();
  std::vector<SeqCache> caches = prepare_batch(batch, config);
  std::vector<ClassifierOutput> outputs(batch.size());
  for (std::size_t s = 0; s < caches.size(); ++s) {
    run_forward_seq(params, config, caches[s], train_mode, dropout_rng);
    outputs[s].logits = caches[s].logits;
  }
  return outputs;
}

std::array<double, 2> softmax_pair(const std::array<double, 2>& logits) {
  const double mx = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - mx);
  const double e1 = std::exp(logits[1] - mx);
  return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

double loss(std::span<const ClassifierOutput> outputs,
            std::span<const int> labels) {
  if (outputs.size() != labels.size())
    fail(ErrorKind::Precondition, "outputs and labels differ in length");
  if (outputs.empty())
    fail(ErrorKind::Precondition, "loss of an empty batch is undefined");
  double total = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const auto& lg = outputs[i].logits;
    const double mx = std::max(lg[0], lg[1]);
    const double lse =
        mx + std::log(std::exp(lg[0] - mx) + std::exp(lg[1] - mx));
    total += lse - lg[labels[i] == 1 ? 1 : 0];
  }
  return total / static_cast<double>(outputs.size());
}

double forward_backward(const ModelParameters& params,
                        std::span<const EncodedPair> batch,
                        const EncoderConfig& config, ModelParameters& grads,
                        rng::Engine* dropout_rng) {
  config.validate();
  if (batch.empty())
    fail(ErrorKind::Precondition, "cannot train on an empty micro-batch");
  std::vector<SeqCache> caches = prepare_batch(batch, config);
  const double inv_batch = 1.0 / static_cast<double>(batch.size());

  double total = 0.0;
  for (std::size_t s = 0; s < caches.size(); ++s) {
    run_forward_seq(params, config, caches[s], true, dropout_rng);
    const auto& lg = caches[s].logits;
    const int label = batch[s].label == 1 ? 1 : 0;
    const double mx = std::max(lg[0], lg[1]);
    const double lse =
        mx + std::log(std::exp(lg[0] - mx) + std::exp(lg[1] - mx));
    total += lse - lg[label];

    std::array<double, 2> p = softmax_pair(lg);
    Eigen::RowVector2d dlogits(p[0] - (label == 0 ? 1.0 : 0.0),
                               p[1] - (label == 1 ? 1.0 : 0.0));
    dlogits *= inv_batch;
    run_backward_seq(params, config, caches[s], dlogits, grads);
  }
  return total * inv_batch;
}

}  // namespace wsd::nn
