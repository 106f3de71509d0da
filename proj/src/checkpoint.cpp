#include "wsd/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "wsd/error.hpp"
#include "wsd/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint layout assumes a little-endian host");

namespace wsd::nn {

namespace {

constexpr char kMagic[8] = {'W', 'S', 'D', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_u64(std::string& out, std::uint64_t v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_f64(std::string& out, double v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_str(std::string& out, std::string_view s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s.data(), s.size());
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t u32() { return get<std::uint32_t>(); }
  std::uint64_t u64() { return get<std::uint64_t>(); }
  double f64() { return get<double>(); }

  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  void raw(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }

  bool done() const { return pos_ == bytes_.size(); }
  std::string_view consumed() const { return bytes_.substr(0, pos_); }

 private:
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size())
      fail(ErrorKind::Validation,
           "corrupt checkpoint: truncated at byte " + std::to_string(pos_));
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const ModelParameters& params,
                                 const EncoderConfig& config,
                                 const Vocabulary& vocab) {
  std::string out;
  out.append(kMagic, sizeof kMagic);
  put_u32(out, kVersion);

  put_u64(out, config.vocab_size);
  put_u64(out, config.max_seq_length);
  put_u64(out, config.model_dim);
  put_u64(out, config.num_layers);
  put_u64(out, config.num_heads);
  put_u64(out, config.feedforward_dim);
  put_f64(out, config.dropout_rate);
  put_u32(out, static_cast<std::uint32_t>(config.head));

  put_u64(out, vocab.size());
  for (const std::string& tok : vocab.tokens()) put_str(out, tok);

  std::uint64_t tensor_count = 0;
  params.for_each_tensor(
      [&tensor_count](const std::string&, const Eigen::MatrixXd&) {
        ++tensor_count;
      });
  put_u64(out, tensor_count);
  params.for_each_tensor([&out](const std::string& name,
                                const Eigen::MatrixXd& m) {
    put_str(out, name);
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
  });

  put_u64(out, rng::fnv1a64(out));
  return out;
}

Model parse_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  char magic[8];
  in.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    fail(ErrorKind::Validation, "not a checkpoint file (bad magic bytes)");
  const std::uint32_t version = in.u32();
  if (version != kVersion)
    fail(ErrorKind::Validation, "checkpoint format version " +
                                    std::to_string(version) +
                                    " not supported (expected " +
                                    std::to_string(kVersion) + ")");

  Model model;
  model.config.vocab_size = in.u64();
  model.config.max_seq_length = in.u64();
  model.config.model_dim = in.u64();
  model.config.num_layers = in.u64();
  model.config.num_heads = in.u64();
  model.config.feedforward_dim = in.u64();
  model.config.dropout_rate = in.f64();
  const std::uint32_t head = in.u32();
  if (head > 2)
    fail(ErrorKind::Validation, "corrupt checkpoint: unknown head kind");
  model.config.head = static_cast<HeadKind>(head);
  model.config.validate();

  const std::uint64_t vocab_count = in.u64();
  if (vocab_count != model.config.vocab_size || vocab_count < 4)
    fail(ErrorKind::Validation, "corrupt checkpoint: vocabulary size mismatch");
  for (std::uint64_t i = 0; i < vocab_count; ++i) {
    std::string tok = in.str();
    if (i < 4) {
      if (tok != model.vocab.token_of(static_cast<std::int32_t>(i)))
        fail(ErrorKind::Validation,
             "corrupt checkpoint: reserved token mismatch");
    } else {
      model.vocab.append_token(tok);
    }
  }

  rng::Engine dummy(0);
  model.params = init_parameters(model.config, dummy);
  std::uint64_t tensor_count = 0;
  model.params.for_each_tensor(
      [&tensor_count](const std::string&, const Eigen::MatrixXd&) {
        ++tensor_count;
      });
  if (in.u64() != tensor_count)
    fail(ErrorKind::Validation, "corrupt checkpoint: tensor count mismatch");

  model.params.for_each_tensor([&in](const std::string& name,
                                     Eigen::MatrixXd& m) {
    const std::string stored = in.str();
    if (stored != name)
      fail(ErrorKind::Validation, "corrupt checkpoint: expected tensor '" +
                                      name + "', found '" + stored + "'");
    const auto rows = static_cast<Eigen::Index>(in.u64());
    const auto cols = static_cast<Eigen::Index>(in.u64());
    if (rows != m.rows() || cols != m.cols())
      fail(ErrorKind::Validation,
           "corrupt checkpoint: tensor '" + name + "' has shape " +
               std::to_string(rows) + "x" + std::to_string(cols) +
               ", expected " + std::to_string(m.rows()) + "x" +
               std::to_string(m.cols()));
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = in.f64();
  });

  const std::uint64_t expected = rng::fnv1a64(in.consumed());
  if (in.u64() != expected)
    fail(ErrorKind::Validation, "corrupt checkpoint: checksum mismatch");
  if (!in.done())
    fail(ErrorKind::Validation, "corrupt checkpoint: trailing bytes");
  return model;
}

void save_checkpoint(const std::string& path, const ModelParameters& params,
                     const EncoderConfig& config, const Vocabulary& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
  const std::string bytes = serialize_checkpoint(params, config, vocab);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "failed writing checkpoint to '" + path + "'");
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open checkpoint '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return parse_checkpoint(bytes);
}

}  // namespace wsd::nn
