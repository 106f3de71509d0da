#pragma once

#include <string>
#include <string_view>

#include "wsd/encoder.hpp"

namespace wsd::nn {

// Everything needed to run the model again: weights, architecture, and the
// vocabulary that fixes the token ids.
struct Model {
  ModelParameters params;
  EncoderConfig config;
  Vocabulary vocab;
};

// Binary container: magic, format version, config fields, vocabulary,
// then weight blobs in declared order with shape headers, and a trailing
// checksum. Little-endian doubles, bitwise round trip.
std::string serialize_checkpoint(const ModelParameters& params,
                                 const EncoderConfig& config,
                                 const Vocabulary& vocab);
Model parse_checkpoint(std::string_view bytes);

void save_checkpoint(const std::string& path, const ModelParameters& params,
                     const EncoderConfig& config, const Vocabulary& vocab);
Model load_checkpoint(const std::string& path);

}  // namespace wsd::nn
