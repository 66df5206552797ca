#pragma once

// Binary model files.
//
// Layout (all integers and floats little-endian):
//   magic          8 bytes  "FXCMODEL"
//   version        u32      kModelFormatVersion
//   architecture   u8       0 = lstm, 1 = bp, 2 = rnn
//   window_len     u64
//   hidden_layers  u64
//   hidden_size    u64
//   activations    3 x u8   input, hidden, output (0 sigmoid, 1 tanh, 2 relu, 3 linear)
//   dropout_rate   f64
//   seed           u64
//   scaler         2 x f64  x_min, x_max
//   count          u64      number of parameters
//   parameters     count x f64, in for_each_array order
//
// Array shapes are implied by the spec fields, so a round trip is bit-exact.

#include <cstdint>
#include <iosfwd>
#include <string>

#include "fxcast/models.hpp"
#include "fxcast/pipeline.hpp"

namespace fxcast {

inline constexpr std::uint32_t kModelFormatVersion = 1;

struct ModelFile {
    Model model;
    Scaler scaler;
};

void write_model(std::ostream& out, const Model& model, const Scaler& scaler);

/// Throws DataError on a bad magic, unknown version, truncated or oversized payload.
ModelFile read_model(std::istream& in);

void save_model(const std::string& path, const Model& model, const Scaler& scaler);
ModelFile load_model(const std::string& path);

}  // namespace fxcast
