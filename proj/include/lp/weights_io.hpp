#pragma once

// Binary weights file.
//
//   "LPWEIGHT"            8 bytes
//   u32 version           currently 1
//   u64 payload bytes     everything after this field
//   spec: u32 arch, activation, loss, supervision; u8 bias;
//         u64 seq_len, output_width, width count, widths...
//   u64 W count, u64 U count
//   per matrix: u64 rows, u64 cols, rows*cols f64 row-major
//
// All integers and doubles are little-endian.

#include <iosfwd>
#include <string>

#include "lp/network.hpp"
#include "lp/stores.hpp"

namespace lp {

inline constexpr char kWeightsMagic[8] = {'L', 'P', 'W', 'E', 'I', 'G', 'H', 'T'};
inline constexpr std::uint32_t kWeightsVersion = 1;

struct WeightsFile {
  NetworkSpec spec;
  WeightStore weights;
};

void write_weights(std::ostream& out, const NetworkSpec& spec, const WeightStore& weights);
void save_weights(const std::string& path, const NetworkSpec& spec, const WeightStore& weights);

/// Throws DataError on a bad magic, version, size or truncated stream.
WeightsFile read_weights(std::istream& in);
WeightsFile load_weights(const std::string& path);

}  // namespace lp
