#include "lp/weights_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lp/error.hpp"

namespace lp {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put(std::string& buf, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  buf.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view buf) : buf_(buf) {}

  template <typename T>
  T get(const char* what) {
    if (buf_.size() - pos_ < sizeof(T)) throw DataError(std::string("weights file truncated reading ") + what);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, buf_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }

  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  std::string_view buf_;
  std::size_t pos_ = 0;
};

void put_matrix(std::string& buf, const Matrix& m) {
  put<std::uint64_t>(buf, m.rows());
  put<std::uint64_t>(buf, m.cols());
  for (double v : m.data()) put<double>(buf, v);
}

Matrix get_matrix(Reader& r) {
  const auto rows = r.get<std::uint64_t>("matrix rows");
  const auto cols = r.get<std::uint64_t>("matrix cols");
  if (cols != 0 && rows > r.remaining() / 8 / cols) throw DataError("weights file truncated in matrix data");
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = r.get<double>("matrix data");
  return m;
}

template <typename E>
E get_enum(Reader& r, std::uint32_t count, const char* what) {
  const auto v = r.get<std::uint32_t>(what);
  if (v >= count) throw DataError(std::string("weights file has invalid ") + what);
  return static_cast<E>(v);
}

}  // namespace

void write_weights(std::ostream& out, const NetworkSpec& spec, const WeightStore& weights) {
  weights.check_shapes(spec);
  std::string body;
  put<std::uint32_t>(body, static_cast<std::uint32_t>(spec.arch));
  put<std::uint32_t>(body, static_cast<std::uint32_t>(spec.activation));
  put<std::uint32_t>(body, static_cast<std::uint32_t>(spec.loss));
  put<std::uint32_t>(body, static_cast<std::uint32_t>(spec.supervision));
  put<std::uint8_t>(body, spec.bias ? 1 : 0);
  put<std::uint64_t>(body, spec.seq_len);
  put<std::uint64_t>(body, spec.output_width);
  put<std::uint64_t>(body, spec.widths.size());
  for (auto w : spec.widths) put<std::uint64_t>(body, w);
  put<std::uint64_t>(body, weights.weight_count());
  put<std::uint64_t>(body, weights.recurrent_count());
  for (std::size_t k = 0; k < weights.weight_count(); ++k) put_matrix(body, weights.w(k));
  for (std::size_t k = 0; k < weights.recurrent_count(); ++k) put_matrix(body, weights.u(k));

  std::string head(kWeightsMagic, sizeof(kWeightsMagic));
  put<std::uint32_t>(head, kWeightsVersion);
  put<std::uint64_t>(head, body.size());
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw DataError("failed writing weights");
}

void save_weights(const std::string& path, const NetworkSpec& spec, const WeightStore& weights) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  write_weights(out, spec, weights);
}

WeightsFile read_weights(std::istream& in) {
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string buf = ss.str();
  Reader r(buf);
  if (buf.size() < sizeof(kWeightsMagic) || std::memcmp(buf.data(), kWeightsMagic, sizeof(kWeightsMagic)) != 0) {
    throw DataError("not a weights file (bad magic)");
  }
  for (std::size_t i = 0; i < sizeof(kWeightsMagic); ++i) r.get<char>("magic");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kWeightsVersion) throw DataError("unsupported weights file version " + std::to_string(version));
  const auto size = r.get<std::uint64_t>("payload size");
  if (size != r.remaining()) throw DataError("weights file size mismatch");

  WeightsFile file;
  auto& spec = file.spec;
  spec.arch = get_enum<Arch>(r, 4, "architecture");
  spec.activation = get_enum<ActivationKind>(r, 3, "activation");
  spec.loss = get_enum<LossKind>(r, 2, "loss");
  spec.supervision = get_enum<Supervision>(r, 2, "supervision");
  spec.bias = r.get<std::uint8_t>("bias") != 0;
  spec.seq_len = r.get<std::uint64_t>("seq_len");
  spec.output_width = r.get<std::uint64_t>("output width");
  const auto n_widths = r.get<std::uint64_t>("width count");
  if (n_widths > r.remaining() / 8) throw DataError("weights file truncated in widths");
  for (std::uint64_t i = 0; i < n_widths; ++i) spec.widths.push_back(r.get<std::uint64_t>("width"));
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw DataError(std::string("weights file carries an invalid network: ") + e.what());
  }

  const auto n_w = r.get<std::uint64_t>("weight count");
  const auto n_u = r.get<std::uint64_t>("recurrent count");
  file.weights = WeightStore::zeros(spec);
  if (n_w != file.weights.weight_count() || n_u != file.weights.recurrent_count()) {
    throw DataError("weights file matrix count disagrees with its network");
  }
  for (std::size_t k = 0; k < n_w; ++k) {
    Matrix m = get_matrix(r);
    if (m.rows() != file.weights.w(k).rows() || m.cols() != file.weights.w(k).cols()) {
      throw DataError("weights file W[" + std::to_string(k) + "] has the wrong shape");
    }
    file.weights.w_mut(k) = std::move(m);
  }
  for (std::size_t k = 0; k < n_u; ++k) {
    Matrix m = get_matrix(r);
    if (m.rows() != file.weights.u(k).rows() || m.cols() != file.weights.u(k).cols()) {
      throw DataError("weights file U[" + std::to_string(k) + "] has the wrong shape");
    }
    file.weights.u_mut(k) = std::move(m);
  }
  if (r.remaining() != 0) throw DataError("trailing bytes in weights file");
  return file;
}

WeightsFile load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open weights file '" + path + "'");
  return read_weights(in);
}

}  // namespace lp
