#include "wprep/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace wprep {

namespace {

constexpr char kMagic[8] = {'W', 'P', 'S', 'N', 'A', 'P', '0', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint64_t kMaxDim = 1u << 20;

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw std::runtime_error("snapshot: truncated stream");
  return to_little(v);
}

void put_complex_array(std::ostream& os, const Complex* data, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    put(os, data[i].real());
    put(os, data[i].imag());
  }
}

void get_complex_array(std::istream& is, Complex* data, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    const double re = get<double>(is);
    const double im = get<double>(is);
    data[i] = Complex(re, im);
  }
}

}  // namespace

void write_snapshot(std::ostream& os, const QuantumState& state) {
  const auto& layout = state.layout();
  os.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, state.is_ket() ? 0u : 1u);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(layout.size()));
  for (const auto& s : layout.subsystems()) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.kind));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.dim));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.label.size()));
    os.write(s.label.data(), static_cast<std::streamsize>(s.label.size()));
  }
  const auto d = static_cast<std::uint64_t>(layout.total_dim());
  put<std::uint64_t>(os, d);
  put<std::uint64_t>(os, state.is_ket() ? 1 : d);
  if (state.is_ket())
    put_complex_array(os, state.amplitudes().data(), d);
  else
    put_complex_array(os, state.matrix().data(), d * d);
  if (!os) throw std::runtime_error("snapshot: write failed");
}

QuantumState read_snapshot(std::istream& is) {
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw std::runtime_error("snapshot: bad magic");
  if (get<std::uint32_t>(is) != kVersion) throw std::runtime_error("snapshot: unsupported version");
  const auto form = get<std::uint32_t>(is);
  if (form > 1) throw std::runtime_error("snapshot: unknown state form");
  const auto count = get<std::uint32_t>(is);
  if (count == 0 || count > 64) throw std::runtime_error("snapshot: implausible subsystem count");
  std::vector<Subsystem> subs;
  std::uint64_t total = 1;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto kind = get<std::uint32_t>(is);
    const auto dim = get<std::uint32_t>(is);
    const auto len = get<std::uint32_t>(is);
    if (kind > 2 || len > 256) throw std::runtime_error("snapshot: corrupt subsystem record");
    std::string label(len, '\0');
    if (!is.read(label.data(), len)) throw std::runtime_error("snapshot: truncated stream");
    subs.push_back({label, static_cast<SubsystemKind>(kind), dim});
    total *= dim;
    if (dim == 0 || total > kMaxDim) throw std::runtime_error("snapshot: implausible dimensions");
  }
  HilbertLayout layout(std::move(subs));
  const auto rows = get<std::uint64_t>(is);
  const auto cols = get<std::uint64_t>(is);
  const auto d = static_cast<std::uint64_t>(layout.total_dim());
  if (rows != d || cols != (form == 0 ? 1 : d)) throw std::runtime_error("snapshot: shape does not match the layout");
  if (form == 0) {
    KetVector v(static_cast<Eigen::Index>(d));
    get_complex_array(is, v.data(), d);
    return QuantumState::ket(std::move(layout), std::move(v), false);
  }
  DenseMatrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  get_complex_array(is, m.data(), d * d);
  return QuantumState::density(std::move(layout), std::move(m));
}

void save_snapshot(const std::string& path, const QuantumState& state) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("snapshot: cannot open '" + path + "' for writing");
  write_snapshot(os, state);
}

QuantumState load_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("snapshot: cannot open '" + path + "'");
  return read_snapshot(is);
}

}  // namespace wprep
