#ifndef SIMPLEX_EVAL_SRC_WIRE_HPP
#define SIMPLEX_EVAL_SRC_WIRE_HPP

// Internal little-endian framing helpers shared by the model and tensor
// containers.  Not installed.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <vector>

namespace simplex_eval::wire {

inline void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t read_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline void write_f64(std::ostream& os, const double* p, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * 8));
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &p[i], 8);
    write_u64(os, bits);
  }
}

inline std::vector<double> read_f64(std::istream& is, std::size_t n) {
  std::vector<double> out(n);
  if constexpr (std::endian::native == std::endian::little) {
    is.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(n * 8));
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t bits = read_u64(is);
    std::memcpy(&out[i], &bits, 8);
  }
  return out;
}

}  // namespace simplex_eval::wire

#endif
