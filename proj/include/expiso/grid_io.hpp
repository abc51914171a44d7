#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "expiso/grid.hpp"

// GridSet raster format, bit-exact:
//
//   offset  size  field
//   0       8     magic "EXPISOGS"
//   8       4     u32 version = 1, little endian
//   12      4     u32 n
//   16      8     f64 delta (IEEE-754, little endian)
//   24      8     f64 x_max
//   32      1     u8 includes_tail (0 or 1)
//   33      -     occupancy, row-major: rows ordered j = 0..N-1 (n = 2)
//                 or j + N*k ascending (n = 3); each row is ceil(N/8)
//                 bytes, cell i stored in byte i/8 at bit i%8.
//
// A JSON sidecar (path + ".json") repeats the header fields.

namespace expiso {

namespace detail {

inline constexpr char kGridMagic[8] = {'E', 'X', 'P', 'I', 'S', 'O', 'G', 'S'};

inline void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

inline void put_f64(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((u >> (8 * i)) & 0xff);
  os.write(b, 8);
}

inline std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

}  // namespace detail

inline nlohmann::json gridset_header_json(const GridSet& s) {
  return nlohmann::json{{"format", "expiso-gridset"},
                        {"version", 1},
                        {"n", s.spec().n},
                        {"delta", s.spec().delta},
                        {"x_max", s.spec().x_max},
                        {"includes_tail", s.includes_tail()},
                        {"cells_per_axis", s.cells_per_axis()},
                        {"occupied_cells", s.occupied_count()}};
}

inline void write_gridset(const std::string& path, const GridSet& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_gridset: cannot open " + path);
  os.write(detail::kGridMagic, 8);
  detail::put_u32(os, 1u);
  detail::put_u32(os, static_cast<std::uint32_t>(s.spec().n));
  detail::put_f64(os, s.spec().delta);
  detail::put_f64(os, s.spec().x_max);
  const char tail = s.includes_tail() ? 1 : 0;
  os.write(&tail, 1);

  const int nx = s.cells_per_axis();
  const int bytes_per_row = (nx + 7) / 8;
  const std::int64_t nrows = s.spec().n == 2 ? nx : static_cast<std::int64_t>(nx) * nx;
  std::vector<char> buf(static_cast<std::size_t>(bytes_per_row));
  for (std::int64_t r = 0; r < nrows; ++r) {
    const std::uint64_t* words = s.row(r);
    for (int b = 0; b < bytes_per_row; ++b) {
      buf[static_cast<std::size_t>(b)] = static_cast<char>((words[b >> 3] >> (8 * (b & 7))) & 0xff);
    }
    os.write(buf.data(), bytes_per_row);
  }
  if (!os) throw std::runtime_error("write_gridset: write failed for " + path);

  std::ofstream js(path + ".json");
  if (!js) throw std::runtime_error("write_gridset: cannot open " + path + ".json");
  js << gridset_header_json(s).dump(2) << "\n";
}

inline GridSet read_gridset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_gridset: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, detail::kGridMagic, 8) != 0) {
    throw std::runtime_error("read_gridset: bad magic in " + path);
  }
  const std::uint32_t version = detail::get_u32(is);
  if (version != 1) throw std::runtime_error("read_gridset: unsupported version");
  const int n = static_cast<int>(detail::get_u32(is));
  const double delta = detail::get_f64(is);
  const double x_max = detail::get_f64(is);
  char tail = 0;
  is.read(&tail, 1);
  if (!is) throw std::runtime_error("read_gridset: truncated header in " + path);

  GridSpec spec(n, delta, x_max);
  GridSet out(spec, tail != 0);
  const int nx = spec.cells;
  const int bytes_per_row = (nx + 7) / 8;
  const std::int64_t nrows = n == 2 ? nx : static_cast<std::int64_t>(nx) * nx;
  std::vector<char> buf(static_cast<std::size_t>(bytes_per_row));
  for (std::int64_t r = 0; r < nrows; ++r) {
    is.read(buf.data(), bytes_per_row);
    if (!is) throw std::runtime_error("read_gridset: truncated raster in " + path);
    std::uint64_t* words = out.row(r);
    for (int b = 0; b < bytes_per_row; ++b) {
      words[b >> 3] |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[static_cast<std::size_t>(b)]))
                       << (8 * (b & 7));
    }
    words[out.words_per_row() - 1] &= out.last_word_mask();
  }
  return out;
}

}  // namespace expiso
