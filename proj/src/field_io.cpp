#include "ahcc/field_io.hpp"

#include <cstring>
#include <fstream>

namespace ahcc {

namespace {

const char kMagic[4] = {'A', 'H', 'C', 'F'};

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

}  // namespace

void write_field(const std::string& path, const Field& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  const Grid& grid = f.grid();
  os.write(kMagic, 4);
  put_u32(os, 1);
  put_u32(os, static_cast<std::uint32_t>(grid.n()));
  put_u32(os, static_cast<std::uint32_t>(grid.points_per_axis()));
  put_f64(os, grid.r_max());
  put_u32(os, static_cast<std::uint32_t>(f.rank()));
  const unsigned char flag = f.frame() == Frame::rescaled ? 1 : 0;
  os.write(reinterpret_cast<const char*>(&flag), 1);
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p)
    for (int c = 0; c < f.ncomp(); ++c)
      put_f64(os, grid.is_exterior(p) ? 0.0 : f.at(p, c));
  if (!os) throw IoError("write failed: " + path);
}

FieldHeader read_field_header(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("bad magic in field file: " + path);
  FieldHeader h;
  h.version = get_u32(is);
  if (h.version != 1) throw IoError("unsupported field file version");
  h.n = get_u32(is);
  h.points_per_axis = get_u32(is);
  h.r_max = get_f64(is);
  const std::uint32_t rank = get_u32(is);
  if (rank > 2) throw IoError("bad rank in field file");
  h.rank = static_cast<Rank>(rank);
  unsigned char flag;
  is.read(reinterpret_cast<char*>(&flag), 1);
  if (!is) throw IoError("truncated field header");
  h.frame = flag ? Frame::rescaled : Frame::physical;
  return h;
}

Field read_field(const std::string& path, const Grid& grid) {
  FieldHeader h = read_field_header(path);
  if (static_cast<int>(h.n) != grid.n() ||
      static_cast<int>(h.points_per_axis) != grid.points_per_axis() ||
      std::abs(h.r_max - grid.r_max()) > 1e-12)
    throw IoError("field file grid mismatch: " + path);
  std::ifstream is(path, std::ios::binary);
  is.seekg(4 + 4 + 4 + 4 + 8 + 4 + 1);
  Field f(grid, h.rank, h.frame);
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p)
    for (int c = 0; c < f.ncomp(); ++c) f.at(p, c) = get_f64(is);
  if (!is) throw IoError("truncated field data: " + path);
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p)
    if (grid.is_exterior(p))
      for (int c = 0; c < f.ncomp(); ++c) f.at(p, c) = 0.0;
  return f;
}

}  // namespace ahcc
