#pragma once

#include <string>

#include "ahcc/field.hpp"

namespace ahcc {

// AHCF field file: header {magic "AHCF", version u32, n u32, N u32, r_max f64,
// rank u32, flag u8} followed by row-major little-endian f64 node values,
// components fastest-varying. Exterior nodes are written as zeros.
void write_field(const std::string& path, const Field& f);

struct FieldHeader {
  std::uint32_t version = 1;
  std::uint32_t n = 0;
  std::uint32_t points_per_axis = 0;
  double r_max = 0;
  Rank rank = Rank::scalar;
  Frame frame = Frame::physical;
};

FieldHeader read_field_header(const std::string& path);

// Reads a field; the provided grid must match the stored header.
Field read_field(const std::string& path, const Grid& grid);

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ahcc
