#include "ndkit/binio.hpp"

#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace ndkit {

void write_u32_le(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32_le(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("unexpected end of binary stream");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

namespace {

void write_u64_le(std::ostream& out, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

uint64_t read_u64_le(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw std::runtime_error("unexpected end of binary stream");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void write_f64_le(std::ostream& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  write_u64_le(out, bits);
}

double read_f64_le(std::istream& in) {
  const uint64_t bits = read_u64_le(in);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

void write_f32_le(std::ostream& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  write_u32_le(out, bits);
}

float read_f32_le(std::istream& in) {
  const uint32_t bits = read_u32_le(in);
  float v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

void write_magic(std::ostream& out, const char magic[4]) { out.write(magic, 4); }

void expect_magic(std::istream& in, const char magic[4], const std::string& what) {
  char buf[4];
  in.read(buf, 4);
  if (!in || std::memcmp(buf, magic, 4) != 0) {
    throw std::runtime_error(what + ": bad magic, expected " + std::string(magic, 4));
  }
}

}  // namespace ndkit
