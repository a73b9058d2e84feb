#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace ndkit {

/// Little-endian primitives for the binary file formats.
void write_u32_le(std::ostream& out, uint32_t v);
uint32_t read_u32_le(std::istream& in);
void write_f64_le(std::ostream& out, double v);
double read_f64_le(std::istream& in);
void write_f32_le(std::ostream& out, float v);
float read_f32_le(std::istream& in);

void write_magic(std::ostream& out, const char magic[4]);
void expect_magic(std::istream& in, const char magic[4], const std::string& what);

}  // namespace ndkit
