#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace mgan {

// Shortest round-trip decimal form; stable across runs of the same binary,
// which is what the byte-identical metrics contract relies on.
std::string format_double(double v);

// Little-endian scalar IO, independent of host byte order.
void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_f64(std::ostream& os, double v);
std::uint32_t read_u32(std::istream& is);
std::uint64_t read_u64(std::istream& is);
double read_f64(std::istream& is);

void write_string(std::ostream& os, const std::string& s);
std::string read_string(std::istream& is);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace mgan
