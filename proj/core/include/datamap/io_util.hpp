#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace datamap {

/// Shortest round-trip decimal form of a double (std::to_chars).
std::string format_double(double v);

/// Fixed significant-digit form, e.g. format_sig(x, 9) for table exports.
std::string format_sig(double v, int digits);

/// Parses a double, full precision. Throws ParseError on trailing garbage.
double parse_double(std::string_view s);

long parse_long(std::string_view s);

std::vector<std::string> split(std::string_view line, char delim);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

/// 16-hex-char FNV-1a digest of a byte string.
std::string digest_hex(std::string_view bytes);

/// Snap-aware ceil(fraction * n): products that land within 1e-6 of an
/// integer are treated as that integer, so 0.33 * 3000 yields 990, not 991.
std::size_t ceil_count(double fraction, std::size_t n);

/// Snap-aware floor(fraction * n), same tolerance (0.3 * 10 yields 3).
std::size_t floor_count(double fraction, std::size_t n);

}  // namespace datamap
