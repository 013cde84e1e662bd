#include "datamap/io_util.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "datamap/error.hpp"
#include "datamap/rng.hpp"

namespace datamap {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw NumericError("format_double: to_chars failed");
    return std::string(buf, ptr);
}

std::string format_sig(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return std::string(buf);
}

double parse_double(std::string_view s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw ParseError("not a number: '" + std::string(s) + "'");
    }
    return v;
}

long parse_long(std::string_view s) {
    long v = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw ParseError("not an integer: '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::string> split(std::string_view line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + path);
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + path);
}

std::string digest_hex(std::string_view bytes) {
    const std::uint64_t h = fnv1a64(bytes);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

namespace {

constexpr double kSnapTolerance = 1e-6;

}  // namespace

std::size_t ceil_count(double fraction, std::size_t n) {
    const double x = fraction * static_cast<double>(n);
    const double r = std::round(x);
    const double v = (std::abs(x - r) < kSnapTolerance) ? r : std::ceil(x);
    if (v < 0.0) return 0;
    return static_cast<std::size_t>(v);
}

std::size_t floor_count(double fraction, std::size_t n) {
    const double x = fraction * static_cast<double>(n);
    const double r = std::round(x);
    const double v = (std::abs(x - r) < kSnapTolerance) ? r : std::floor(x);
    if (v < 0.0) return 0;
    return static_cast<std::size_t>(v);
}

}  // namespace datamap
