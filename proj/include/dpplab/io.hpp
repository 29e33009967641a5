#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "json_util.hpp"

namespace dpplab {

inline constexpr const char* kVersion = "1.0.0";

// Shortest round-trip text for a double.
inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex16(std::uint64_t v) {
  static const char* d = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = d[v & 0xf];
  return s;
}

inline std::string json_hash(const Json& j) { return hex16(fnv1a64(j.dump())); }

using Cell = std::variant<std::string, double, std::int64_t, std::uint64_t>;

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// In-memory CSV table written with a header row and RFC 4180 quoting.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}
  void row(const std::vector<Cell>& cells) {
    if (cells.size() != header_.size()) throw LabError(ErrorKind::io, "csv: row width does not match header");
    rows_.push_back(cells);
  }
  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) out += (i ? "," : "") + csv_escape(header_[i]);
    out += "\n";
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out += ",";
        std::visit(
            [&](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, std::string>) out += csv_escape(v);
              else if constexpr (std::is_same_v<T, double>) out += fmt(v);
              else out += std::to_string(v);
            },
            r[i]);
      }
      out += "\n";
    }
    return out;
  }
  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw LabError(ErrorKind::io, "cannot write " + p.string());
  f << text;
  if (!f) throw LabError(ErrorKind::io, "write failed: " + p.string());
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw LabError(ErrorKind::io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Output directory of one run; remembers what it wrote for the manifest.
class RunDir {
 public:
  explicit RunDir(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) throw LabError(ErrorKind::io, "cannot create " + root_.string() + ": " + ec.message());
  }
  const std::filesystem::path& path() const { return root_; }
  void csv(const std::string& name, const Csv& t) { text(name, t.str()); }
  void json(const std::string& name, const Json& j) { text(name, j.dump(2) + "\n"); }
  void text(const std::string& name, const std::string& s) {
    write_text(root_ / name, s);
    files_.push_back(name);
  }
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path root_;
  std::vector<std::string> files_;
};

}  // namespace dpplab
