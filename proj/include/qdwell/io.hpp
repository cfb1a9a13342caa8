#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "qdwell/amplitudes.hpp"
#include "qdwell/common.hpp"
#include "qdwell/radial.hpp"

namespace qdwell {

// Locale-independent float formatting: 17 significant digits, '.' decimal
// separator, identical bytes for identical doubles on every run.
inline std::string format_float(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline double parse_float(std::string_view s) {
  // trim ASCII whitespace
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw InputError("cannot parse number: '" + std::string(s) + "'");
  return v;
}

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

//! Plain CSV with optional '#' metadata lines before the header row.
struct CsvTable {
  std::vector<std::string> metadata;  // comment lines without leading '#'
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }

  std::vector<double> column_values(std::string_view name) const {
    const int c = column(name);
    if (c < 0)
      throw InputError("csv: no column named '" + std::string(name) + "'");
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(c)]);
    return out;
  }
};

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      t.metadata.push_back(line.substr(1));
      continue;
    }
    const auto fields = split_csv_line(line);
    if (!header_seen) {
      for (auto f : fields) {
        std::string name(f);
        // trim
        while (!name.empty() && (name.front() == ' ')) name.erase(0, 1);
        while (!name.empty() && (name.back() == ' ')) name.pop_back();
        t.header.push_back(name);
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != t.header.size())
      throw InputError("csv: row has wrong number of fields");
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto f : fields) row.push_back(parse_float(f));
    t.rows.push_back(std::move(row));
  }
  if (!header_seen) throw InputError("csv: missing header row");
  return t;
}

inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  return read_csv(in);
}

//! Tabulated t-matrix from CSV with header E,t_re,t_im.
inline TabulatedTMatrix load_t_table(const std::string& path) {
  const CsvTable t = read_csv_file(path);
  if (t.header != std::vector<std::string>{"E", "t_re", "t_im"})
    throw InputError("t-matrix table must have header E,t_re,t_im");
  if (t.rows.size() < 4)
    throw InputError("t-matrix table needs at least 4 samples");
  std::vector<double> E, re, im;
  for (const auto& r : t.rows) {
    E.push_back(r[0]);
    re.push_back(r[1]);
    im.push_back(r[2]);
  }
  for (std::size_t i = 1; i < E.size(); ++i)
    if (!(E[i] > E[i - 1]))
      throw InputError("t-matrix table energies must be strictly increasing");
  return TabulatedTMatrix(E, re, im);
}

//! Tabulated radial potential from CSV with header r,V_re,V_im.
inline TabulatedPotential load_potential_table(const std::string& path) {
  const CsvTable t = read_csv_file(path);
  if (t.header != std::vector<std::string>{"r", "V_re", "V_im"})
    throw InputError("potential table must have header r,V_re,V_im");
  TabulatedPotential pot;
  for (const auto& row : t.rows) {
    pot.r.push_back(row[0]);
    pot.v.emplace_back(row[1], row[2]);
  }
  for (std::size_t i = 1; i < pot.r.size(); ++i)
    if (!(pot.r[i] > pot.r[i - 1]))
      throw InputError("potential table radii must be strictly increasing");
  return pot;
}

//! Flat INI: [section] headers, key = value lines, '#' comments, UTF-8.
class IniConfig {
public:
  static IniConfig parse(std::string_view text) {
    IniConfig cfg;
    cfg.raw_.assign(text.begin(), text.end());
    std::string section;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
      const std::size_t eol = text.find('\n', pos);
      std::string_view line = text.substr(
          pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
      pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
      ++line_no;
      const std::size_t hash = line.find('#');
      if (hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw InputError("config line " + std::to_string(line_no) +
                           ": malformed section header");
        section = std::string(trim(line.substr(1, line.size() - 2)));
        cfg.values_[section];
        continue;
      }
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos)
        throw InputError("config line " + std::to_string(line_no) +
                         ": expected key = value");
      const std::string key(trim(line.substr(0, eq)));
      const std::string value(trim(line.substr(eq + 1)));
      if (key.empty())
        throw InputError("config line " + std::to_string(line_no) +
                         ": empty key");
      cfg.values_[section][key] = value;
    }
    return cfg;
  }

  static IniConfig parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  bool has(const std::string& section, const std::string& key) const {
    const auto s = values_.find(section);
    return s != values_.end() && s->second.count(key) > 0;
  }

  std::string get(const std::string& section, const std::string& key) const {
    const auto s = values_.find(section);
    if (s == values_.end() || !s->second.count(key))
      throw InputError("config: missing [" + section + "] " + key);
    return s->second.at(key);
  }

  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
  }

  double get_double(const std::string& section, const std::string& key) const {
    return parse_float(get(section, key));
  }

  int get_int(const std::string& section, const std::string& key) const {
    const double v = get_double(section, key);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
      throw InputError("config: [" + section + "] " + key +
                       " must be an integer");
    return i;
  }

  const std::map<std::string, std::map<std::string, std::string>>& sections()
      const {
    return values_;
  }

  std::string hash() const { return hex64(fnv1a64(raw_)); }

private:
  static std::string_view trim(std::string_view s) {
    while (!s.empty() &&
           (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
      s.remove_prefix(1);
    while (!s.empty() &&
           (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
      s.remove_suffix(1);
    return s;
  }

  std::map<std::string, std::map<std::string, std::string>> values_;
  std::string raw_;
};

//! Buffered CSV writer with '#' metadata lines; file contents depend only
//! on the data handed in, so identical inputs give identical bytes.
class CsvWriter {
public:
  void meta(std::string_view key, std::string_view value) {
    buf_ += "# ";
    buf_ += key;
    buf_ += " = ";
    buf_ += value;
    buf_ += '\n';
  }

  void header(std::span<const std::string> names) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (i) buf_ += ',';
      buf_ += names[i];
    }
    buf_ += '\n';
  }

  void row(std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) buf_ += ',';
      buf_ += format_float(values[i]);
    }
    buf_ += '\n';
  }

  const std::string& str() const { return buf_; }

  void write_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open output file: " + path);
    out << buf_;
    if (!out) throw InputError("failed writing output file: " + path);
  }

private:
  std::string buf_;
};

}  // namespace qdwell
