#include "stripspec/io.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace stripspec::io {

namespace {

double parse_double(const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  if (end == begin || (end && *end != '\0') || errno == ERANGE)
    throw std::invalid_argument("not a number: '" + text + "'");
  return v;
}

}  // namespace

std::string fmt_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    std::size_t end = comma == std::string::npos ? text.size() : comma;
    out.push_back(parse_double(text.substr(start, end - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  if (text.find(':') == std::string::npos) return parse_list(text);
  std::size_t c1 = text.find(':');
  std::size_t c2 = text.find(':', c1 + 1);
  if (c2 == std::string::npos || text.find(':', c2 + 1) != std::string::npos)
    throw std::invalid_argument("grid must be 'a:b:count': '" + text + "'");
  double a = parse_double(text.substr(0, c1));
  double b = parse_double(text.substr(c1 + 1, c2 - c1 - 1));
  double count_raw = parse_double(text.substr(c2 + 1));
  int count = static_cast<int>(count_raw);
  if (count != count_raw || count < 1)
    throw std::invalid_argument("grid count must be a positive integer: '" + text + "'");
  if (count == 1) {
    if (a != b) throw std::invalid_argument("grid with one point needs a == b: '" + text + "'");
    return {a};
  }
  if (a >= b) throw std::invalid_argument("grid needs a < b: '" + text + "'");
  std::vector<double> out(count);
  for (int j = 0; j < count; ++j)
    out[j] = a + (b - a) * static_cast<double>(j) / (count - 1);
  out.back() = b;  // exact endpoint
  return out;
}

cxd parse_complex(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty complex literal");
  std::string s = text;
  if (s.back() != 'i') return cxd(parse_double(s), 0.0);
  s.pop_back();
  // split real from imaginary at the last sign that is not an exponent sign
  std::size_t split = std::string::npos;
  for (std::size_t k = s.size(); k-- > 1;) {
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  auto unit = [](const std::string& t) {  // "", "+", "-" mean 1, 1, -1
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    return parse_double(t);
  };
  if (split == std::string::npos) return cxd(0.0, unit(s));
  return cxd(parse_double(s.substr(0, split)), unit(s.substr(split)));
}

void write_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  std::FILE* f = std::fopen(tmp.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + tmp + ": " + std::strerror(errno));
  std::size_t written = std::fwrite(content.data(), 1, content.size(), f);
  bool ok = written == content.size() && std::fclose(f) == 0;
  if (!ok) {
    std::remove(tmp.c_str());
    throw std::runtime_error("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot rename " + tmp + " to " + path + ": " +
                             std::strerror(errno));
  }
}

std::string Csv::to_string() const {
  std::string out;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c) out += ',';
    out += columns[c];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += fmt_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace stripspec::io
