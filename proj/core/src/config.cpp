#include "morseflow/config.hpp"

#include <cctype>
#include <charconv>
#include <system_error>

namespace morseflow::config {

namespace {

bool name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::vector<std::string_view> split_words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && space(s[i])) ++i;
    const std::size_t b = i;
    while (i < s.size() && !space(s[i])) ++i;
    if (b < i) out.push_back(s.substr(b, i - b));
  }
  return out;
}

}  // namespace

const Entry* Section::find(std::string_view key) const {
  for (const auto& e : entries)
    if (e.key == key) return &e;
  return nullptr;
}

const Section* Document::find(std::string_view name) const {
  for (const auto& s : sections_)
    if (s.name == name) return &s;
  return nullptr;
}

void Document::fail(std::size_t line, std::size_t column, const std::string& what) const {
  throw ParseError(source_ + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what, 0, line,
                   column);
}

void Document::fail(const Entry& e, const std::string& what) const {
  fail(e.line, e.column, "'" + e.key + "': " + what);
}

Document Document::parse(std::string_view text, std::string source) {
  Document doc;
  doc.source_ = std::move(source);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, eol - pos);
    ++line_no;
    pos = eol + 1;

    std::size_t i = 0;
    while (i < line.size() && space(line[i])) ++i;
    if (i == line.size() || line[i] == '#' || line[i] == ';') {
      if (eol == text.size()) break;
      continue;
    }
    auto col = [&](std::size_t k) { return k + 1; };

    if (line[i] == '[') {
      std::size_t j = i + 1;
      while (j < line.size() && space(line[j])) ++j;
      if (j >= line.size() || !name_start(line[j])) doc.fail(line_no, col(j), "expected a section name");
      const std::size_t b = j;
      while (j < line.size() && name_char(line[j])) ++j;
      std::string name(line.substr(b, j - b));
      while (j < line.size() && space(line[j])) ++j;
      if (j >= line.size() || line[j] != ']') doc.fail(line_no, col(j), "expected ']'");
      ++j;
      while (j < line.size() && space(line[j])) ++j;
      if (j < line.size() && line[j] != '#' && line[j] != ';')
        doc.fail(line_no, col(j), "unexpected text after section header");
      if (doc.find(name)) doc.fail(line_no, col(b), "duplicate section [" + name + "]");
      doc.sections_.push_back({std::move(name), line_no, {}});
    } else {
      if (!name_start(line[i])) doc.fail(line_no, col(i), "expected a key or section header");
      std::size_t j = i;
      for (;;) {
        while (j < line.size() && name_char(line[j])) ++j;
        if (j < line.size() && line[j] == '.') {
          ++j;
          if (j >= line.size() || !name_char(line[j])) doc.fail(line_no, col(j), "expected a key component after '.'");
          continue;
        }
        break;
      }
      std::string key(line.substr(i, j - i));
      while (j < line.size() && space(line[j])) ++j;
      if (j >= line.size() || line[j] != '=') doc.fail(line_no, col(j), "expected '=' after key '" + key + "'");
      ++j;
      while (j < line.size() && space(line[j])) ++j;
      std::size_t end = j;
      while (end < line.size() && !(line[end] == '#' && end > j && space(line[end - 1]))) ++end;
      while (end > j && space(line[end - 1])) --end;
      if (end == j) doc.fail(line_no, col(j), "empty value for key '" + key + "'");
      if (doc.sections_.empty()) doc.fail(line_no, col(i), "entry before the first section header");
      Section& sec = doc.sections_.back();
      if (sec.find(key)) doc.fail(line_no, col(i), "duplicate key '" + key + "' in [" + sec.name + "]");
      sec.entries.push_back({std::move(key), std::string(line.substr(j, end - j)), line_no, col(j)});
    }
    if (eol == text.size()) break;
  }
  return doc;
}

double to_real(const Document& doc, const Entry& e) {
  double v = 0;
  const char* b = e.value.data();
  const char* end = b + e.value.size();
  auto [p, ec] = std::from_chars(b, end, v);
  if (ec != std::errc() || p != end) doc.fail(e, "expected a real number, got '" + e.value + "'");
  return v;
}

long long to_integer(const Document& doc, const Entry& e) {
  long long v = 0;
  const char* b = e.value.data();
  const char* end = b + e.value.size();
  auto [p, ec] = std::from_chars(b, end, v);
  if (ec != std::errc() || p != end) doc.fail(e, "expected an integer, got '" + e.value + "'");
  return v;
}

bool to_bool(const Document& doc, const Entry& e) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  doc.fail(e, "expected true or false, got '" + e.value + "'");
}

std::vector<double> to_reals(const Document& doc, const Entry& e) {
  std::vector<double> out;
  for (std::string_view w : split_words(e.value)) {
    double v = 0;
    auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || p != w.data() + w.size())
      doc.fail(e, "expected a list of real numbers, got '" + std::string(w) + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<long long> to_integers(const Document& doc, const Entry& e) {
  std::vector<long long> out;
  for (std::string_view w : split_words(e.value)) {
    long long v = 0;
    auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || p != w.data() + w.size())
      doc.fail(e, "expected a list of integers, got '" + std::string(w) + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace morseflow::config
