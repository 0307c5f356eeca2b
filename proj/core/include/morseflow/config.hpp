#pragma once

// Sectioned key-value configuration text.
//
//   document := { line }
//   line     := blank | comment | section | entry
//   comment  := ('#' | ';') any*
//   section  := '[' name ']'
//   entry    := key '=' value
//   name     := [A-Za-z_][A-Za-z0-9_]*
//   key      := name { '.' (name | digits) }
//
// Whitespace around names, keys and values is ignored. A value runs to the
// end of the line; a '#' inside a value starts a comment only when preceded
// by whitespace. Keys are unique within a section; entries before the first
// section header are rejected.

#include "morseflow/error.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace morseflow::config {

struct Entry {
  std::string key;
  std::string value;
  std::size_t line = 0;
  std::size_t column = 0;  // 1-based column of the value
};

struct Section {
  std::string name;
  std::size_t line = 0;
  std::vector<Entry> entries;

  const Entry* find(std::string_view key) const;
};

class Document {
 public:
  /// Throws ParseError with line and column set.
  static Document parse(std::string_view text, std::string source = "<input>");

  const std::string& source() const noexcept { return source_; }
  const std::vector<Section>& sections() const noexcept { return sections_; }
  const Section* find(std::string_view name) const;

  /// ParseError located at the entry.
  [[noreturn]] void fail(const Entry& e, const std::string& what) const;
  [[noreturn]] void fail(std::size_t line, std::size_t column, const std::string& what) const;

 private:
  std::string source_;
  std::vector<Section> sections_;
};

/// Whole-string conversions; throw ParseError located at the entry.
double to_real(const Document& doc, const Entry& e);
long long to_integer(const Document& doc, const Entry& e);
bool to_bool(const Document& doc, const Entry& e);
std::vector<double> to_reals(const Document& doc, const Entry& e);
std::vector<long long> to_integers(const Document& doc, const Entry& e);

}  // namespace morseflow::config
