#include "morseflow/config.hpp"

#include <doctest.h>

#include <string>

using namespace morseflow;
using config::Document;

namespace {

ParseError parse_error(std::string_view text) {
  try {
    Document::parse(text, "t.scn");
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a parse error");
  return ParseError("", 0);
}

}  // namespace

TEST_CASE("sections, entries, comments and whitespace") {
  const Document doc = Document::parse(
      "# leading comment\n"
      "[alpha]\n"
      "  key = value with spaces   \n"
      "; another comment\n"
      "dotted.1 = 3 # trailing\n"
      "\n"
      "[beta]  # header comment\n"
      "expr = x1#x2\n",
      "demo");
  REQUIRE(doc.sections().size() == 2);
  const auto* alpha = doc.find("alpha");
  REQUIRE(alpha);
  CHECK(alpha->line == 2);
  REQUIRE(alpha->entries.size() == 2);
  CHECK(alpha->entries[0].key == "key");
  CHECK(alpha->entries[0].value == "value with spaces");
  CHECK(alpha->entries[0].line == 3);
  CHECK(alpha->entries[0].column == 9);
  CHECK(alpha->find("dotted.1")->value == "3");
  CHECK(doc.find("beta")->find("expr")->value == "x1#x2");
  CHECK(doc.find("gamma") == nullptr);
  CHECK(doc.source() == "demo");
}

TEST_CASE("errors carry line and column") {
  auto e = parse_error("[a]\nkey value\n");
  CHECK(e.line() == 2);
  CHECK(e.column() == 5);
  CHECK(std::string(e.what()).rfind("t.scn:2:5:", 0) == 0);

  e = parse_error("key = 1\n");
  CHECK(e.line() == 1);

  e = parse_error("[a]\n[a]\n");
  CHECK(e.line() == 2);

  e = parse_error("[a]\nk = 1\nk = 2\n");
  CHECK(e.line() == 3);
  CHECK(e.column() == 1);

  e = parse_error("[a]\nk =\n");
  CHECK(e.line() == 2);

  e = parse_error("[a\n");
  CHECK(e.line() == 1);
  CHECK(e.column() == 3);

  e = parse_error("[a] x\n");
  CHECK(e.column() == 5);

  e = parse_error("[a]\nk. = 1\n");
  CHECK(e.line() == 2);
}

TEST_CASE("value conversions") {
  const Document doc = Document::parse(
      "[s]\nr = 1.5e-3\ni = -42\nb = true\nc = false\nrs = 1 -2.5  3\nis = 4 5 6\nbad = 1.5x\n");
  const auto& s = *doc.find("s");
  CHECK(config::to_real(doc, *s.find("r")) == 1.5e-3);
  CHECK(config::to_integer(doc, *s.find("i")) == -42);
  CHECK(config::to_bool(doc, *s.find("b")));
  CHECK_FALSE(config::to_bool(doc, *s.find("c")));
  CHECK(config::to_reals(doc, *s.find("rs")) == std::vector<double>{1, -2.5, 3});
  CHECK(config::to_integers(doc, *s.find("is")) == std::vector<long long>{4, 5, 6});

  try {
    config::to_real(doc, *s.find("bad"));
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 8);
    CHECK(e.column() == 7);
  }
  CHECK_THROWS_AS(config::to_integer(doc, *s.find("r")), ParseError);
  CHECK_THROWS_AS(config::to_bool(doc, *s.find("i")), ParseError);
  CHECK_THROWS_AS(config::to_integers(doc, *s.find("rs")), ParseError);
}

TEST_CASE("empty and comment-only documents") {
  CHECK(Document::parse("").sections().empty());
  CHECK(Document::parse("# nothing\n\n").sections().empty());
  CHECK(Document::parse("[only]").sections().size() == 1);
}
