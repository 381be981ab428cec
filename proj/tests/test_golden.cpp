#include "doctest.h"
#include "ftg/hpsg.hpp"
#include "golden_check.hpp"

namespace {

const std::string kReference = std::string(FTG_SOURCE_DIR) + "/tests/golden/principles.ftg";

}  // namespace

TEST_CASE("statement splitting and normalization") {
  auto s = golden::statements("a <| b. % c <| d.\n:: P: phrase | P.dtr.head-dtr.loc = X.\n");
  REQUIRE(s.size() == 2);
  CHECK(golden::join(s[0]) == "a <| b .");
  CHECK(golden::join(golden::normalize(s[1])) == ":: P : phrase | P . dtrs . head-dtr . synsem . loc = X .");
  CHECK(golden::join(golden::normalize(golden::tokenize("C.cat.comps C.cat.head"))) ==
        "C . cat . valence . comps C . cat . head");
}

TEST_CASE("sample grammar contains every reference statement") {
  const std::string reference = golden::read_file(kReference);
  REQUIRE(!reference.empty());
  auto report = golden::compare(reference, std::string(ftg::sample_grammar_source()));
  CHECK(report.reference_statements == 9);
  for (const auto& m : report.missing) FAIL_CHECK("missing: " << m);
}

TEST_CASE("a changed statement is detected") {
  const std::string reference = golden::read_file(kReference);
  std::string grammar(ftg::sample_grammar_source());
  const auto at = grammar.find("[head,valence,marking]");
  REQUIRE(at != std::string::npos);
  grammar.replace(at, 22, "[head,valence]");
  auto report = golden::compare(reference, grammar);
  REQUIRE(report.missing.size() == 1);
  CHECK(report.missing[0].find("lmember") != std::string::npos);
}
