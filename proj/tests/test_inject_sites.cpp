#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "meic/inject/sites.hpp"
#include "meic/tool/syntax_rules.hpp"
#include "test_util.hpp"

using meic::inject::all_categories;
using meic::inject::apply_site;
using meic::inject::category_examples;
using meic::inject::category_from_string;
using meic::inject::ErrorCategory;
using meic::inject::ErrorKind;
using meic::inject::example_for;
using meic::inject::InjectionSite;
using meic::inject::kind_from_string;
using meic::inject::kind_of;
using meic::inject::list_sites;
using meic::inject::normalize_space;
using meic::inject::revert_site;
using meic::inject::same_modulo_space;
using meic::inject::title_of;
using meic::inject::to_string;

TEST_CASE("the error taxonomy splits into nine syntax and nine function categories") {
  const auto& cats = all_categories();
  REQUIRE(cats.size() == 18);
  // the first half is the syntax bucket, the second half the function bucket
  for (size_t i = 0; i < 9; ++i) CHECK(kind_of(cats[i]) == ErrorKind::Syntax);
  for (size_t i = 9; i < 18; ++i) CHECK(kind_of(cats[i]) == ErrorKind::Function);
}

TEST_CASE("category and kind names round-trip through their string forms") {
  std::set<std::string> ids, titles;
  for (ErrorCategory c : all_categories()) {
    std::string id = to_string(c);
    CHECK(category_from_string(id) == c);
    CHECK(std::all_of(id.begin(), id.end(),
                      [](char ch) { return (ch >= 'a' && ch <= 'z') || ch == '-'; }));
    ids.insert(id);
    titles.insert(title_of(c));
  }
  CHECK(ids.size() == 18);
  CHECK(titles.size() == 18);
  CHECK(kind_from_string(to_string(ErrorKind::Syntax)) == ErrorKind::Syntax);
  CHECK(kind_from_string(to_string(ErrorKind::Function)) == ErrorKind::Function);
  CHECK_THROWS_WITH(category_from_string("no-such-category"),
                    Catch::Matchers::ContainsSubstring("no-such-category"));
}

TEST_CASE("whitespace normalization collapses runs and trims the ends") {
  CHECK(normalize_space("  a \t\n  b ") == "a b");
  CHECK(normalize_space("") == "");
  CHECK(normalize_space("one") == "one");
  CHECK(same_modulo_space("x\n  y", " x y "));
  CHECK_FALSE(same_modulo_space("xy", "x y"));
}

TEST_CASE("each catalogued example is reproduced by exactly one site") {
  REQUIRE(category_examples().size() == 18);
  for (const auto& ex : category_examples()) {
    INFO("category " + to_string(ex.category));
    auto sites = list_sites(ex.correct_form, ex.category);
    REQUIRE(sites.size() == 1);
    CHECK(sites[0].category == ex.category);
    std::string mutated = apply_site(ex.correct_form, sites[0]);
    CHECK(same_modulo_space(mutated, ex.buggy_form));
    CHECK(revert_site(mutated, sites[0]) == ex.correct_form);
  }
  CHECK(example_for(ErrorCategory::OperatorMisuse).category == ErrorCategory::OperatorMisuse);
}

TEST_CASE("site discovery over the corpus is deterministic down to the count matrix") {
  using C = ErrorCategory;
  const std::map<std::string, std::map<C, size_t>> expected = {
      {"adder8",
       {{C::PrematureTermination, 5},
        {C::UndefinedVariable, 3},
        {C::RedundantVariableDeclaration, 1},
        {C::IncorrectEncoding, 13},
        {C::DataIndexOutOfBounds, 2},
        {C::ImproperKeywordUse, 6},
        {C::InsufficientBitWidth, 3},
        {C::LogicalErrorInExpression, 2},
        {C::ConcurrentVariableUse, 3}}},
      {"rca4",
       {{C::PrematureTermination, 7},
        {C::UndefinedVariable, 2},
        {C::RedundantVariableDeclaration, 3},
        {C::IncorrectEncoding, 52},
        {C::DataIndexOutOfBounds, 12},
        {C::ImproperKeywordUse, 13},
        {C::IncompletePortConnection, 4},
        {C::LogicalErrorInExpression, 3},
        {C::ConcurrentVariableUse, 2},
        {C::IncorrectModuleInstantiation, 4}}},
      {"shifter",
       {{C::PrematureTermination, 6},
        {C::UndefinedVariable, 3},
        {C::OperatorMisuse, 3},
        {C::RedundantVariableDeclaration, 2},
        {C::IncorrectEncoding, 20},
        {C::DataIndexOutOfBounds, 2},
        {C::ImproperKeywordUse, 5},
        {C::InsufficientBitWidth, 4},
        {C::ConcurrentVariableUse, 3},
        {C::MismatchedAssignmentValues, 1}}},
      {"popcount8",
       {{C::PrematureTermination, 4},
        {C::UndefinedVariable, 2},
        {C::RedundantVariableDeclaration, 1},
        {C::IncorrectEncoding, 13},
        {C::ImproperKeywordUse, 3},
        {C::InsufficientBitWidth, 2},
        {C::LogicalErrorInExpression, 1},
        {C::InfiniteLoopConstruct, 1}}},
      {"alu8",
       {{C::PrematureTermination, 7},
        {C::UndefinedVariable, 4},
        {C::OperatorMisuse, 3},
        {C::RedundantVariableDeclaration, 1},
        {C::IncorrectEncoding, 16},
        {C::ImproperKeywordUse, 5},
        {C::InsufficientBitWidth, 5},
        {C::LogicalErrorInExpression, 2},
        {C::ConcurrentVariableUse, 1},
        {C::MismatchedAssignmentValues, 1}}},
      {"mux2",
       {{C::PrematureTermination, 2},
        {C::IncorrectEncoding, 5},
        {C::IncorrectDataTypeAssignment, 1},
        {C::ImproperKeywordUse, 4},
        {C::InsufficientBitWidth, 3},
        {C::ConcurrentVariableUse, 1}}},
      {"parity",
       {{C::PrematureTermination, 7},
        {C::UndefinedVariable, 1},
        {C::IncorrectEncoding, 11},
        {C::PortModeDeclarationError, 2},
        {C::ImproperKeywordUse, 4},
        {C::InsufficientBitWidth, 2},
        {C::ConcurrentVariableUse, 2}}},
      {"comparator",
       {{C::PrematureTermination, 4},
        {C::UndefinedVariable, 1},
        {C::OperatorMisuse, 3},
        {C::IncorrectEncoding, 9},
        {C::ImproperKeywordUse, 5},
        {C::InsufficientBitWidth, 2},
        {C::LogicalErrorInExpression, 1},
        {C::ConcurrentVariableUse, 3},
        {C::MismatchedAssignmentValues, 2}}},
  };
  for (const auto& [design, row] : expected) {
    std::string src = meic_test::corpus_source(design);
    for (ErrorCategory cat : all_categories()) {
      INFO(design + " / " + to_string(cat));
      auto it = row.find(cat);
      size_t want = it == row.end() ? 0 : it->second;
      CHECK(list_sites(src, cat).size() == want);
    }
  }
}

TEST_CASE("sites quote the source faithfully and land in the right defect bucket") {
  for (const auto& design : meic_test::corpus_designs()) {
    std::string src = meic_test::corpus_source(design);
    REQUIRE(meic::tool::check_syntax(src).empty());
    for (ErrorCategory cat : all_categories()) {
      auto sites = list_sites(src, cat);
      CHECK(list_sites(src, cat) == sites);  // listing twice changes nothing
      for (size_t i = 0; i < sites.size(); ++i) {
        const InjectionSite& s = sites[i];
        INFO(design + " / " + to_string(cat) + " site " + std::to_string(i));
        REQUIRE(s.span.end >= s.span.begin);
        REQUIRE(s.span.end <= src.size());
        CHECK(src.substr(s.span.begin, s.span.end - s.span.begin) == s.original_text);
        CHECK(s.original_text != s.mutated_text);
        CHECK_FALSE(s.description.empty());
        std::string mutated = apply_site(src, s);
        CHECK(revert_site(mutated, s) == src);
        // a syntax defect must break compilation; a function defect must not
        bool dirty = !meic::tool::check_syntax(mutated).empty();
        CHECK(dirty == (kind_of(cat) == ErrorKind::Syntax));
      }
      for (size_t i = 1; i < sites.size(); ++i) {
        auto key = [](const InjectionSite& s) {
          return std::make_tuple(s.span.begin, s.span.end, s.mutated_text);
        };
        CHECK(key(sites[i - 1]) < key(sites[i]));
      }
    }
  }
}

TEST_CASE("misspellings transpose adjacent characters of assignment targets") {
  auto sites = list_sites(meic_test::corpus_source("adder8"), ErrorCategory::UndefinedVariable);
  std::set<std::string> mutated;
  for (const auto& s : sites) mutated.insert(s.mutated_text);
  CHECK(mutated == std::set<std::string>{"totla", "smu", "cotu"});
}

TEST_CASE("names with no distinct transposition are not offered") {
  // parity drives "even" and "odd"; swapping odd's double letter changes
  // nothing, so only the first name yields a site
  auto sites = list_sites(meic_test::corpus_source("parity"), ErrorCategory::UndefinedVariable);
  REQUIRE(sites.size() == 1);
  CHECK(sites[0].original_text == "even");
  CHECK(sites[0].mutated_text == "evne");
}

TEST_CASE("operator misuse rewrites equality checks into assignments") {
  auto sites = list_sites(meic_test::corpus_source("comparator"), ErrorCategory::OperatorMisuse);
  REQUIRE(sites.size() == 3);
  for (const auto& s : sites) {
    CHECK(s.original_text == "==");
    CHECK(s.mutated_text == "=");
  }
}

TEST_CASE("encoding sites swap one vowel for a two-byte look-alike") {
  auto sites = list_sites(meic_test::corpus_source("mux2"), ErrorCategory::IncorrectEncoding);
  REQUIRE(sites.size() == 5);
  for (const auto& s : sites) {
    // one ASCII vowel becomes a two-byte UTF-8 look-alike inside the name
    CHECK(s.mutated_text.size() == s.original_text.size() + 1);
    CHECK(s.original_text.find('\xC3') == std::string::npos);
    CHECK(s.mutated_text.find('\xC3') != std::string::npos);
  }
}

TEST_CASE("reg-typed combinational outputs can be demoted to continuous assigns") {
  auto sites =
      list_sites(meic_test::corpus_source("mux2"), ErrorCategory::IncorrectDataTypeAssignment);
  REQUIRE(sites.size() == 1);
  CHECK(sites[0].mutated_text == "assign y = sel ? b : a;");
}

TEST_CASE("output declarations can vanish into a comment") {
  auto sites =
      list_sites(meic_test::corpus_source("parity"), ErrorCategory::PortModeDeclarationError);
  REQUIRE(sites.size() == 2);
  std::set<std::string> muts;
  for (const auto& s : sites) muts.insert(s.mutated_text);
  CHECK(muts == std::set<std::string>{"//Declaration for even is missing.",
                                      "//Declaration for odd is missing."});
}

TEST_CASE("index sites step outside the declared range") {
  auto sites = list_sites(meic_test::corpus_source("adder8"), ErrorCategory::DataIndexOutOfBounds);
  REQUIRE(sites.size() == 2);
  std::set<std::string> muts;
  for (const auto& s : sites) muts.insert(s.mutated_text);
  CHECK(muts == std::set<std::string>{"[6:-1]", "[9]"});
}

TEST_CASE("keyword misuse replaces declared names with a reserved word") {
  auto sites = list_sites(meic_test::corpus_source("popcount8"), ErrorCategory::ImproperKeywordUse);
  REQUIRE(sites.size() == 3);
  std::set<std::string> originals;
  for (const auto& s : sites) {
    CHECK(s.mutated_text == "always");
    originals.insert(s.original_text);
  }
  CHECK(originals == std::set<std::string>{"din", "ones", "i"});
}

TEST_CASE("width narrowing skips vectors whose selects would stop compiling") {
  // adder8 reads total[8], so narrowing the nine-bit carry wire would be a
  // compile break rather than a behavioral defect; only the ports qualify
  auto sites = list_sites(meic_test::corpus_source("adder8"), ErrorCategory::InsufficientBitWidth);
  REQUIRE(sites.size() == 3);
  for (const auto& s : sites) {
    CHECK(s.original_text == "[7:0]");
    CHECK(s.mutated_text == "[7:1]");
  }
  // every rca4 vector is fully indexed bit by bit, so nothing can shrink
  CHECK(list_sites(meic_test::corpus_source("rca4"), ErrorCategory::InsufficientBitWidth).empty());
}

TEST_CASE("port connection sites empty the last named hookup of each instance") {
  auto sites =
      list_sites(meic_test::corpus_source("rca4"), ErrorCategory::IncompletePortConnection);
  REQUIRE(sites.size() == 4);
  std::set<std::string> originals;
  for (const auto& s : sites) {
    CHECK(s.mutated_text.empty());
    originals.insert(s.original_text);
  }
  CHECK(originals == std::set<std::string>{"c0", "c1", "c2", "cout"});
}

TEST_CASE("logical sites trade addition for conjunction and back") {
  auto add = list_sites(meic_test::corpus_source("adder8"), ErrorCategory::LogicalErrorInExpression);
  REQUIRE(add.size() == 2);
  for (const auto& s : add) {
    CHECK(s.original_text == "+");
    CHECK(s.mutated_text == "&");
  }
  auto cmp =
      list_sites(meic_test::corpus_source("comparator"), ErrorCategory::LogicalErrorInExpression);
  REQUIRE(cmp.size() == 1);
  CHECK(cmp[0].original_text == "&");
  CHECK(cmp[0].mutated_text == "+");
}

TEST_CASE("duplicate-driver sites are pure insertions") {
  auto sites =
      list_sites(meic_test::corpus_source("comparator"), ErrorCategory::ConcurrentVariableUse);
  REQUIRE(sites.size() == 3);
  for (const auto& s : sites) {
    CHECK(s.span.begin == s.span.end);
    CHECK(s.original_text.empty());
    CHECK(meic::starts_with(s.mutated_text, "\nassign "));
    CHECK(s.mutated_text.find("~(") != std::string::npos);
  }
}

TEST_CASE("mismatched-value sites strip the base from unequal literals only") {
  auto cmp =
      list_sites(meic_test::corpus_source("comparator"), ErrorCategory::MismatchedAssignmentValues);
  REQUIRE(cmp.size() == 2);
  for (const auto& s : cmp) {
    CHECK(s.original_text == "4'b1111");
    CHECK(s.mutated_text == "1111");
  }
  // 2'b00 and 2'b01 read the same with or without the base, so only 2'b10
  // survives in the alu decoder
  auto alu =
      list_sites(meic_test::corpus_source("alu8"), ErrorCategory::MismatchedAssignmentValues);
  REQUIRE(alu.size() == 1);
  CHECK(alu[0].original_text == "2'b10");
  CHECK(alu[0].mutated_text == "10");
}

TEST_CASE("instantiation sites misspell the child module without inventing a real one") {
  auto sites =
      list_sites(meic_test::corpus_source("rca4"), ErrorCategory::IncorrectModuleInstantiation);
  REQUIRE(sites.size() == 4);
  for (const auto& s : sites) {
    CHECK(s.original_text == "full_add");
    CHECK(s.mutated_text == "full_dad");
  }
}

TEST_CASE("loop sites freeze the induction variable or recycle the present state") {
  auto loop =
      list_sites(meic_test::corpus_source("popcount8"), ErrorCategory::InfiniteLoopConstruct);
  REQUIRE(loop.size() == 1);
  CHECK(loop[0].original_text == "i + 1");
  CHECK(loop[0].mutated_text == "i");

  std::string seq = meic::read_file(meic_test::fixture_path("seq/fsm_stepper.v"));
  auto fsm = list_sites(seq, ErrorCategory::InfiniteLoopConstruct);
  REQUIRE(fsm.size() == 4);
  for (const auto& s : fsm) CHECK(s.mutated_text == "current_stage");
}

TEST_CASE("edge lists and assignment styles are only rewritten in clocked blocks") {
  std::string seq = meic::read_file(meic_test::fixture_path("seq/fsm_stepper.v"));
  auto edges = list_sites(seq, ErrorCategory::FlawedSensitivityList);
  REQUIRE(edges.size() == 1);
  CHECK(edges[0].original_text == "posedge");
  CHECK(edges[0].mutated_text == "negedge");
  auto styles = list_sites(seq, ErrorCategory::MisuseOfAssignments);
  REQUIRE(styles.size() == 2);
  for (const auto& s : styles) {
    CHECK(s.original_text == "<=");
    CHECK(s.mutated_text == "=");
  }
  // the combinational corpus has no clocked blocks at all
  for (const auto& design : meic_test::corpus_designs()) {
    std::string src = meic_test::corpus_source(design);
    CHECK(list_sites(src, ErrorCategory::FlawedSensitivityList).empty());
    CHECK(list_sites(src, ErrorCategory::MisuseOfAssignments).empty());
  }
}

TEST_CASE("designs lacking a construct simply offer no sites") {
  std::string src = meic_test::corpus_source("adder8");
  for (ErrorCategory cat :
       {ErrorCategory::OperatorMisuse, ErrorCategory::IncorrectDataTypeAssignment,
        ErrorCategory::PortModeDeclarationError, ErrorCategory::IncompletePortConnection,
        ErrorCategory::FlawedSensitivityList, ErrorCategory::MisuseOfAssignments,
        ErrorCategory::MismatchedAssignmentValues, ErrorCategory::IncorrectModuleInstantiation,
        ErrorCategory::InfiniteLoopConstruct}) {
    CHECK(list_sites(src, cat).empty());
  }
}

TEST_CASE("applying a site outside the source is rejected") {
  InjectionSite s;
  s.category = ErrorCategory::OperatorMisuse;
  s.span = {10, 12};
  s.original_text = "xx";
  s.mutated_text = "y";
  CHECK_THROWS_AS(apply_site("short", s), meic::Error);
}
