#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "edmark/markup.hpp"
#include "edmark/metrics.hpp"
#include "edmark/unicode.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

#include <cmath>

using namespace edmark;
using doctest::Approx;

namespace {

std::vector<std::string> units(std::string_view s) {
  return metrics::char_units(s);
}

}  // namespace

TEST_CASE("char_units and word_units tokenize normalized text") {
  CHECK(metrics::char_units("αβ γ") ==
        std::vector<std::string>{"α", "β", " ", "γ"});
  CHECK(metrics::word_units("ἡ μὲν ἀρχή") ==
        std::vector<std::string>{"ἡ", "μὲν", "ἀρχή"});
  CHECK(metrics::word_units("").empty());
}

TEST_CASE("levenshtein_align: directed examples") {
  metrics::EditOps ops = metrics::levenshtein_align(units("αβγ"), units("αβγ"));
  CHECK(ops.total() == 0);
  CHECK(ops.ref_len == 3);

  ops = metrics::levenshtein_align(units("αβγ"), units("αδγ"));
  CHECK(ops.substitutions == 1);
  CHECK(ops.insertions == 0);
  CHECK(ops.deletions == 0);
  REQUIRE(ops.sub_pairs.size() == 1);
  CHECK(ops.sub_pairs[0] == std::pair<std::string, std::string>{"β", "δ"});

  ops = metrics::levenshtein_align(units("αβγ"), units(""));
  CHECK(ops.deletions == 3);
  ops = metrics::levenshtein_align(units(""), units("αβ"));
  CHECK(ops.insertions == 2);
}

TEST_CASE("levenshtein_align: tie-break prefers substitution over del/ins") {
  // "αβ" -> "βα" admits either two substitutions or one deletion plus one
  // insertion; the contract picks the substitutions.
  metrics::EditOps ops = metrics::levenshtein_align(units("αβ"), units("βα"));
  CHECK(ops.substitutions == 2);
  CHECK(ops.insertions == 0);
  CHECK(ops.deletions == 0);
}

TEST_CASE("levenshtein_align matches the full-matrix oracle") {
  testutil::Rng rng(41);
  for (int iter = 0; iter < 400; ++iter) {
    std::vector<std::string> ref = units(testutil::random_polytonic(rng, 25));
    std::vector<std::string> hyp = units(testutil::random_polytonic(rng, 25));
    metrics::EditOps got = metrics::levenshtein_align(ref, hyp);
    oracle::EditCounts want = oracle::levenshtein(ref, hyp);
    CAPTURE(iter);
    REQUIRE(got.substitutions == want.substitutions);
    REQUIRE(got.insertions == want.insertions);
    REQUIRE(got.deletions == want.deletions);
    REQUIRE(got.sub_pairs == want.sub_pairs);
  }
}

TEST_CASE("error_rate: empty-reference conventions and >100 rates") {
  metrics::EditOps ops;
  ops.ref_len = 0;
  CHECK(metrics::error_rate(ops) == 0.0);
  ops.insertions = 3;
  CHECK(metrics::error_rate(ops) == 300.0);

  ops = metrics::levenshtein_align(units("α"), units("βγδ"));
  CHECK(metrics::error_rate(ops) == 300.0);  // 1 sub + 2 ins over ref_len 1
}

TEST_CASE("classify_substitution: breathing, accent, iota subscript") {
  // Smooth vs rough breathing on alpha.
  metrics::DiacriticFlags f = metrics::classify_substitution("ἀ", "ἁ");
  CHECK(f.eligible);
  CHECK(f.breathing);
  CHECK_FALSE(f.accent);
  CHECK_FALSE(f.iota);

  // Acute vs grave.
  f = metrics::classify_substitution("ά", "ὰ");
  CHECK(f.eligible);
  CHECK(f.accent);
  CHECK_FALSE(f.breathing);

  // Acute vs circumflex.
  f = metrics::classify_substitution("ή", "ῆ");
  CHECK(f.accent);

  // Missing acute counts as an accent confusion too.
  f = metrics::classify_substitution("ά", "α");
  CHECK(f.eligible);
  CHECK(f.accent);

  // Iota subscript present vs absent.
  f = metrics::classify_substitution("ῳ", "ω");
  CHECK(f.eligible);
  CHECK(f.iota);
  CHECK_FALSE(f.accent);

  // Different base letters: not eligible.
  f = metrics::classify_substitution("ά", "έ");
  CHECK_FALSE(f.eligible);
  CHECK_FALSE(f.accent);

  // Non-Greek base letters: not eligible.
  f = metrics::classify_substitution("á", "à");
  CHECK_FALSE(f.eligible);

  // Same marks: no substitution to classify.
  f = metrics::classify_substitution("ά", "ά");
  CHECK_FALSE(f.eligible);

  // Breathing plus accent difference is neither pure category.
  f = metrics::classify_substitution("ἄ", "α");
  CHECK(f.eligible);
  CHECK_FALSE(f.breathing);
  CHECK_FALSE(f.accent);
  CHECK_FALSE(f.iota);
}

TEST_CASE("classify_substitution is invariant under NFC/NFD input form") {
  testutil::Rng rng(67);
  const auto& abc = testutil::greek_alphabet();
  for (int iter = 0; iter < 300; ++iter) {
    std::string a = abc[rng.below(abc.size() - 1)];
    std::string b = abc[rng.below(abc.size() - 1)];
    auto nfc_form = [](const std::string& s) {
      return uni::to_utf8(uni::nfc(uni::to_utf32(s)));
    };
    auto nfd_form = [](const std::string& s) {
      return uni::to_utf8(uni::nfd(uni::to_utf32(s)));
    };
    metrics::DiacriticFlags fc =
        metrics::classify_substitution(nfc_form(a), nfc_form(b));
    metrics::DiacriticFlags fd =
        metrics::classify_substitution(nfd_form(a), nfd_form(b));
    CAPTURE(a);
    CAPTURE(b);
    REQUIRE(fc.eligible == fd.eligible);
    REQUIRE(fc.breathing == fd.breathing);
    REQUIRE(fc.accent == fd.accent);
    REQUIRE(fc.iota == fd.iota);
  }
}

TEST_CASE("classify_diacritics: percentages over all substitution pairs") {
  std::vector<std::pair<std::string, std::string>> subs = {
      {"ἀ", "ἁ"},  // breathing
      {"ά", "ὰ"},  // accent
      {"ῳ", "ω"},  // iota
      {"β", "δ"},  // plain confusion
  };
  metrics::DiacriticBreakdown d = metrics::classify_diacritics(subs);
  CHECK(d.breathing_pct == Approx(25.0));
  CHECK(d.accent_pct == Approx(25.0));
  CHECK(d.iota_pct == Approx(25.0));
  CHECK(metrics::classify_diacritics({}).breathing_pct == 0.0);
}

TEST_CASE("lcs_f1: directed examples") {
  metrics::LcsScore s = metrics::lcs_f1({"1.1", "1.2", "1.3"}, {"1.1", "1.3"});
  CHECK(s.lcs_len == 2);
  CHECK(s.precision == Approx(1.0));
  CHECK(s.recall == Approx(2.0 / 3.0));
  CHECK(s.f1 == Approx(0.8));

  s = metrics::lcs_f1({}, {});
  CHECK(s.f1 == 1.0);
  s = metrics::lcs_f1({"1"}, {});
  CHECK(s.f1 == 0.0);
  s = metrics::lcs_f1({}, {"1"});
  CHECK(s.f1 == 0.0);

  // Order matters: a reversed hypothesis shares only one item in order.
  s = metrics::lcs_f1({"a", "b", "c"}, {"c", "b", "a"});
  CHECK(s.lcs_len == 1);
}

TEST_CASE("lcs_f1 matches the exhaustive-subsequence oracle") {
  testutil::Rng rng(91);
  const std::vector<std::string> symbols = {"x", "y", "z"};
  for (int iter = 0; iter < 500; ++iter) {
    std::vector<std::string> ref, hyp;
    std::size_t n = rng.below(9), m = rng.below(9);
    for (std::size_t i = 0; i < n; ++i) ref.push_back(symbols[rng.below(3)]);
    for (std::size_t j = 0; j < m; ++j) hyp.push_back(symbols[rng.below(3)]);
    metrics::LcsScore got = metrics::lcs_f1(ref, hyp);
    std::size_t want = oracle::lcs_exhaustive(ref, hyp);
    CAPTURE(iter);
    REQUIRE(got.lcs_len == want);
    if (!ref.empty() && !hyp.empty()) {
      double p = static_cast<double>(want) / m;
      double r = static_cast<double>(want) / n;
      double f1 = (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
      REQUIRE(got.f1 == Approx(f1));
    }
  }
}

TEST_CASE("header_count_f1: min-count formula") {
  CHECK(metrics::header_count_f1(0, 0) == 1.0);
  CHECK(metrics::header_count_f1(2, 2) == Approx(1.0));
  CHECK(metrics::header_count_f1(2, 0) == 0.0);
  CHECK(metrics::header_count_f1(0, 3) == 0.0);
  // ref 4, hyp 2: matched 2, p = 1, r = 0.5 -> F1 = 2/3.
  CHECK(metrics::header_count_f1(4, 2) == Approx(2.0 / 3.0));
  // Exhaustive small grid against the direct formula.
  for (std::size_t r = 0; r <= 10; ++r)
    for (std::size_t h = 0; h <= 10; ++h) {
      double got = metrics::header_count_f1(r, h);
      double matched = static_cast<double>(std::min(r, h));
      double want;
      if (r == 0 && h == 0)
        want = 1.0;
      else {
        double p = h > 0 ? matched / h : 0.0;
        double rr = r > 0 ? matched / r : 0.0;
        want = (p + rr) > 0 ? 2 * p * rr / (p + rr) : 0.0;
      }
      REQUIRE(got == Approx(want));
    }
}

TEST_CASE("tab_case: only when the reference opens with a paragraph") {
  markup::PageDocument ref = markup::parse_markup("# Α\nβγ");
  markup::PageDocument hyp = markup::parse_markup("<tab/>βγ");
  CHECK_FALSE(metrics::tab_case(ref, hyp).has_value());

  ref = markup::parse_markup("<tab/>βγ");
  auto tc = metrics::tab_case(ref, hyp);
  REQUIRE(tc.has_value());
  CHECK(tc->should_tab);
  CHECK(tc->predicted_tab);

  // The hypothesis prediction comes from its first paragraph, headings
  // skipped.
  hyp = markup::parse_markup("# Χ\nβγ");
  tc = metrics::tab_case(ref, hyp);
  REQUIRE(tc.has_value());
  CHECK_FALSE(tc->predicted_tab);

  ref = markup::parse_markup("βγ");
  tc = metrics::tab_case(ref, markup::parse_markup("<tab/>βγ"));
  REQUIRE(tc.has_value());
  CHECK_FALSE(tc->should_tab);
  CHECK(tc->predicted_tab);
}

TEST_CASE("evaluate_page: identical pages score perfectly") {
  markup::PageDocument ref =
      markup::parse_markup("# Α\n<tab/>ἡ <ref>1.2</ref> ἀρχή <note>cf.</note>");
  metrics::PageRecord rec =
      metrics::evaluate_page(ref, markup::serialize_markup(ref));
  CHECK(rec.cer == 0.0);
  CHECK(rec.wer == 0.0);
  CHECK(rec.ref_lcs == 1);
  CHECK(rec.ref_ref_count == 1);
  CHECK(rec.note_lcs == 1);
  CHECK(rec.header_ref_count == 1);
  CHECK(rec.header_hyp_count == 1);
  CHECK_FALSE(rec.tab.has_value());  // page opens with a heading
}

TEST_CASE("evaluate_page: hypothesis parsed leniently, scored on plain text") {
  markup::PageDocument ref = markup::parse_markup("αβγ δε");
  // Unclosed tag in the hypothesis: its literal text enters the comparison.
  metrics::PageRecord rec = metrics::evaluate_page(ref, "αβγ δε<ref>");
  CHECK(rec.char_ops.insertions == 5);  // "<ref>" counted as 5 characters
  CHECK(rec.hyp_ref_count == 0);
}

TEST_CASE("evaluate_page: empty hypothesis against a 100-char page") {
  std::string body;
  for (int i = 0; i < 100; ++i) body += "α";
  markup::PageDocument ref = markup::parse_markup(body);
  metrics::PageRecord rec = metrics::evaluate_page(ref, "");
  CHECK(rec.cer == Approx(100.0));
  CHECK(rec.char_ops.deletions == 100);
}

TEST_CASE("evaluate_page honors include_notes") {
  markup::PageDocument ref = markup::parse_markup("αβ <note>γδ</note>");
  metrics::EvalOptions opts;
  opts.include_notes = false;
  metrics::PageRecord rec = metrics::evaluate_page(ref, "αβ", opts);
  CHECK(rec.cer == 0.0);
  rec = metrics::evaluate_page(ref, "αβ");
  CHECK(rec.cer > 0.0);
}

TEST_CASE("aggregate: hand-scored six-page fixture") {
  // Six references with controlled errors in the hypotheses.
  std::vector<std::pair<std::string, std::string>> pages = {
      {"αβγδ", "αβγδ"},              // perfect
      {"αβγδ", "αβγε"},              // 1 sub / 4 chars -> CER 25
      {"αβγδ", "αβγ"},               // 1 del -> CER 25
      {"αβγδ", "αβγδε"},             // 1 ins -> CER 25
      {"# Α\nβγ", "βγ"},             // heading lost
      {"<tab/>ἀ <ref>1</ref>", "ἁ <ref>2</ref>"},  // breathing + ref + tab
  };
  std::vector<metrics::PageRecord> records;
  for (const auto& [r, h] : pages)
    records.push_back(
        metrics::evaluate_page(markup::parse_markup(r), h));
  metrics::EvalReport rep = metrics::aggregate(records);

  CHECK(rep.n_pages == 6);
  // Page 5 strips to "Α βγ" (4 chars) with "Α " deleted: CER 50. Page 6
  // strips to "ἀ 1" (3 chars) and takes 2 substitutions (breathing flip,
  // ref digit), CER 200/3. Sorted CERs: 0, 25, 25, 25, 50, 66.7 -> median 25.
  CHECK(rep.cer_median == Approx(25.0));
  CHECK(rep.cer_mean == Approx((0 + 25 + 25 + 25 + 50 + 200.0 / 3) / 6));
  // Headers: ref total 1, hyp total 0 -> F1 0.
  CHECK(rep.header_f1 == 0.0);
  // Refs: one ref in ref page 6 ("1") vs hyp ("2"): lcs 0 -> F1 0.
  CHECK(rep.ref_f1 == 0.0);
  // Notes: none anywhere -> perfect.
  CHECK(rep.note_f1 == 100.0);
  // Tab cases: pages 1-4 open with tab-less paragraphs (4 negatives, all
  // correctly tab-less), page 6 opens with a tab paragraph missed by the
  // hypothesis. Page 5 opens with a heading: no case.
  REQUIRE(rep.tab_specificity.has_value());
  CHECK(*rep.tab_specificity == Approx(100.0));
  REQUIRE(rep.tab_recall.has_value());
  CHECK(*rep.tab_recall == Approx(0.0));
  // Char ops pooled: 3 subs (δ->ε, ἀ->ἁ, 1->2), 1 ins (page 4),
  // 3 dels (page 3's δ, page 5's "Α "). ref_len total = 4*4 + 4 + 3 = 23.
  CHECK(rep.char_sub_rate == Approx(100.0 * 3 / 23));
  CHECK(rep.char_ins_rate == Approx(100.0 * 1 / 23));
  CHECK(rep.char_del_rate == Approx(100.0 * 3 / 23));
  // Diacritics: of the 3 pooled subs, one is a breathing confusion.
  CHECK(rep.diacritics.breathing_pct == Approx(100.0 / 3));

  CHECK_THROWS_AS(metrics::aggregate({}), metrics::EmptyInputError);
}

TEST_CASE("aggregate: no tab cases leaves the ratios absent, JSON nulls") {
  std::vector<metrics::PageRecord> records = {
      metrics::evaluate_page(markup::parse_markup("# Α\nβ"), "# Α\nβ")};
  metrics::EvalReport rep = metrics::aggregate(records);
  CHECK_FALSE(rep.tab_specificity.has_value());
  CHECK_FALSE(rep.tab_recall.has_value());
  nlohmann::ordered_json j = metrics::report_to_json(rep);
  CHECK(j["tab1_spec"].is_null());
  CHECK(j["tab1_rec"].is_null());
}

TEST_CASE("report_to_json carries the published field names in order") {
  std::vector<metrics::PageRecord> records = {
      metrics::evaluate_page(markup::parse_markup("αβ"), "αβ")};
  nlohmann::ordered_json j = metrics::report_to_json(metrics::aggregate(records));
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{
                    "cer_med", "cer_mean", "wer_med", "wer_mean", "hdr_f1",
                    "ref_f1", "note_f1", "tab1_spec", "tab1_rec", "csub",
                    "cins", "cdel", "wsub", "wins", "wdel", "br_pct", "ac_pct",
                    "is_pct", "n_pages"});
  CHECK(j["cer_med"] == 0.0);
  CHECK(j["n_pages"] == 1);
}
