#pragma once

#include "edmark/markup.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Page- and corpus-level scoring: normalized CER/WER, structure F1s, tab
// indentation accuracy, edit-operation decomposition, and diacritic
// confusion classification.
namespace edmark::metrics {

enum class Unit { Char, Word };

struct EditOps {
  int substitutions = 0;
  int insertions = 0;
  int deletions = 0;
  Unit unit = Unit::Char;
  std::size_t ref_len = 0;
  // (ref unit, hyp unit) for every substitution, in traceback order.
  std::vector<std::pair<std::string, std::string>> sub_pairs;

  int total() const { return substitutions + insertions + deletions; }
};

// Unit sequences for the two levels. Characters are codepoints of the
// normalized text; words are the space-separated tokens normalize_text
// produces.
std::vector<std::string> char_units(std::string_view normalized);
std::vector<std::string> word_units(std::string_view normalized);

// Minimal unit-cost edit script. Ties in the traceback prefer substitution
// over deletion over insertion, so sub_pairs are reproducible.
EditOps levenshtein_align(const std::vector<std::string>& ref,
                          const std::vector<std::string>& hyp,
                          Unit unit = Unit::Char);

// 100 * (S+I+D) / ref_len. Empty reference: 0 against an empty hypothesis,
// 100 per hypothesis unit otherwise (rates above 100 are legitimate).
double error_rate(const EditOps& ops);

struct DiacriticFlags {
  bool eligible = false;  // same Greek base letter, different marks
  bool breathing = false;
  bool accent = false;
  bool iota = false;
};

// Classifies one character substitution by NFD-decomposing both sides and
// comparing combining-mark multisets. Invariant under NFC/NFD input form.
DiacriticFlags classify_substitution(std::string_view ref_char,
                                     std::string_view hyp_char);

struct DiacriticBreakdown {
  double breathing_pct = 0;
  double accent_pct = 0;
  double iota_pct = 0;
};

// Percentages relative to the total number of substitution pairs. Categories
// are independent; a pair may count in several.
DiacriticBreakdown classify_diacritics(
    const std::vector<std::pair<std::string, std::string>>& sub_pairs);

struct LcsScore {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t lcs_len = 0;
};

// LCS under exact string equality, in reading order. Both empty -> perfect.
LcsScore lcs_f1(const std::vector<std::string>& ref_items,
                const std::vector<std::string>& hyp_items);

// matched = min(ref, hyp); both zero -> 1.0.
double header_count_f1(std::size_t ref_count, std::size_t hyp_count);

struct TabCase {
  bool should_tab = false;
  bool predicted_tab = false;
};

// Scored only when the reference page opens with a paragraph (no heading
// before it); pages opening with a heading yield no case.
std::optional<TabCase> tab_case(const markup::PageDocument& ref,
                                const markup::PageDocument& hyp);

struct PageRecord {
  double cer = 0;
  double wer = 0;
  EditOps char_ops;
  EditOps word_ops;
  std::size_t ref_lcs = 0, ref_ref_count = 0, hyp_ref_count = 0;
  std::size_t note_lcs = 0, ref_note_count = 0, hyp_note_count = 0;
  std::size_t header_ref_count = 0, header_hyp_count = 0;
  std::optional<TabCase> tab;
};

struct EvalOptions {
  bool include_notes = true;
};

// Parses the hypothesis leniently and scores one page against its reference.
PageRecord evaluate_page(const markup::PageDocument& ref,
                         std::string_view hyp_text,
                         const EvalOptions& options = {});

struct EvalReport {
  double cer_median = 0, cer_mean = 0;
  double wer_median = 0, wer_mean = 0;
  double ref_f1 = 0, note_f1 = 0, header_f1 = 0;  // percentages, micro
  std::optional<double> tab_specificity;          // absent when no such cases
  std::optional<double> tab_recall;
  double char_sub_rate = 0, char_ins_rate = 0, char_del_rate = 0;  // per 100
  double word_sub_rate = 0, word_ins_rate = 0, word_del_rate = 0;
  DiacriticBreakdown diacritics;
  std::size_t n_pages = 0;
};

class EmptyInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

EvalReport aggregate(const std::vector<PageRecord>& records);

// JSON with the published column names (cer_med, wer_med, hdr_f1, tab1_spec,
// csub, br_pct, ...). Absent tab ratios serialize as null.
nlohmann::ordered_json report_to_json(const EvalReport& report);

}  // namespace edmark::metrics
