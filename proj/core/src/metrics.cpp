#include "edmark/metrics.hpp"

#include "edmark/unicode.hpp"

#include <algorithm>
#include <cstdint>
#include <sstream>

namespace edmark::metrics {

std::vector<std::string> char_units(std::string_view normalized) {
  return uni::codepoint_units(normalized);
}

std::vector<std::string> word_units(std::string_view normalized) {
  std::vector<std::string> words;
  std::istringstream in{std::string(normalized)};
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

EditOps levenshtein_align(const std::vector<std::string>& ref,
                          const std::vector<std::string>& hyp, Unit unit) {
  EditOps ops;
  ops.unit = unit;
  ops.ref_len = ref.size();

  // Matching prefix/suffix contributes no operations; trim it before the DP.
  std::size_t lo = 0;
  while (lo < ref.size() && lo < hyp.size() && ref[lo] == hyp[lo]) ++lo;
  std::size_t rn = ref.size(), hn = hyp.size();
  while (rn > lo && hn > lo && ref[rn - 1] == hyp[hn - 1]) {
    --rn;
    --hn;
  }
  const std::size_t n = rn - lo, m = hn - lo;
  auto r = [&](std::size_t i) -> const std::string& { return ref[lo + i]; };
  auto h = [&](std::size_t j) -> const std::string& { return hyp[lo + j]; };

  if (n == 0) {
    ops.insertions = static_cast<int>(m);
    return ops;
  }
  if (m == 0) {
    ops.deletions = static_cast<int>(n);
    return ops;
  }

  // Two-row costs plus a full direction matrix. Directions encode the
  // tie-broken argmin (substitution > deletion > insertion).
  enum : std::uint8_t { kDiag = 0, kDel = 1, kIns = 2 };
  std::vector<std::uint8_t> dir((n + 1) * (m + 1));
  std::vector<int> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    prev[j] = static_cast<int>(j);
    dir[j] = kIns;
  }
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    dir[i * (m + 1)] = kDel;
    for (std::size_t j = 1; j <= m; ++j) {
      int diag = prev[j - 1] + (r(i - 1) == h(j - 1) ? 0 : 1);
      int del = prev[j] + 1;
      int ins = cur[j - 1] + 1;
      int best = std::min({diag, del, ins});
      cur[j] = best;
      dir[i * (m + 1) + j] = (diag == best) ? kDiag : (del == best ? kDel : kIns);
    }
    std::swap(prev, cur);
  }

  std::size_t i = n, j = m;
  std::vector<std::pair<std::string, std::string>> subs;
  while (i > 0 || j > 0) {
    switch (dir[i * (m + 1) + j]) {
      case kDiag:
        if (r(i - 1) != h(j - 1)) {
          ++ops.substitutions;
          subs.emplace_back(r(i - 1), h(j - 1));
        }
        --i;
        --j;
        break;
      case kDel:
        ++ops.deletions;
        --i;
        break;
      default:
        ++ops.insertions;
        --j;
        break;
    }
  }
  std::reverse(subs.begin(), subs.end());
  ops.sub_pairs = std::move(subs);
  return ops;
}

double error_rate(const EditOps& ops) {
  if (ops.ref_len == 0)
    return ops.insertions > 0 ? 100.0 * ops.insertions : 0.0;
  return 100.0 * ops.total() / static_cast<double>(ops.ref_len);
}

namespace {

struct Decomposed {
  std::u32string base;
  std::vector<char32_t> marks;  // sorted multiset
};

Decomposed decompose(std::string_view utf8_char) {
  Decomposed d;
  for (char32_t c : uni::nfd(uni::to_utf32(utf8_char))) {
    if (uni::is_combining_mark(c))
      d.marks.push_back(c);
    else
      d.base.push_back(c);
  }
  std::sort(d.marks.begin(), d.marks.end());
  return d;
}

std::vector<char32_t> multiset_symmetric_difference(std::vector<char32_t> a,
                                                    std::vector<char32_t> b) {
  std::vector<char32_t> only_a, only_b;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(only_a));
  std::set_difference(b.begin(), b.end(), a.begin(), a.end(),
                      std::back_inserter(only_b));
  only_a.insert(only_a.end(), only_b.begin(), only_b.end());
  std::sort(only_a.begin(), only_a.end());
  return only_a;
}

constexpr char32_t kSmooth = 0x0313, kRough = 0x0314;
constexpr char32_t kGrave = 0x0300, kAcute = 0x0301, kPerispomeni = 0x0342;
constexpr char32_t kIotaSub = 0x0345;

}  // namespace

DiacriticFlags classify_substitution(std::string_view ref_char,
                                     std::string_view hyp_char) {
  DiacriticFlags flags;
  Decomposed r = decompose(ref_char), h = decompose(hyp_char);
  if (r.base.empty() || r.base != h.base) return flags;
  for (char32_t c : r.base)
    if (!uni::is_greek_letter(c)) return flags;
  if (r.marks == h.marks) return flags;
  flags.eligible = true;

  std::vector<char32_t> diff = multiset_symmetric_difference(r.marks, h.marks);
  flags.breathing = diff == std::vector<char32_t>{kSmooth, kRough};
  flags.iota = diff == std::vector<char32_t>{kIotaSub};
  flags.accent =
      !diff.empty() &&
      std::all_of(diff.begin(), diff.end(), [](char32_t c) {
        return c == kGrave || c == kAcute || c == kPerispomeni;
      });
  return flags;
}

DiacriticBreakdown classify_diacritics(
    const std::vector<std::pair<std::string, std::string>>& sub_pairs) {
  DiacriticBreakdown out;
  if (sub_pairs.empty()) return out;
  std::size_t breathing = 0, accent = 0, iota = 0;
  for (const auto& [r, h] : sub_pairs) {
    DiacriticFlags f = classify_substitution(r, h);
    breathing += f.breathing;
    accent += f.accent;
    iota += f.iota;
  }
  double total = static_cast<double>(sub_pairs.size());
  out.breathing_pct = 100.0 * breathing / total;
  out.accent_pct = 100.0 * accent / total;
  out.iota_pct = 100.0 * iota / total;
  return out;
}

namespace {

double harmonic_f1(double p, double r) {
  return (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
}

}  // namespace

LcsScore lcs_f1(const std::vector<std::string>& ref_items,
                const std::vector<std::string>& hyp_items) {
  if (ref_items.empty() && hyp_items.empty()) return {1.0, 1.0, 1.0, 0};
  const std::size_t n = ref_items.size(), m = hyp_items.size();
  std::vector<std::size_t> prev(m + 1, 0), cur(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      cur[j] = (ref_items[i - 1] == hyp_items[j - 1])
                   ? prev[j - 1] + 1
                   : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  std::size_t lcs = prev[m];
  LcsScore score;
  score.lcs_len = lcs;
  score.precision = m > 0 ? static_cast<double>(lcs) / m : 0.0;
  score.recall = n > 0 ? static_cast<double>(lcs) / n : 0.0;
  score.f1 = harmonic_f1(score.precision, score.recall);
  return score;
}

double header_count_f1(std::size_t ref_count, std::size_t hyp_count) {
  if (ref_count == 0 && hyp_count == 0) return 1.0;
  double matched = static_cast<double>(std::min(ref_count, hyp_count));
  double p = hyp_count > 0 ? matched / hyp_count : 0.0;
  double r = ref_count > 0 ? matched / ref_count : 0.0;
  return harmonic_f1(p, r);
}

std::optional<TabCase> tab_case(const markup::PageDocument& ref,
                                const markup::PageDocument& hyp) {
  if (ref.blocks.empty() ||
      ref.blocks.front().kind != markup::BlockKind::Paragraph)
    return std::nullopt;
  TabCase tc;
  tc.should_tab = ref.blocks.front().tab;
  tc.predicted_tab = false;
  for (const markup::Block& b : hyp.blocks) {
    if (b.kind == markup::BlockKind::Paragraph) {
      tc.predicted_tab = b.tab;
      break;
    }
  }
  return tc;
}

namespace {

std::vector<std::string> tag_items(const markup::PageDocument& doc,
                                   markup::SegmentKind kind) {
  std::vector<std::string> items;
  for (const markup::Block& b : doc.blocks)
    for (const markup::InlineSegment& s : b.segments)
      if (s.kind == kind) items.push_back(markup::normalize_text(s.content));
  return items;
}

std::size_t heading_count(const markup::PageDocument& doc) {
  std::size_t n = 0;
  for (const markup::Block& b : doc.blocks)
    n += b.kind == markup::BlockKind::Heading;
  return n;
}

}  // namespace

PageRecord evaluate_page(const markup::PageDocument& ref,
                         std::string_view hyp_text,
                         const EvalOptions& options) {
  PageRecord rec;
  markup::PageDocument hyp = markup::parse_markup(hyp_text, markup::ParseMode::Lenient);

  std::string ref_plain =
      markup::normalize_text(markup::strip_markup(ref, options.include_notes).plain);
  std::string hyp_plain =
      markup::normalize_text(markup::strip_markup(hyp, options.include_notes).plain);

  rec.char_ops = levenshtein_align(char_units(ref_plain), char_units(hyp_plain),
                                   Unit::Char);
  rec.word_ops = levenshtein_align(word_units(ref_plain), word_units(hyp_plain),
                                   Unit::Word);
  rec.cer = error_rate(rec.char_ops);
  rec.wer = error_rate(rec.word_ops);

  std::vector<std::string> ref_refs = tag_items(ref, markup::SegmentKind::Ref);
  std::vector<std::string> hyp_refs = tag_items(hyp, markup::SegmentKind::Ref);
  rec.ref_ref_count = ref_refs.size();
  rec.hyp_ref_count = hyp_refs.size();
  rec.ref_lcs = lcs_f1(ref_refs, hyp_refs).lcs_len;

  std::vector<std::string> ref_notes = tag_items(ref, markup::SegmentKind::Note);
  std::vector<std::string> hyp_notes = tag_items(hyp, markup::SegmentKind::Note);
  rec.ref_note_count = ref_notes.size();
  rec.hyp_note_count = hyp_notes.size();
  rec.note_lcs = lcs_f1(ref_notes, hyp_notes).lcs_len;

  rec.header_ref_count = heading_count(ref);
  rec.header_hyp_count = heading_count(hyp);
  rec.tab = tab_case(ref, hyp);
  return rec;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

double micro_f1_pct(std::size_t matched, std::size_t ref_total,
                    std::size_t hyp_total) {
  if (ref_total == 0 && hyp_total == 0) return 100.0;
  double p = hyp_total > 0 ? static_cast<double>(matched) / hyp_total : 0.0;
  double r = ref_total > 0 ? static_cast<double>(matched) / ref_total : 0.0;
  return 100.0 * harmonic_f1(p, r);
}

}  // namespace

EvalReport aggregate(const std::vector<PageRecord>& records) {
  if (records.empty()) throw EmptyInputError("aggregate: no page records");
  EvalReport rep;
  rep.n_pages = records.size();

  std::vector<double> cers, wers;
  std::size_t ref_lcs = 0, ref_ref = 0, ref_hyp = 0;
  std::size_t note_lcs = 0, note_ref = 0, note_hyp = 0;
  std::size_t hdr_matched = 0, hdr_ref = 0, hdr_hyp = 0;
  std::size_t tab_pos = 0, tab_pos_ok = 0, tab_neg = 0, tab_neg_ok = 0;
  long long csub = 0, cins = 0, cdel = 0, cref = 0;
  long long wsub = 0, wins = 0, wdel = 0, wref = 0;
  std::vector<std::pair<std::string, std::string>> pooled_subs;

  for (const PageRecord& r : records) {
    cers.push_back(r.cer);
    wers.push_back(r.wer);
    ref_lcs += r.ref_lcs;
    ref_ref += r.ref_ref_count;
    ref_hyp += r.hyp_ref_count;
    note_lcs += r.note_lcs;
    note_ref += r.ref_note_count;
    note_hyp += r.hyp_note_count;
    hdr_matched += std::min(r.header_ref_count, r.header_hyp_count);
    hdr_ref += r.header_ref_count;
    hdr_hyp += r.header_hyp_count;
    if (r.tab) {
      if (r.tab->should_tab) {
        ++tab_pos;
        tab_pos_ok += r.tab->predicted_tab;
      } else {
        ++tab_neg;
        tab_neg_ok += !r.tab->predicted_tab;
      }
    }
    csub += r.char_ops.substitutions;
    cins += r.char_ops.insertions;
    cdel += r.char_ops.deletions;
    cref += static_cast<long long>(r.char_ops.ref_len);
    wsub += r.word_ops.substitutions;
    wins += r.word_ops.insertions;
    wdel += r.word_ops.deletions;
    wref += static_cast<long long>(r.word_ops.ref_len);
    pooled_subs.insert(pooled_subs.end(), r.char_ops.sub_pairs.begin(),
                       r.char_ops.sub_pairs.end());
  }

  rep.cer_median = median(cers);
  rep.wer_median = median(wers);
  double n = static_cast<double>(records.size());
  for (double c : cers) rep.cer_mean += c / n;
  for (double w : wers) rep.wer_mean += w / n;

  rep.ref_f1 = micro_f1_pct(ref_lcs, ref_ref, ref_hyp);
  rep.note_f1 = micro_f1_pct(note_lcs, note_ref, note_hyp);
  rep.header_f1 = micro_f1_pct(hdr_matched, hdr_ref, hdr_hyp);

  if (tab_neg > 0) rep.tab_specificity = 100.0 * tab_neg_ok / tab_neg;
  if (tab_pos > 0) rep.tab_recall = 100.0 * tab_pos_ok / tab_pos;

  if (cref > 0) {
    rep.char_sub_rate = 100.0 * csub / cref;
    rep.char_ins_rate = 100.0 * cins / cref;
    rep.char_del_rate = 100.0 * cdel / cref;
  }
  if (wref > 0) {
    rep.word_sub_rate = 100.0 * wsub / wref;
    rep.word_ins_rate = 100.0 * wins / wref;
    rep.word_del_rate = 100.0 * wdel / wref;
  }
  rep.diacritics = classify_diacritics(pooled_subs);
  return rep;
}

nlohmann::ordered_json report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["cer_med"] = r.cer_median;
  j["cer_mean"] = r.cer_mean;
  j["wer_med"] = r.wer_median;
  j["wer_mean"] = r.wer_mean;
  j["hdr_f1"] = r.header_f1;
  j["ref_f1"] = r.ref_f1;
  j["note_f1"] = r.note_f1;
  j["tab1_spec"] = r.tab_specificity ? nlohmann::ordered_json(*r.tab_specificity)
                                     : nlohmann::ordered_json(nullptr);
  j["tab1_rec"] = r.tab_recall ? nlohmann::ordered_json(*r.tab_recall)
                               : nlohmann::ordered_json(nullptr);
  j["csub"] = r.char_sub_rate;
  j["cins"] = r.char_ins_rate;
  j["cdel"] = r.char_del_rate;
  j["wsub"] = r.word_sub_rate;
  j["wins"] = r.word_ins_rate;
  j["wdel"] = r.word_del_rate;
  j["br_pct"] = r.diacritics.breathing_pct;
  j["ac_pct"] = r.diacritics.accent_pct;
  j["is_pct"] = r.diacritics.iota_pct;
  j["n_pages"] = r.n_pages;
  return j;
}

}  // namespace edmark::metrics
