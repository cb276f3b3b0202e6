#include "edmark/corpus.hpp"

#include "edmark/metrics.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace edmark::corpus {

using nlohmann::ordered_json;

std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
  }
  return "train";
}

std::string_view source_name(Source s) {
  return s == Source::Synthetic ? "synthetic" : "real";
}

Split split_from_name(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "valid") return Split::Valid;
  if (name == "test") return Split::Test;
  throw std::invalid_argument("unknown split: " + std::string(name));
}

Source source_from_name(std::string_view name) {
  if (name == "synthetic") return Source::Synthetic;
  if (name == "real") return Source::Real;
  throw std::invalid_argument("unknown source: " + std::string(name));
}

std::string manifest_to_jsonl(const std::vector<ManifestRecord>& records) {
  std::ostringstream out;
  for (const ManifestRecord& r : records) {
    ordered_json j;
    j["work_id"] = r.work_id;
    j["page_no"] = r.page_no;
    j["image_path"] = r.image_path;
    j["markup"] = r.markup;
    j["split"] = std::string(split_name(r.split));
    j["source"] = std::string(source_name(r.source));
    out << j.dump() << "\n";
  }
  return out.str();
}

std::vector<ManifestRecord> parse_manifest(std::string_view content) {
  std::vector<ManifestRecord> records;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      ordered_json j = ordered_json::parse(line);
      ManifestRecord r;
      j.at("work_id").get_to(r.work_id);
      j.at("page_no").get_to(r.page_no);
      j.at("image_path").get_to(r.image_path);
      j.at("markup").get_to(r.markup);
      r.split = split_from_name(j.at("split").get<std::string>());
      r.source = source_from_name(j.at("source").get<std::string>());
      records.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw ManifestParseError("line " + std::to_string(line_no), e.what());
    }
  }
  return records;
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ManifestParseError(path.string(),
                             "cannot read manifest " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str());
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  out << manifest_to_jsonl(records);
}

CorpusStats corpus_stats(const std::vector<ManifestRecord>& records) {
  CorpusStats stats;
  stats.pages = records.size();
  if (records.empty()) return stats;

  std::vector<double> word_counts;
  std::size_t with_ref = 0, with_note = 0, with_heading = 0;
  for (const ManifestRecord& r : records) {
    markup::PageDocument doc;
    try {
      doc = markup::parse_markup(r.markup);
    } catch (const markup::ParseError& e) {
      throw ManifestParseError(r.work_id + ":" + std::to_string(r.page_no),
                               e.what());
    }
    std::string plain = markup::normalize_text(markup::strip_markup(doc).plain);
    word_counts.push_back(
        static_cast<double>(metrics::word_units(plain).size()));
    bool has_ref = false, has_note = false, has_heading = false;
    for (const markup::Block& b : doc.blocks) {
      has_heading |= b.kind == markup::BlockKind::Heading;
      for (const markup::InlineSegment& s : b.segments) {
        has_ref |= s.kind == markup::SegmentKind::Ref;
        has_note |= s.kind == markup::SegmentKind::Note;
      }
    }
    with_ref += has_ref;
    with_note += has_note;
    with_heading += has_heading;
  }

  std::sort(word_counts.begin(), word_counts.end());
  std::size_t n = word_counts.size();
  stats.words_median = n % 2 == 1
                           ? word_counts[n / 2]
                           : (word_counts[n / 2 - 1] + word_counts[n / 2]) / 2.0;
  stats.pct_ref = 100.0 * with_ref / n;
  stats.pct_note = 100.0 * with_note / n;
  stats.pct_heading = 100.0 * with_heading / n;
  return stats;
}

std::string_view ref_system_name(RefSystem s) {
  switch (s) {
    case RefSystem::Section: return "section";
    case RefSystem::Milestone: return "milestone";
    case RefSystem::Mixed: return "mixed";
    case RefSystem::None: return "none";
  }
  return "none";
}

RefSystem classify_reference_system(
    const std::vector<markup::PageDocument>& pages) {
  std::size_t boundary = 0, inline_refs = 0;
  for (const markup::PageDocument& page : pages) {
    for (const markup::Block& b : page.blocks) {
      for (std::size_t i = 0; i < b.segments.size(); ++i) {
        if (b.segments[i].kind != markup::SegmentKind::Ref) continue;
        bool at_boundary = b.kind == markup::BlockKind::Heading || i == 0;
        if (at_boundary)
          ++boundary;
        else
          ++inline_refs;
      }
    }
  }
  if (boundary == 0 && inline_refs == 0) return RefSystem::None;
  if (inline_refs == 0) return RefSystem::Section;
  if (boundary == 0) return RefSystem::Milestone;
  return RefSystem::Mixed;
}

namespace {

bool ends_with_hyphen(const std::string& s) {
  if (s.empty()) return false;
  if (s.back() == '-') return true;
  // U+2010 HYPHEN
  return s.size() >= 3 && s.compare(s.size() - 3, 3, "\xE2\x80\x90") == 0;
}

void drop_trailing_hyphen(std::string& s) {
  if (!s.empty() && s.back() == '-')
    s.pop_back();
  else if (s.size() >= 3 && s.compare(s.size() - 3, 3, "\xE2\x80\x90") == 0)
    s.resize(s.size() - 3);
}

// Appends `fragment` to the paragraph `into`, joining with one space unless
// the earlier text ends in a hyphen (then the hyphen is dropped and the
// fragments fuse).
void join_fragment(markup::Block& into,
                   const std::vector<markup::InlineSegment>& fragment) {
  bool hyphen = false;
  if (!into.segments.empty() &&
      into.segments.back().kind == markup::SegmentKind::PlainText &&
      ends_with_hyphen(into.segments.back().content)) {
    hyphen = true;
    drop_trailing_hyphen(into.segments.back().content);
  }
  bool first = true;
  for (const markup::InlineSegment& seg : fragment) {
    std::string glue = (first && !hyphen && !into.segments.empty()) ? " " : "";
    first = false;
    if (seg.kind == markup::SegmentKind::PlainText &&
        !into.segments.empty() &&
        into.segments.back().kind == markup::SegmentKind::PlainText) {
      into.segments.back().content += glue + seg.content;
    } else {
      if (!glue.empty()) {
        if (!into.segments.empty() &&
            into.segments.back().kind == markup::SegmentKind::PlainText)
          into.segments.back().content += glue;
        else
          into.segments.push_back({markup::SegmentKind::PlainText, glue});
      }
      into.segments.push_back(seg);
    }
  }
}

}  // namespace

std::vector<markup::Block> merge_document(
    const std::vector<markup::PageDocument>& pages) {
  if (pages.empty()) throw EmptyInputError("merge_document: no pages");
  std::vector<markup::Block> out;
  for (const markup::PageDocument& page : pages) {
    std::size_t begin = 0;
    if (!out.empty() && !page.blocks.empty()) {
      const markup::Block& first = page.blocks.front();
      bool continuation = first.kind == markup::BlockKind::Paragraph &&
                          !first.tab &&
                          out.back().kind == markup::BlockKind::Paragraph;
      if (continuation) {
        join_fragment(out.back(), first.segments);
        begin = 1;
      }
    }
    out.insert(out.end(), page.blocks.begin() + static_cast<std::ptrdiff_t>(begin),
               page.blocks.end());
  }
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

void assign_splits(std::vector<ManifestRecord>& records, std::uint64_t seed,
                   double train_fraction) {
  std::vector<std::string> works;
  for (const ManifestRecord& r : records)
    if (std::find(works.begin(), works.end(), r.work_id) == works.end())
      works.push_back(r.work_id);
  std::sort(works.begin(), works.end());

  // Fisher-Yates with a reproducible generator.
  std::uint64_t state = seed ^ 0x5EEDBA5Eull;
  for (std::size_t i = works.size(); i > 1; --i)
    std::swap(works[i - 1], works[splitmix64(state) % i]);

  std::size_t n_train = static_cast<std::size_t>(
      std::min<double>(static_cast<double>(works.size()),
                       train_fraction * static_cast<double>(works.size())));
  std::map<std::string, Split> assignment;
  std::size_t held_out = 0;
  for (std::size_t i = 0; i < works.size(); ++i) {
    if (i < n_train)
      assignment[works[i]] = Split::Train;
    else
      assignment[works[i]] = (held_out++ % 2 == 0) ? Split::Valid : Split::Test;
  }
  for (ManifestRecord& r : records) r.split = assignment.at(r.work_id);
}

}  // namespace edmark::corpus
