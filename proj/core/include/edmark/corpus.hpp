#pragma once

#include "edmark/markup.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

// Dataset manifests, corpus statistics, reference-system classification, and
// cross-page document reconstruction.
namespace edmark::corpus {

enum class Split { Train, Valid, Test };
enum class Source { Synthetic, Real };

std::string_view split_name(Split s);
std::string_view source_name(Source s);
Split split_from_name(std::string_view name);
Source source_from_name(std::string_view name);

struct ManifestRecord {
  std::string work_id;
  int page_no = 1;
  std::string image_path;
  std::string markup;  // full page markup, embedded newlines escaped in JSONL
  Split split = Split::Train;
  Source source = Source::Synthetic;
  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

// JSON Lines, one record per line, stable field order for diffability.
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);
std::vector<ManifestRecord> parse_manifest(std::string_view content);
void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestRecord>& records);
std::string manifest_to_jsonl(const std::vector<ManifestRecord>& records);

class ManifestParseError : public std::runtime_error {
 public:
  ManifestParseError(std::string record_id, const std::string& what)
      : std::runtime_error(what), record_id_(std::move(record_id)) {}
  const std::string& record_id() const { return record_id_; }

 private:
  std::string record_id_;
};

struct CorpusStats {
  std::size_t pages = 0;
  double words_median = 0;
  double pct_ref = 0;      // pages with >= 1 <ref>
  double pct_note = 0;     // pages with >= 1 <note>
  double pct_heading = 0;  // pages with >= 1 heading
};

// Strict parse of every record; words counted on stripped+normalized text.
CorpusStats corpus_stats(const std::vector<ManifestRecord>& records);

enum class RefSystem { Section, Milestone, Mixed, None };
std::string_view ref_system_name(RefSystem s);

// Boundary refs sit in headings or open a paragraph; everything else is an
// inline (milestone-style) ref.
RefSystem classify_reference_system(const std::vector<markup::PageDocument>& pages);

class EmptyInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reconstructs one document from its pages: an opening paragraph without the
// tab flag continues the previous page's last paragraph (hyphen fragments
// joined without a space, otherwise with one).
std::vector<markup::Block> merge_document(
    const std::vector<markup::PageDocument>& pages);

// Seeded 90/10 split by work group; every page of a work shares its split,
// and the held-out groups alternate between validation and test.
void assign_splits(std::vector<ManifestRecord>& records, std::uint64_t seed,
                   double train_fraction = 0.9);

}  // namespace edmark::corpus
