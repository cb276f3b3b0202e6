#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// The lightweight page-markup scheme shared by synthetic rendering targets
// and manual transcriptions: one block per line, `# ` headings, `<tab/>`
// paragraph indentation, inline <ref>...</ref> and <note>...</note> spans.
namespace edmark::markup {

enum class SegmentKind { PlainText, Ref, Note };

struct InlineSegment {
  SegmentKind kind = SegmentKind::PlainText;
  std::string content;  // UTF-8, never contains a newline
  friend bool operator==(const InlineSegment&, const InlineSegment&) = default;
};

enum class BlockKind { Heading, Paragraph };

struct Block {
  BlockKind kind = BlockKind::Paragraph;
  bool tab = false;  // indentation marker; paragraphs only
  std::vector<InlineSegment> segments;
  friend bool operator==(const Block&, const Block&) = default;
};

struct PageDocument {
  std::vector<Block> blocks;
  std::optional<std::string> work_id;
  std::optional<int> page_no;
  friend bool operator==(const PageDocument&, const PageDocument&) = default;
};

enum class ParseErrorCode { UnclosedTag, TabNotAtLineStart, NestedTag };

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorCode code, std::size_t line, const std::string& what)
      : std::runtime_error(what), code_(code), line_(line) {}
  ParseErrorCode code() const { return code_; }
  std::size_t line() const { return line_; }

 private:
  ParseErrorCode code_;
  std::size_t line_;
};

// Strict mode raises ParseError on malformed tags (reference targets must be
// clean); Lenient degrades malformed tags to plain text so model output can
// always be scored.
enum class ParseMode { Strict, Lenient };

PageDocument parse_markup(std::string_view text,
                          ParseMode mode = ParseMode::Strict);

// Inverse of parse_markup: one line per block, LF separators, no trailing
// newline.
std::string serialize_markup(const PageDocument& doc);

// Maps byte offsets in the stripped text to byte offsets in the serialized
// markup. Strictly increasing and total over the stripped text.
struct OffsetMap {
  std::vector<std::size_t> entries;
  std::size_t markup_offset(std::size_t stripped_offset) const {
    return entries.at(stripped_offset);
  }
};

struct StripResult {
  std::string plain;
  OffsetMap map;
};

// Removes heading markers, <tab/>, and tag delimiters; keeps Ref inner text
// always and Note inner text iff include_notes. Blocks joined by one LF.
StripResult strip_markup(const PageDocument& doc, bool include_notes = true);

// NFKC, then every run of Unicode whitespace collapsed to one ASCII space,
// then trimmed. Idempotent.
std::string normalize_text(std::string_view s);

}  // namespace edmark::markup
