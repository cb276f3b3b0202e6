#include "edmark/markup.hpp"

#include "edmark/unicode.hpp"

#include <array>

namespace edmark::markup {

namespace {

constexpr std::string_view kRefOpen = "<ref>";
constexpr std::string_view kRefClose = "</ref>";
constexpr std::string_view kNoteOpen = "<note>";
constexpr std::string_view kNoteClose = "</note>";
constexpr std::string_view kTab = "<tab/>";
constexpr std::string_view kHeading = "# ";

bool is_blank(std::string_view line) {
  for (char32_t c : uni::to_utf32(line))
    if (!uni::is_whitespace(c)) return false;
  return true;
}

void append_plain(std::vector<InlineSegment>& segments, std::string_view text) {
  if (text.empty()) return;
  if (!segments.empty() && segments.back().kind == SegmentKind::PlainText)
    segments.back().content.append(text);
  else
    segments.push_back({SegmentKind::PlainText, std::string(text)});
}

// True when text[pos..] starts a recognized span opener or the tab marker.
bool starts_marker(std::string_view text, std::size_t pos) {
  std::string_view rest = text.substr(pos);
  return rest.starts_with(kRefOpen) || rest.starts_with(kNoteOpen) ||
         rest.starts_with(kTab);
}

std::vector<InlineSegment> parse_inline(std::string_view text, ParseMode mode,
                                        std::size_t line_no) {
  std::vector<InlineSegment> segments;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t lt = text.find('<', i);
    if (lt == std::string_view::npos) {
      append_plain(segments, text.substr(i));
      break;
    }
    append_plain(segments, text.substr(i, lt - i));
    i = lt;

    std::string_view rest = text.substr(i);
    if (rest.starts_with(kTab)) {
      // <tab/> is only meaningful at the start of a paragraph line.
      if (mode == ParseMode::Strict)
        throw ParseError(ParseErrorCode::TabNotAtLineStart, line_no,
                         "<tab/> not at line start");
      append_plain(segments, kTab);
      i += kTab.size();
      continue;
    }

    SegmentKind kind;
    std::string_view open, close;
    if (rest.starts_with(kRefOpen)) {
      kind = SegmentKind::Ref;
      open = kRefOpen;
      close = kRefClose;
    } else if (rest.starts_with(kNoteOpen)) {
      kind = SegmentKind::Note;
      open = kNoteOpen;
      close = kNoteClose;
    } else {
      // Stray '<' (including stray closers): literal text. Real OCR output
      // contains such noise and must stay parseable.
      append_plain(segments, text.substr(i, 1));
      ++i;
      continue;
    }

    std::size_t content_start = i + open.size();
    std::size_t close_pos = text.find(close, content_start);
    if (close_pos == std::string_view::npos) {
      if (mode == ParseMode::Strict)
        throw ParseError(ParseErrorCode::UnclosedTag, line_no,
                         std::string("unclosed ") + std::string(open));
      append_plain(segments, open);
      i = content_start;
      continue;
    }
    std::string_view content = text.substr(content_start, close_pos - content_start);
    bool nested = false;
    for (std::size_t j = 0; j < content.size(); ++j) {
      if (content[j] == '<' && starts_marker(content, j)) {
        nested = true;
        break;
      }
    }
    if (nested) {
      if (mode == ParseMode::Strict)
        throw ParseError(ParseErrorCode::NestedTag, line_no,
                         std::string("nested tag inside ") + std::string(open));
      append_plain(segments, open);
      i = content_start;
      continue;
    }
    if (content.empty()) {
      // An empty span carries no information; keep it as literal text.
      append_plain(segments, open);
      append_plain(segments, close);
    } else {
      segments.push_back({kind, std::string(content)});
    }
    i = close_pos + close.size();
  }
  return segments;
}

}  // namespace

PageDocument parse_markup(std::string_view text, ParseMode mode) {
  PageDocument doc;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = (nl == std::string_view::npos)
                                ? text.substr(pos)
                                : text.substr(pos, nl - pos);
    ++line_no;
    if (line.ends_with('\r')) line.remove_suffix(1);
    if (!line.empty() && !is_blank(line)) {
      Block block;
      std::string_view body = line;
      if (line.starts_with(kHeading)) {
        block.kind = BlockKind::Heading;
        body = line.substr(kHeading.size());
      } else {
        block.kind = BlockKind::Paragraph;
        if (line.starts_with(kTab)) {
          block.tab = true;
          body = line.substr(kTab.size());
        }
      }
      block.segments = parse_inline(body, mode, line_no);
      doc.blocks.push_back(std::move(block));
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return doc;
}

namespace {

// Shared emitter for serialize_markup and strip_markup so the OffsetMap is
// guaranteed to index into the exact serialized form.
struct Emitter {
  std::string markup;
  std::string plain;
  OffsetMap map;
  bool collect_plain = false;

  void markup_only(std::string_view s) { markup.append(s); }
  void both(std::string_view s) {
    for (char c : s) {
      if (collect_plain) {
        map.entries.push_back(markup.size());
        plain.push_back(c);
      }
      markup.push_back(c);
    }
  }
};

void emit(const PageDocument& doc, Emitter& out, bool include_notes) {
  bool first = true;
  for (const Block& block : doc.blocks) {
    if (!first) out.both("\n");
    first = false;
    if (block.kind == BlockKind::Heading)
      out.markup_only(kHeading);
    else if (block.tab)
      out.markup_only(kTab);
    for (const InlineSegment& seg : block.segments) {
      switch (seg.kind) {
        case SegmentKind::PlainText:
          out.both(seg.content);
          break;
        case SegmentKind::Ref:
          out.markup_only(kRefOpen);
          out.both(seg.content);
          out.markup_only(kRefClose);
          break;
        case SegmentKind::Note:
          out.markup_only(kNoteOpen);
          if (include_notes)
            out.both(seg.content);
          else
            out.markup_only(seg.content);
          out.markup_only(kNoteClose);
          break;
      }
    }
  }
}

}  // namespace

std::string serialize_markup(const PageDocument& doc) {
  Emitter out;
  emit(doc, out, true);
  return std::move(out.markup);
}

StripResult strip_markup(const PageDocument& doc, bool include_notes) {
  Emitter out;
  out.collect_plain = true;
  emit(doc, out, include_notes);
  return {std::move(out.plain), std::move(out.map)};
}

std::string normalize_text(std::string_view s) {
  std::u32string cps = uni::to_utf32(uni::nfkc(s));
  std::u32string out;
  out.reserve(cps.size());
  bool pending_space = false;
  for (char32_t c : cps) {
    if (uni::is_whitespace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(U' ');
      pending_space = false;
    }
    out.push_back(c);
  }
  return uni::to_utf8(out);
}

}  // namespace edmark::markup
