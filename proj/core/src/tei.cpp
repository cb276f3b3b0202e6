#include "edmark/tei.hpp"

#include "edmark/unicode.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace edmark::tei {

namespace {

using markup::Block;
using markup::BlockKind;
using markup::InlineSegment;
using markup::SegmentKind;
using xml::XmlNode;

std::string collapse_ws(std::string_view s) {
  std::u32string out;
  bool pending = false;
  for (char32_t c : uni::to_utf32(s)) {
    if (uni::is_whitespace(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(U' ');
    pending = false;
    out.push_back(c);
  }
  return uni::to_utf8(out);
}

// Concatenated text content of a node, whitespace-collapsed.
void gather_text(const XmlNode& node, std::string& out) {
  for (const XmlNode& c : node.children) {
    if (c.is_text())
      out += c.text;
    else
      gather_text(c, out);
  }
}

std::string text_content(const XmlNode& node) {
  std::string raw;
  gather_text(node, raw);
  return collapse_ws(raw);
}

const XmlNode* find_body(const XmlNode& root) {
  return root.find("body");
}

std::string level_name(const XmlNode& div, int depth) {
  if (const std::string* subtype = div.attr("subtype"); subtype && !subtype->empty())
    return *subtype;
  if (const std::string* type = div.attr("type"); type && !type->empty() &&
      *type != "textpart" && *type != "edition" && *type != "translation")
    return *type;
  return "level" + std::to_string(depth);
}

void collect_div_levels(const XmlNode& node, int depth,
                        std::map<int, std::map<std::string, int>>& names,
                        int& max_depth) {
  for (const XmlNode& c : node.children) {
    if (c.is_text()) continue;
    if (c.is_element("div")) {
      ++names[depth][level_name(c, depth)];
      max_depth = std::max(max_depth, depth);
      collect_div_levels(c, depth + 1, names, max_depth);
    } else {
      collect_div_levels(c, depth, names, max_depth);
    }
  }
}

bool has_milestone_in_paragraph(const XmlNode& node, std::string& unit_name) {
  for (const XmlNode& c : node.children) {
    if (c.is_text()) continue;
    if (c.is_element("p")) {
      for (const XmlNode& inner : c.children) {
        if (!inner.is_text() && inner.is_element("milestone")) {
          if (const std::string* u = inner.attr("unit"); u && !u->empty())
            unit_name = *u;
          return true;
        }
      }
    }
    std::string nested;
    if (has_milestone_in_paragraph(c, nested)) {
      unit_name = nested.empty() ? unit_name : nested;
      return true;
    }
  }
  return false;
}

CiteStructure from_declaration(const XmlNode& decl) {
  CiteStructure cs;
  const XmlNode* cur = &decl;
  int depth = 1;
  while (cur != nullptr) {
    CiteLevel level;
    if (const std::string* unit = cur->attr("unit"); unit && !unit->empty())
      level.name = *unit;
    else
      level.name = "level" + std::to_string(depth);
    if (const std::string* match = cur->attr("match"))
      level.milestone = match->find("milestone") != std::string::npos;
    level.depth = depth;
    cs.levels.push_back(level);
    const XmlNode* next = nullptr;
    for (const XmlNode& c : cur->children)
      if (!c.is_text() && c.is_element("citeStructure")) {
        next = &c;
        break;
      }
    cur = next;
    ++depth;
  }
  // Only the deepest level may be marked milestone.
  for (std::size_t i = 0; i + 1 < cs.levels.size(); ++i)
    cs.levels[i].milestone = false;
  return cs;
}

}  // namespace

TeiDocument TeiDocument::parse_string(std::string_view xml_text) {
  try {
    return TeiDocument{xml::parse(xml_text)};
  } catch (const xml::XmlError& e) {
    throw TeiError(TeiErrorCode::MalformedXml, e.what());
  }
}

TeiDocument TeiDocument::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw TeiError(TeiErrorCode::MalformedXml,
                   "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

CiteStructure extract_cite_structure(const TeiDocument& doc) {
  const XmlNode* body = find_body(doc.root);
  if (body == nullptr)
    throw TeiError(TeiErrorCode::NoBody, "TEI document has no body element");

  if (const XmlNode* header = doc.root.find("teiHeader"))
    if (const XmlNode* decl = header->find("citeStructure"))
      return from_declaration(*decl);

  CiteStructure cs;
  std::map<int, std::map<std::string, int>> names;
  int max_depth = 0;
  collect_div_levels(*body, 1, names, max_depth);
  for (int depth = 1; depth <= max_depth; ++depth) {
    const auto& candidates = names[depth];
    std::string best = "level" + std::to_string(depth);
    int best_count = -1;
    for (const auto& [name, count] : candidates) {
      if (count > best_count) {
        best = name;
        best_count = count;
      }
    }
    cs.levels.push_back({best, false, depth});
  }
  std::string ms_unit;
  if (has_milestone_in_paragraph(*body, ms_unit)) {
    CiteLevel level;
    level.name = ms_unit.empty() ? "milestone" : ms_unit;
    level.milestone = true;
    level.depth = static_cast<int>(cs.levels.size()) + 1;
    cs.levels.push_back(level);
  }
  return cs;
}

namespace {

struct Converter {
  std::vector<Block> blocks;
  // Block-level milestones attach to the start of the next paragraph.
  std::vector<InlineSegment> pending_refs;

  void convert(const XmlNode& node) {
    for (const XmlNode& c : node.children) {
      if (c.is_text()) continue;
      if (c.is_element("div")) {
        emit_div_heading(c);
        convert(c);
      } else if (c.is_element("p")) {
        emit_paragraph(c);
      } else if (c.is_element("milestone")) {
        if (const std::string* n = c.attr("n"); n && !n->empty())
          pending_refs.push_back({SegmentKind::Ref, *n});
      } else if (c.is_element("head")) {
        // Handled by the enclosing div.
      } else if (c.is_element("note")) {
        // Block-level notes belong to the apparatus; dropped.
      } else {
        convert(c);
      }
    }
  }

  void emit_div_heading(const XmlNode& div) {
    const XmlNode* head = nullptr;
    for (const XmlNode& c : div.children)
      if (!c.is_text() && c.is_element("head")) {
        head = &c;
        break;
      }
    const std::string* n = div.attr("n");
    Block heading;
    heading.kind = BlockKind::Heading;
    if (head != nullptr) {
      if (n && !n->empty()) heading.segments.push_back({SegmentKind::Ref, *n});
      std::string title = text_content(*head);
      if (!title.empty()) {
        std::string text = heading.segments.empty() ? title : " " + title;
        heading.segments.push_back({SegmentKind::PlainText, text});
      }
    } else if (n && !n->empty()) {
      heading.segments.push_back({SegmentKind::Ref, *n});
    }
    if (!heading.segments.empty()) blocks.push_back(std::move(heading));
  }

  void emit_paragraph(const XmlNode& p) {
    Block block;
    block.kind = BlockKind::Paragraph;
    block.tab = true;  // a source paragraph always opens fresh
    block.segments = std::move(pending_refs);
    pending_refs.clear();
    if (!block.segments.empty())
      block.segments.push_back({SegmentKind::PlainText, " "});
    gather_inline(p, block.segments);
    finish_block(block);
    if (!block.segments.empty()) blocks.push_back(std::move(block));
  }

  static void append_text(std::vector<InlineSegment>& segments,
                          const std::string& text) {
    if (text.empty()) return;
    if (!segments.empty() && segments.back().kind == SegmentKind::PlainText)
      segments.back().content += text;
    else
      segments.push_back({SegmentKind::PlainText, text});
  }

  void gather_inline(const XmlNode& node, std::vector<InlineSegment>& segments) {
    for (const XmlNode& c : node.children) {
      if (c.is_text()) {
        append_text(segments, c.text);
      } else if (c.is_element("milestone")) {
        if (const std::string* n = c.attr("n"); n && !n->empty())
          segments.push_back({SegmentKind::Ref, *n});
      } else if (c.is_element("note")) {
        const std::string* place = c.attr("place");
        if (place && *place == "margin") {
          std::string note = text_content(c);
          if (!note.empty()) segments.push_back({SegmentKind::Note, note});
        }
        // other notes (apparatus, footnotes) are dropped
      } else {
        gather_inline(c, segments);  // transparent inline wrapper (hi, foreign, ...)
      }
    }
  }

  // Collapse whitespace inside plain segments, keep single spaces at segment
  // boundaries, trim the block edges.
  static void finish_block(Block& block) {
    for (std::size_t i = 0; i < block.segments.size(); ++i) {
      InlineSegment& seg = block.segments[i];
      if (seg.kind != SegmentKind::PlainText) continue;
      bool lead = !seg.content.empty() &&
                  std::isspace(static_cast<unsigned char>(seg.content.front()));
      bool trail = !seg.content.empty() &&
                   std::isspace(static_cast<unsigned char>(seg.content.back()));
      std::string collapsed = collapse_ws(seg.content);
      if (lead && i > 0) collapsed.insert(collapsed.begin(), ' ');
      if (trail && i + 1 < block.segments.size()) collapsed.push_back(' ');
      seg.content = std::move(collapsed);
    }
    std::erase_if(block.segments, [](const InlineSegment& s) {
      return s.kind == SegmentKind::PlainText && s.content.empty();
    });
  }
};

}  // namespace

std::vector<markup::Block> tei_to_markup(const TeiDocument& doc,
                                         const CiteStructure& /*cs*/) {
  const XmlNode* body = find_body(doc.root);
  if (body == nullptr)
    throw TeiError(TeiErrorCode::NoBody, "TEI document has no body element");
  Converter converter;
  converter.convert(*body);
  return std::move(converter.blocks);
}

void to_json(nlohmann::json& j, const CiteLevel& level) {
  j = {{"name", level.name}, {"milestone", level.milestone}, {"depth", level.depth}};
}

void from_json(const nlohmann::json& j, CiteLevel& level) {
  j.at("name").get_to(level.name);
  j.at("milestone").get_to(level.milestone);
  j.at("depth").get_to(level.depth);
}

void to_json(nlohmann::json& j, const CiteStructure& cs) {
  j = {{"levels", cs.levels}};
}

void from_json(const nlohmann::json& j, CiteStructure& cs) {
  j.at("levels").get_to(cs.levels);
}

}  // namespace edmark::tei
