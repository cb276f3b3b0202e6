#include "edmark/xml.hpp"

#include <cctype>

namespace edmark::xml {

namespace {

class Parser {
 public:
  explicit Parser(std::string_view input) : in_(input) {}

  XmlNode parse_document() {
    skip_prolog();
    XmlNode root = parse_element();
    skip_misc();
    if (pos_ != in_.size()) fail("trailing content after root element");
    return root;
  }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw XmlError("xml parse error at offset " + std::to_string(pos_) + ": " + msg);
  }

  bool eof() const { return pos_ >= in_.size(); }
  char peek() const { return in_[pos_]; }
  bool lookahead(std::string_view s) const {
    return in_.substr(pos_).starts_with(s);
  }
  void expect(std::string_view s) {
    if (!lookahead(s)) fail("expected '" + std::string(s) + "'");
    pos_ += s.size();
  }
  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }

  void skip_until(std::string_view terminator) {
    std::size_t end = in_.find(terminator, pos_);
    if (end == std::string_view::npos) fail("unterminated construct");
    pos_ = end + terminator.size();
  }

  void skip_prolog() {
    skip_misc();
  }

  // Whitespace, comments, PIs, declarations, DOCTYPE between markup.
  void skip_misc() {
    for (;;) {
      skip_ws();
      if (lookahead("<?")) {
        skip_until("?>");
      } else if (lookahead("<!--")) {
        skip_until("-->");
      } else if (lookahead("<!DOCTYPE")) {
        // Skip to the '>' matching the declaration, allowing nested markup
        // declarations in an internal subset.
        pos_ += 9;
        int depth = 0;
        while (!eof()) {
          char c = in_[pos_++];
          if (c == '<') ++depth;
          if (c == '>') {
            if (depth == 0) break;
            --depth;
          }
        }
      } else {
        return;
      }
    }
  }

  static std::string strip_prefix(std::string name) {
    std::size_t colon = name.find(':');
    return colon == std::string::npos ? name : name.substr(colon + 1);
  }

  std::string parse_name() {
    std::size_t start = pos_;
    while (!eof()) {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c)) || c == '>' || c == '/' ||
          c == '=')
        break;
      ++pos_;
    }
    if (pos_ == start) fail("expected a name");
    return std::string(in_.substr(start, pos_ - start));
  }

  void decode_entity(std::string& out) {
    std::size_t semi = in_.find(';', pos_);
    if (semi == std::string_view::npos || semi - pos_ > 12) fail("bad entity");
    std::string_view ent = in_.substr(pos_ + 1, semi - pos_ - 1);
    pos_ = semi + 1;
    if (ent == "lt") out += '<';
    else if (ent == "gt") out += '>';
    else if (ent == "amp") out += '&';
    else if (ent == "apos") out += '\'';
    else if (ent == "quot") out += '"';
    else if (ent.starts_with("#")) {
      unsigned long cp = 0;
      try {
        cp = (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X'))
                 ? std::stoul(std::string(ent.substr(2)), nullptr, 16)
                 : std::stoul(std::string(ent.substr(1)), nullptr, 10);
      } catch (...) {
        fail("bad numeric entity");
      }
      // UTF-8 encode.
      if (cp < 0x80) out += static_cast<char>(cp);
      else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
      } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
      } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
      }
    } else {
      fail("unknown entity '" + std::string(ent) + "'");
    }
  }

  std::string parse_attr_value() {
    if (eof() || (peek() != '"' && peek() != '\'')) fail("expected quoted value");
    char quote = peek();
    ++pos_;
    std::string value;
    while (!eof() && peek() != quote) {
      if (peek() == '&')
        decode_entity(value);
      else
        value += in_[pos_++];
    }
    if (eof()) fail("unterminated attribute value");
    ++pos_;
    return value;
  }

  XmlNode parse_element() {
    expect("<");
    XmlNode node;
    node.name = strip_prefix(parse_name());
    for (;;) {
      skip_ws();
      if (eof()) fail("unterminated start tag");
      if (lookahead("/>")) {
        pos_ += 2;
        return node;
      }
      if (peek() == '>') {
        ++pos_;
        parse_content(node);
        return node;
      }
      std::string key = strip_prefix(parse_name());
      skip_ws();
      expect("=");
      skip_ws();
      node.attrs[key] = parse_attr_value();
    }
  }

  void parse_content(XmlNode& node) {
    std::string text;
    auto flush_text = [&] {
      if (!text.empty()) {
        XmlNode t;
        t.name = "#text";
        t.text = std::move(text);
        node.children.push_back(std::move(t));
        text.clear();
      }
    };
    for (;;) {
      if (eof()) fail("unterminated element <" + node.name + ">");
      if (lookahead("</")) {
        flush_text();
        pos_ += 2;
        std::string name = strip_prefix(parse_name());
        if (name != node.name)
          fail("mismatched close tag </" + name + "> for <" + node.name + ">");
        skip_ws();
        expect(">");
        return;
      }
      if (lookahead("<!--")) {
        skip_until("-->");
      } else if (lookahead("<![CDATA[")) {
        pos_ += 9;
        std::size_t end = in_.find("]]>", pos_);
        if (end == std::string_view::npos) fail("unterminated CDATA");
        text.append(in_.substr(pos_, end - pos_));
        pos_ = end + 3;
      } else if (lookahead("<?")) {
        skip_until("?>");
      } else if (peek() == '<') {
        flush_text();
        node.children.push_back(parse_element());
      } else if (peek() == '&') {
        decode_entity(text);
      } else {
        text += in_[pos_++];
      }
    }
  }
};

}  // namespace

const XmlNode* XmlNode::find(std::string_view element_name) const {
  for (const XmlNode& child : children) {
    if (child.is_element(element_name)) return &child;
    if (!child.is_text())
      if (const XmlNode* hit = child.find(element_name)) return hit;
  }
  return nullptr;
}

XmlNode parse(std::string_view xml) { return Parser(xml).parse_document(); }

}  // namespace edmark::xml
