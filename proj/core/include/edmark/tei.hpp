#pragma once

#include "edmark/markup.hpp"
#include "edmark/xml.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// TEI/XML ingestion: citation-hierarchy extraction and conversion of
// documents into the page-markup annotation scheme.
namespace edmark::tei {

enum class TeiErrorCode { MalformedXml, NoBody };

class TeiError : public std::runtime_error {
 public:
  TeiError(TeiErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  TeiErrorCode code() const { return code_; }

 private:
  TeiErrorCode code_;
};

struct TeiDocument {
  xml::XmlNode root;

  static TeiDocument parse_string(std::string_view xml_text);
  static TeiDocument load_file(const std::filesystem::path& path);
};

struct CiteLevel {
  std::string name;       // e.g. "book", "chapter", "section"
  bool milestone = false;  // marker may appear inside running text
  int depth = 1;
  friend bool operator==(const CiteLevel&, const CiteLevel&) = default;
};

struct CiteStructure {
  std::vector<CiteLevel> levels;
  friend bool operator==(const CiteStructure&, const CiteStructure&) = default;
};

void to_json(nlohmann::json& j, const CiteLevel& level);
void from_json(const nlohmann::json& j, CiteLevel& level);
void to_json(nlohmann::json& j, const CiteStructure& cs);
void from_json(const nlohmann::json& j, CiteStructure& cs);

// Uses an explicit citeStructure declaration when the header carries one,
// otherwise infers levels from nested divisions and in-paragraph milestones.
CiteStructure extract_cite_structure(const TeiDocument& doc);

// Converts the document body into annotation-scheme blocks. Margin notes
// survive as <note> segments; apparatus notes are dropped.
std::vector<markup::Block> tei_to_markup(const TeiDocument& doc,
                                         const CiteStructure& cs);

}  // namespace edmark::tei
