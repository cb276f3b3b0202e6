#pragma once

#include "edmark/markup.hpp"

#include <opencv2/core.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Synthetic page rendering: layout sampling, dual black/color typesetting
// sources with a span-log sidecar, subprocess orchestration for compilation
// and rasterization, and footer masking.
namespace edmark::render {

enum class Channel { Main, Ref, Note, Heading, Footer, RunningHead, LineNo };

std::string_view channel_name(Channel c);
std::optional<Channel> channel_from_name(std::string_view name);

struct LayoutCatalog {
  std::vector<std::string> paper_formats;
  std::vector<int> column_counts;
  std::vector<std::string> font_families;
  std::vector<std::string> background_templates;
  std::vector<std::string> numeral_styles;      // arabic, roman, greek-alphabetic
  std::vector<std::string> ref_placements;      // margin-left, margin-right, inline, superscript
  std::vector<std::string> heading_alignments;  // center, left
  std::vector<int> line_number_intervals;       // 0, 4, 5, 8, 10, 12, 15
  std::vector<double> base_font_sizes;          // points
  std::vector<std::array<double, 4>> margin_sets;  // left, right, top, bottom (pt)

  static LayoutCatalog builtin();
  static LayoutCatalog load(const std::filesystem::path& json_path);
  void save(const std::filesystem::path& json_path) const;
};

struct LayoutConfig {
  std::uint64_t seed = 0;
  std::string paper_format;
  int columns = 1;
  std::string font_family;
  std::string background_template;
  std::string numeral_style;
  std::string ref_placement;
  std::string heading_alignment;
  int line_number_interval = 0;
  double base_font_size = 10;
  std::array<double, 4> margins{};  // left, right, top, bottom (pt)
  friend bool operator==(const LayoutConfig&, const LayoutConfig&) = default;
};

// (width, height) in points for a named paper format.
std::array<double, 2> paper_size_pt(const std::string& paper_format);

enum class RenderErrorCode {
  EmptyCatalog,
  UnsupportedBlock,
  EngineFailure,
  SpanLogMissing,
  RasterFailure
};

class RenderError : public std::runtime_error {
 public:
  RenderError(RenderErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  RenderErrorCode code() const { return code_; }

 private:
  RenderErrorCode code_;
};

// Deterministic: identical seeds over the same catalog yield identical
// configurations.
LayoutConfig sample_layout(std::uint64_t seed, const LayoutCatalog& catalog);

struct ColoredSpan {
  int page = 1;
  Channel channel = Channel::Main;
  std::string text;
  std::optional<std::array<double, 4>> bbox;  // x, y, w, h in points
};

struct SpanLog {
  std::string doc_id;
  std::vector<ColoredSpan> spans;

  // JSON Lines wire format: one span per line with fields page, channel,
  // text, and optional bbox.
  static SpanLog read_jsonl(const std::filesystem::path& path);
  static SpanLog parse_jsonl(std::string_view content);
  void write_jsonl(const std::filesystem::path& path) const;
  std::string to_jsonl() const;
};

struct RenderSources {
  std::string black;
  std::string color;
};

// Two typesetting sources from the same template; identical content and
// geometry, differing only in color definitions and span-logging macros.
RenderSources emit_sources(const std::vector<markup::Block>& doc,
                           const LayoutConfig& config);

struct RasterJob {
  std::filesystem::path workdir;
  std::string engine_cmd;  // receives the source path, run in workdir
  std::string raster_cmd;  // receives pdf path, dpi, output prefix
  int dpi = 300;
  int max_side_px = 1024;
  bool dry_run = false;
};

struct RasterResult {
  std::filesystem::path black_source;
  std::filesystem::path color_source;
  std::vector<std::filesystem::path> page_images;
  SpanLog span_log;
};

// Writes both sources under workdir; unless dry_run, runs the engine twice
// per source, parses <jobname>.spans.jsonl, rasterizes the black PDF, and
// downsamples every page so max(width, height) == max_side_px.
RasterResult compile_and_rasterize(const RenderSources& sources,
                                   const std::string& jobname,
                                   const RasterJob& job);

struct MaskStats {
  int filled = 0;
  int clipped = 0;  // boxes that exceeded the page bounds
};

// Fills each box (page-point coordinates) in place. Out-of-bounds boxes are
// clipped and counted, not fatal.
MaskStats mask_regions(cv::Mat& image, const std::vector<std::array<double, 4>>& boxes,
                       double dpi, const cv::Scalar& fill);

}  // namespace edmark::render
