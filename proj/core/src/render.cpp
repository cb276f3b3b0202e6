#include "edmark/render.hpp"

#include <nlohmann/json.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace edmark::render {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view channel_name(Channel c) {
  switch (c) {
    case Channel::Main: return "main";
    case Channel::Ref: return "ref";
    case Channel::Note: return "note";
    case Channel::Heading: return "heading";
    case Channel::Footer: return "footer";
    case Channel::RunningHead: return "running-head";
    case Channel::LineNo: return "lineno";
  }
  return "main";
}

std::optional<Channel> channel_from_name(std::string_view name) {
  for (Channel c : {Channel::Main, Channel::Ref, Channel::Note, Channel::Heading,
                    Channel::Footer, Channel::RunningHead, Channel::LineNo})
    if (channel_name(c) == name) return c;
  return std::nullopt;
}

LayoutCatalog LayoutCatalog::builtin() {
  LayoutCatalog c;
  c.paper_formats = {"a4paper", "a5paper", "b5paper"};
  c.column_counts = {1, 2};
  c.font_families = {"gfsporson", "gfsdidot", "teubner", "cbgreek"};
  c.background_templates = {"plain-white", "aged-cream", "scan-grey"};
  c.numeral_styles = {"arabic", "roman", "greek-alphabetic"};
  c.ref_placements = {"margin-left", "margin-right", "inline", "superscript"};
  c.heading_alignments = {"center", "left"};
  c.line_number_intervals = {0, 4, 5, 8, 10, 12, 15};
  c.base_font_sizes = {9, 10, 11, 12};
  c.margin_sets = {
      {72, 72, 72, 72},
      {90, 54, 72, 90},
      {54, 90, 64, 80},
  };
  return c;
}

namespace {

json catalog_to_json(const LayoutCatalog& c) {
  return json{{"paper_formats", c.paper_formats},
              {"column_counts", c.column_counts},
              {"font_families", c.font_families},
              {"background_templates", c.background_templates},
              {"numeral_styles", c.numeral_styles},
              {"ref_placements", c.ref_placements},
              {"heading_alignments", c.heading_alignments},
              {"line_number_intervals", c.line_number_intervals},
              {"base_font_sizes", c.base_font_sizes},
              {"margin_sets", c.margin_sets}};
}

LayoutCatalog catalog_from_json(const json& j) {
  LayoutCatalog c;
  j.at("paper_formats").get_to(c.paper_formats);
  j.at("column_counts").get_to(c.column_counts);
  j.at("font_families").get_to(c.font_families);
  j.at("background_templates").get_to(c.background_templates);
  j.at("numeral_styles").get_to(c.numeral_styles);
  j.at("ref_placements").get_to(c.ref_placements);
  j.at("heading_alignments").get_to(c.heading_alignments);
  j.at("line_number_intervals").get_to(c.line_number_intervals);
  j.at("base_font_sizes").get_to(c.base_font_sizes);
  j.at("margin_sets").get_to(c.margin_sets);
  return c;
}

}  // namespace

LayoutCatalog LayoutCatalog::load(const fs::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw std::runtime_error("cannot read catalog " + json_path.string());
  json j;
  in >> j;
  return catalog_from_json(j);
}

void LayoutCatalog::save(const fs::path& json_path) const {
  std::ofstream out(json_path);
  out << catalog_to_json(*this).dump(2) << "\n";
}

std::array<double, 2> paper_size_pt(const std::string& paper_format) {
  if (paper_format == "a4paper") return {595.0, 842.0};
  if (paper_format == "a5paper") return {420.0, 595.0};
  if (paper_format == "b5paper") return {499.0, 709.0};
  if (paper_format == "letterpaper") return {612.0, 792.0};
  return {595.0, 842.0};
}

namespace {

// splitmix64; uniform_int_distribution is implementation-defined, this is
// reproducible everywhere.
struct Prng {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  template <typename T>
  const T& pick(const std::vector<T>& options, const char* dimension) {
    if (options.empty())
      throw RenderError(RenderErrorCode::EmptyCatalog,
                        std::string("catalog dimension is empty: ") + dimension);
    return options[next() % options.size()];
  }
};

}  // namespace

LayoutConfig sample_layout(std::uint64_t seed, const LayoutCatalog& catalog) {
  Prng rng{seed ^ 0xEDA1C0DEull};
  LayoutConfig cfg;
  cfg.seed = seed;
  cfg.paper_format = rng.pick(catalog.paper_formats, "paper_formats");
  cfg.columns = rng.pick(catalog.column_counts, "column_counts");
  cfg.font_family = rng.pick(catalog.font_families, "font_families");
  cfg.background_template =
      rng.pick(catalog.background_templates, "background_templates");
  cfg.numeral_style = rng.pick(catalog.numeral_styles, "numeral_styles");
  cfg.ref_placement = rng.pick(catalog.ref_placements, "ref_placements");
  cfg.heading_alignment =
      rng.pick(catalog.heading_alignments, "heading_alignments");
  cfg.line_number_interval =
      rng.pick(catalog.line_number_intervals, "line_number_intervals");
  cfg.base_font_size = rng.pick(catalog.base_font_sizes, "base_font_sizes");
  cfg.margins = rng.pick(catalog.margin_sets, "margin_sets");
  return cfg;
}

namespace {

std::string escape_latex(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\textbackslash{}"; break;
      case '{': out += "\\{"; break;
      case '}': out += "\\}"; break;
      case '$': out += "\\$"; break;
      case '&': out += "\\&"; break;
      case '#': out += "\\#"; break;
      case '_': out += "\\_"; break;
      case '%': out += "\\%"; break;
      case '~': out += "\\textasciitilde{}"; break;
      case '^': out += "\\textasciicircum{}"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt_pt(double v) {
  std::ostringstream s;
  s << v << "pt";
  return s.str();
}

// The macro block is the only part allowed to differ between the black and
// the color variant.
std::string macro_block(const LayoutConfig& cfg, bool color) {
  std::array<double, 2> page = paper_size_pt(cfg.paper_format);
  double footer_x = cfg.margins[0];
  double footer_y = page[1] - cfg.margins[3];
  double footer_w = page[0] - cfg.margins[0] - cfg.margins[1];
  double footer_h = cfg.margins[3];
  double head_h = cfg.margins[2];

  std::ostringstream s;
  if (!color) {
    s << "\\newcommand{\\EDspan}[2]{#2}\n"
      << "\\newcommand{\\EDfooterspan}[2]{#2}\n"
      << "\\newcommand{\\EDheadspan}[2]{#2}\n"
      << "\\newcommand{\\EDblocksep}{}\n";
    return s.str();
  }
  s << "\\newwrite\\EDspanlog\n"
    << "\\immediate\\openout\\EDspanlog=\\jobname.spans.jsonl\n"
    << "\\definecolor{EDmain}{RGB}{0,0,0}\n"
    << "\\definecolor{EDref}{RGB}{200,0,0}\n"
    << "\\definecolor{EDnote}{RGB}{0,0,200}\n"
    << "\\definecolor{EDheading}{RGB}{0,150,0}\n"
    << "\\definecolor{EDfooter}{RGB}{200,0,200}\n"
    << "\\definecolor{EDrunning-head}{RGB}{0,150,150}\n"
    << "\\definecolor{EDlineno}{RGB}{150,150,0}\n"
    << "\\newcommand{\\EDlog}[2]{\\immediate\\write\\EDspanlog{{\"page\": "
       "\\thepage, \"channel\": \"#1\", \"text\": \"#2\"}}}\n"
    << "\\newcommand{\\EDspan}[2]{\\textcolor{ED#1}{#2}\\EDlog{#1}{#2}}\n"
    << "\\newcommand{\\EDfooterspan}[2]{\\textcolor{ED#1}{#2}\\immediate"
       "\\write\\EDspanlog{{\"page\": \\thepage, \"channel\": \"#1\", "
       "\"text\": \"#2\", \"bbox\": [" << footer_x << ", " << footer_y << ", "
    << footer_w << ", " << footer_h << "]}}\n"
    << "\\newcommand{\\EDheadspan}[2]{\\textcolor{ED#1}{#2}\\immediate"
       "\\write\\EDspanlog{{\"page\": \\thepage, \"channel\": \"#1\", "
       "\"text\": \"#2\", \"bbox\": [" << footer_x << ", 0, " << footer_w
    << ", " << head_h << "]}}\n"
    // Block separator: logged as a bare main-channel space so concatenated
    // span text reproduces the stripped target's block boundaries.
    << "\\newcommand{\\EDblocksep}{\\EDlog{main}{ }}\n";
  return s.str();
}

void emit_segment(std::ostringstream& body, const markup::InlineSegment& seg,
                  const LayoutConfig& cfg, bool in_heading) {
  std::string text = escape_latex(seg.content);
  switch (seg.kind) {
    case markup::SegmentKind::PlainText:
      body << "\\EDspan{" << (in_heading ? "heading" : "main") << "}{" << text
           << "}";
      break;
    case markup::SegmentKind::Ref:
      if (cfg.ref_placement == "margin-left")
        body << "\\reversemarginpar\\marginnote{\\EDspan{ref}{" << text
             << "}}\\normalmarginpar";
      else if (cfg.ref_placement == "margin-right")
        body << "\\marginnote{\\EDspan{ref}{" << text << "}}";
      else if (cfg.ref_placement == "superscript")
        body << "\\textsuperscript{\\EDspan{ref}{" << text << "}}";
      else
        body << "\\EDspan{ref}{" << text << "}";
      break;
    case markup::SegmentKind::Note:
      body << "\\marginnote{\\EDspan{note}{" << text << "}}";
      break;
  }
}

std::string build_source(const std::vector<markup::Block>& doc,
                         const LayoutConfig& cfg, bool color) {
  for (const markup::Block& b : doc) {
    if (b.kind == markup::BlockKind::Heading && b.tab)
      throw RenderError(RenderErrorCode::UnsupportedBlock,
                        "heading with tab flag");
    for (const markup::InlineSegment& s : b.segments)
      if (s.content.find('\n') != std::string::npos)
        throw RenderError(RenderErrorCode::UnsupportedBlock,
                          "segment content contains a newline");
  }

  std::ostringstream s;
  s << "% edmark typesetting source (seed " << cfg.seed << ")\n"
    << "\\documentclass[" << cfg.base_font_size << "pt]{article}\n"
    << "\\usepackage[" << cfg.paper_format << ",left=" << fmt_pt(cfg.margins[0])
    << ",right=" << fmt_pt(cfg.margins[1]) << ",top=" << fmt_pt(cfg.margins[2])
    << ",bottom=" << fmt_pt(cfg.margins[3]) << "]{geometry}\n"
    << "\\usepackage{xcolor}\n"
    << "\\usepackage{marginnote}\n"
    << "\\usepackage{fancyhdr}\n";
  if (cfg.columns == 2) s << "\\usepackage{multicol}\n";
  s << "% font-family: " << cfg.font_family << "\n"
    << "% background-template: " << cfg.background_template << "\n"
    << "% numeral-style: " << cfg.numeral_style << "\n";
  if (cfg.line_number_interval > 0)
    s << "\\usepackage{lineno}\\modulolinenumbers[" << cfg.line_number_interval
      << "]\n";
  s << macro_block(cfg, color);
  s << "\\pagestyle{fancy}\\fancyhf{}\n"
    << "\\fancyfoot[C]{\\EDfooterspan{footer}{\\thepage}}\n"
    << "\\fancyhead[C]{\\EDheadspan{running-head}{\\jobname}}\n"
    << "\\begin{document}\n";
  if (cfg.line_number_interval > 0) s << "\\linenumbers\n";
  if (cfg.columns == 2) s << "\\begin{multicols}{2}\n";

  for (const markup::Block& b : doc) {
    std::ostringstream body;
    for (const markup::InlineSegment& seg : b.segments)
      emit_segment(body, seg, cfg, b.kind == markup::BlockKind::Heading);
    if (b.kind == markup::BlockKind::Heading) {
      if (cfg.heading_alignment == "center")
        s << "\\begin{center}\\textbf{" << body.str()
          << "}\\end{center}\\EDblocksep\n";
      else
        s << "\\par\\noindent\\textbf{" << body.str()
          << "}\\par\\EDblocksep\n";
    } else {
      s << "\\par" << (b.tab ? "\\indent " : "\\noindent ") << body.str()
        << "\\EDblocksep\n";
    }
  }

  if (cfg.columns == 2) s << "\\end{multicols}\n";
  s << "\\end{document}\n";
  return s.str();
}

}  // namespace

RenderSources emit_sources(const std::vector<markup::Block>& doc,
                           const LayoutConfig& config) {
  return {build_source(doc, config, false), build_source(doc, config, true)};
}

SpanLog SpanLog::parse_jsonl(std::string_view content) {
  SpanLog log;
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    ColoredSpan span;
    span.page = j.at("page").get<int>();
    auto ch = channel_from_name(j.at("channel").get<std::string>());
    if (!ch)
      throw std::runtime_error("unknown span channel: " +
                               j.at("channel").get<std::string>());
    span.channel = *ch;
    span.text = j.at("text").get<std::string>();
    if (j.contains("bbox") && !j["bbox"].is_null())
      span.bbox = j["bbox"].get<std::array<double, 4>>();
    log.spans.push_back(std::move(span));
  }
  return log;
}

SpanLog SpanLog::read_jsonl(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read span log " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  SpanLog log = parse_jsonl(buf.str());
  log.doc_id = path.stem().string();
  // `<jobname>.spans.jsonl` identifies the job as `<jobname>`.
  if (log.doc_id.size() > 6 &&
      log.doc_id.compare(log.doc_id.size() - 6, 6, ".spans") == 0)
    log.doc_id.resize(log.doc_id.size() - 6);
  return log;
}

std::string SpanLog::to_jsonl() const {
  std::ostringstream out;
  for (const ColoredSpan& span : spans) {
    json j{{"page", span.page},
           {"channel", std::string(channel_name(span.channel))},
           {"text", span.text}};
    if (span.bbox) j["bbox"] = *span.bbox;
    out << j.dump() << "\n";
  }
  return out.str();
}

void SpanLog::write_jsonl(const fs::path& path) const {
  std::ofstream out(path, std::ios::binary);
  out << to_jsonl();
}

namespace {

int run_in_dir(const fs::path& dir, const std::string& cmd,
               const fs::path& log_file) {
  std::string full = "cd " + dir.string() + " && " + cmd + " > " +
                     log_file.string() + " 2>&1";
  return std::system(full.c_str());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

RasterResult compile_and_rasterize(const RenderSources& sources,
                                   const std::string& jobname,
                                   const RasterJob& job) {
  fs::create_directories(job.workdir);
  RasterResult result;
  result.black_source = job.workdir / (jobname + "-black.tex");
  result.color_source = job.workdir / (jobname + "-color.tex");
  std::ofstream(result.black_source) << sources.black;
  std::ofstream(result.color_source) << sources.color;
  if (job.dry_run) return result;

  for (const fs::path* src : {&result.black_source, &result.color_source}) {
    // Two passes for cross-reference stability.
    for (int pass = 0; pass < 2; ++pass) {
      fs::path log = job.workdir / (src->stem().string() + ".log.txt");
      int rc = run_in_dir(job.workdir,
                          job.engine_cmd + " " + src->filename().string(), log);
      if (rc != 0)
        throw RenderError(RenderErrorCode::EngineFailure,
                          "engine failed on " + src->string() + ":\n" +
                              slurp(log));
    }
  }

  fs::path span_path = job.workdir / (jobname + "-color.spans.jsonl");
  if (!fs::exists(span_path))
    throw RenderError(RenderErrorCode::SpanLogMissing,
                      "missing span log " + span_path.string());
  result.span_log = SpanLog::read_jsonl(span_path);
  result.span_log.doc_id = jobname;

  fs::path pdf = job.workdir / (jobname + "-black.pdf");
  std::string prefix = (job.workdir / (jobname + "-page")).string();
  fs::path raster_log = job.workdir / (jobname + ".raster.log.txt");
  int rc = run_in_dir(job.workdir,
                      job.raster_cmd + " " + pdf.string() + " " +
                          std::to_string(job.dpi) + " " + prefix,
                      raster_log);
  if (rc != 0)
    throw RenderError(RenderErrorCode::RasterFailure,
                      "raster command failed:\n" + slurp(raster_log));

  std::vector<fs::path> images;
  for (const auto& entry : fs::directory_iterator(job.workdir)) {
    std::string name = entry.path().filename().string();
    if (name.starts_with(jobname + "-page") && entry.path().extension() == ".png")
      images.push_back(entry.path());
  }
  std::sort(images.begin(), images.end());
  if (images.empty())
    throw RenderError(RenderErrorCode::RasterFailure,
                      "raster command produced no page images");

  for (const fs::path& img_path : images) {
    cv::Mat img = cv::imread(img_path.string(), cv::IMREAD_UNCHANGED);
    if (img.empty())
      throw RenderError(RenderErrorCode::RasterFailure,
                        "unreadable page image " + img_path.string());
    int side = std::max(img.cols, img.rows);
    if (side != job.max_side_px) {
      double scale = static_cast<double>(job.max_side_px) / side;
      cv::Size target(img.cols >= img.rows
                          ? cv::Size(job.max_side_px,
                                     std::max(1, static_cast<int>(std::lround(img.rows * scale))))
                          : cv::Size(std::max(1, static_cast<int>(std::lround(img.cols * scale))),
                                     job.max_side_px));
      cv::Mat scaled;
      cv::resize(img, scaled, target, 0, 0,
                 scale < 1.0 ? cv::INTER_AREA : cv::INTER_LINEAR);
      cv::imwrite(img_path.string(), scaled);
    }
  }
  result.page_images = std::move(images);
  return result;
}

MaskStats mask_regions(cv::Mat& image,
                       const std::vector<std::array<double, 4>>& boxes,
                       double dpi, const cv::Scalar& fill) {
  MaskStats stats;
  double scale = dpi / 72.0;
  cv::Rect page(0, 0, image.cols, image.rows);
  for (const auto& box : boxes) {
    cv::Rect px(static_cast<int>(std::floor(box[0] * scale)),
                static_cast<int>(std::floor(box[1] * scale)),
                static_cast<int>(std::ceil(box[2] * scale)),
                static_cast<int>(std::ceil(box[3] * scale)));
    cv::Rect clipped = px & page;
    if (clipped.area() <= 0) {
      ++stats.clipped;
      continue;
    }
    if (clipped != px) ++stats.clipped;
    cv::rectangle(image, clipped, fill, cv::FILLED);
    ++stats.filled;
  }
  return stats;
}

}  // namespace edmark::render
