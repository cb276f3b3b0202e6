// edmark -- corpus construction and evaluation for structure-aware OCR of
// critical editions. Subcommands wire the library modules into batch
// workflows: tei2md, render, align, eval, stats, classify, merge.

#include "edmark/align.hpp"
#include "edmark/corpus.hpp"
#include "edmark/markup.hpp"
#include "edmark/metrics.hpp"
#include "edmark/render.hpp"
#include "edmark/tei.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitPartial = 2;

struct GlobalOpts {
  std::uint64_t seed = 0;
  double threshold = 0.99;
  bool include_notes = true;
  bool dry_run = false;
  unsigned workers = 1;
  bool json_out = false;
  std::string catalog_path;
};

void parallel_for(std::size_t n, unsigned workers,
                  const std::function<void(std::size_t)>& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
        fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

std::vector<fs::path> sorted_files(const fs::path& dir,
                                   std::string_view extension) {
  std::vector<fs::path> files;
  if (fs::exists(dir))
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file() && entry.path().extension() == extension)
        files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

void emit_json(const GlobalOpts& opts, const ordered_json& j) {
  if (opts.json_out) std::cout << j.dump() << "\n";
}

// --- tei2md ---------------------------------------------------------------

int cmd_tei2md(const GlobalOpts& opts, const fs::path& tei_dir,
               const fs::path& out_dir) {
  std::vector<fs::path> inputs = sorted_files(tei_dir, ".xml");
  if (inputs.empty()) {
    std::cerr << "warning: no TEI files in " << tei_dir << "\n";
    return kExitOk;
  }
  fs::create_directories(out_dir);
  std::mutex io_mutex;
  std::atomic<int> failures{0};
  std::atomic<int> successes{0};
  parallel_for(inputs.size(), opts.workers, [&](std::size_t i) {
    const fs::path& path = inputs[i];
    try {
      edmark::tei::TeiDocument doc = edmark::tei::TeiDocument::load_file(path);
      edmark::tei::CiteStructure cs = edmark::tei::extract_cite_structure(doc);
      std::vector<edmark::markup::Block> blocks =
          edmark::tei::tei_to_markup(doc, cs);
      edmark::markup::PageDocument page;
      page.blocks = std::move(blocks);
      std::string stem = path.stem().string();
      std::lock_guard<std::mutex> lock(io_mutex);
      std::ofstream(out_dir / (stem + ".md"))
          << edmark::markup::serialize_markup(page) << "\n";
      std::ofstream(out_dir / (stem + ".cites.json"))
          << json(cs).dump(2) << "\n";
      ++successes;
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(io_mutex);
      std::cerr << "error: " << path.string() << ": " << e.what() << "\n";
      ++failures;
    }
  });
  std::cerr << "tei2md: " << successes << " converted, " << failures
            << " failed\n";
  return failures > 0 ? kExitFailure : kExitOk;
}

// --- render ---------------------------------------------------------------

std::string engine_command() {
  const char* env = std::getenv("EDMARK_ENGINE_CMD");
  return env != nullptr ? env : "pdflatex -interaction=nonstopmode";
}

std::string raster_command() {
  const char* env = std::getenv("EDMARK_RASTER_CMD");
  return env != nullptr ? env : "edmark-raster";
}

int cmd_render(const GlobalOpts& opts, const fs::path& markup_dir,
               const fs::path& out_dir, int n_configs, int dpi) {
  std::vector<fs::path> inputs = sorted_files(markup_dir, ".md");
  if (inputs.empty()) {
    std::cerr << "warning: no markup files in " << markup_dir << "\n";
    return kExitOk;
  }
  edmark::render::LayoutCatalog catalog =
      opts.catalog_path.empty()
          ? edmark::render::LayoutCatalog::builtin()
          : edmark::render::LayoutCatalog::load(opts.catalog_path);
  fs::create_directories(out_dir);

  struct Job {
    fs::path input;
    std::string jobname;
    std::uint64_t config_seed;
  };
  std::vector<Job> jobs;
  for (const fs::path& input : inputs) {
    std::string stem = input.stem().string();
    for (int c = 0; c < n_configs; ++c)
      jobs.push_back({input, stem + "-c" + std::to_string(c),
                      opts.seed ^ fnv1a(stem) ^ (0x9E37ull * (c + 1))});
  }

  std::mutex state_mutex;
  std::vector<edmark::corpus::ManifestRecord> manifest;
  std::atomic<int> failures{0};
  std::atomic<int> successes{0};
  parallel_for(jobs.size(), opts.workers, [&](std::size_t i) {
    const Job& job = jobs[i];
    try {
      edmark::markup::PageDocument doc =
          edmark::markup::parse_markup(slurp(job.input));
      edmark::render::LayoutConfig config =
          edmark::render::sample_layout(job.config_seed, catalog);
      edmark::render::RenderSources sources =
          edmark::render::emit_sources(doc.blocks, config);
      edmark::render::RasterJob raster;
      raster.workdir = out_dir;
      raster.engine_cmd = engine_command();
      raster.raster_cmd = raster_command();
      raster.dpi = dpi;
      raster.dry_run = opts.dry_run;
      edmark::render::RasterResult result =
          edmark::render::compile_and_rasterize(sources, job.jobname, raster);
      std::lock_guard<std::mutex> lock(state_mutex);
      std::string work_id = job.input.stem().string();
      for (std::size_t p = 0; p < result.page_images.size(); ++p) {
        edmark::corpus::ManifestRecord rec;
        rec.work_id = work_id;
        rec.page_no = static_cast<int>(p) + 1;
        rec.image_path = result.page_images[p].string();
        rec.split = edmark::corpus::Split::Train;
        rec.source = edmark::corpus::Source::Synthetic;
        manifest.push_back(std::move(rec));
      }
      ++successes;
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(state_mutex);
      std::cerr << "error: job " << job.jobname << ": " << e.what() << "\n";
      ++failures;
    }
  });
  if (!manifest.empty())
    edmark::corpus::write_manifest(out_dir / "manifest.jsonl", manifest);
  std::cerr << "render: " << successes << " jobs ok, " << failures
            << " failed\n";
  return successes > 0 ? kExitOk : kExitFailure;
}

// --- align ----------------------------------------------------------------

int cmd_align(const GlobalOpts& opts, const fs::path& span_file,
              const fs::path& target_file, const fs::path& out_dir) {
  edmark::render::SpanLog log = edmark::render::SpanLog::read_jsonl(span_file);
  std::vector<std::string> page_texts =
      edmark::align::page_texts_from_span_log(log, opts.include_notes);
  edmark::markup::PageDocument target =
      edmark::markup::parse_markup(slurp(target_file));

  edmark::align::Segmentation seg =
      edmark::align::segment_target(target.blocks, page_texts);

  std::vector<std::string> images;
  for (std::size_t i = 0; i < seg.chunks.size(); ++i)
    images.push_back(log.doc_id + "-page" + std::to_string(i + 1) + ".png");
  std::vector<std::string> texts(page_texts.begin(),
                                 page_texts.begin() +
                                     static_cast<std::ptrdiff_t>(seg.chunks.size()));
  std::vector<edmark::align::PagePair> pairs =
      edmark::align::build_pairs(seg.chunks, texts, images, opts.threshold);

  fs::create_directories(out_dir);
  std::vector<edmark::corpus::ManifestRecord> manifest;
  ordered_json drops = ordered_json::array();
  std::size_t retained = 0;
  for (const edmark::align::PagePair& pair : pairs) {
    if (pair.retained) {
      edmark::corpus::ManifestRecord rec;
      rec.work_id = log.doc_id;
      rec.page_no = pair.page_no;
      rec.image_path = pair.image_ref;
      rec.markup = pair.target_markup;
      rec.source = edmark::corpus::Source::Synthetic;
      manifest.push_back(std::move(rec));
      ++retained;
    } else {
      drops.push_back({{"page_no", pair.page_no},
                       {"similarity", pair.similarity}});
    }
  }
  edmark::corpus::write_manifest(out_dir / "pairs.jsonl", manifest);
  ordered_json report;
  report["doc_id"] = log.doc_id;
  report["pages"] = pairs.size();
  report["retained"] = retained;
  report["retention_rate"] =
      pairs.empty() ? 0.0 : static_cast<double>(retained) / pairs.size();
  report["threshold"] = opts.threshold;
  report["dropped"] = drops;
  std::ofstream(out_dir / "drop_report.json") << report.dump(2) << "\n";
  emit_json(opts, report);
  std::cerr << "align: " << retained << "/" << pairs.size()
            << " pages retained\n";
  return seg.trace.page_count_mismatch ? kExitPartial : kExitOk;
}

// --- eval -----------------------------------------------------------------

fs::path hypothesis_path(const fs::path& hyp_dir,
                         const edmark::corpus::ManifestRecord& rec) {
  std::string base = rec.work_id + "_p" + std::to_string(rec.page_no);
  for (const char* ext : {".md", ".txt"}) {
    fs::path p = hyp_dir / (base + ext);
    if (fs::exists(p)) return p;
  }
  return {};
}

int cmd_eval(const GlobalOpts& opts, const fs::path& ref_manifest,
             const fs::path& hyp_dir, const fs::path& report_path,
             const fs::path& csv_path) {
  std::vector<edmark::corpus::ManifestRecord> records =
      edmark::corpus::read_manifest(ref_manifest);
  if (records.empty()) {
    std::cerr << "error: empty reference manifest\n";
    return kExitFailure;
  }

  std::vector<edmark::metrics::PageRecord> page_records(records.size());
  std::mutex io_mutex;
  edmark::metrics::EvalOptions eval_opts;
  eval_opts.include_notes = opts.include_notes;
  parallel_for(records.size(), opts.workers, [&](std::size_t i) {
    const edmark::corpus::ManifestRecord& rec = records[i];
    edmark::markup::PageDocument ref = edmark::markup::parse_markup(rec.markup);
    ref.work_id = rec.work_id;
    ref.page_no = rec.page_no;
    std::string hyp_text;
    fs::path hyp = hypothesis_path(hyp_dir, rec);
    if (hyp.empty()) {
      std::lock_guard<std::mutex> lock(io_mutex);
      std::cerr << "warning: missing hypothesis for " << rec.work_id << " p"
                << rec.page_no << ", scoring as empty\n";
    } else {
      hyp_text = slurp(hyp);
    }
    page_records[i] = edmark::metrics::evaluate_page(ref, hyp_text, eval_opts);
  });

  edmark::metrics::EvalReport report = edmark::metrics::aggregate(page_records);
  ordered_json j = edmark::metrics::report_to_json(report);
  if (!report_path.empty()) std::ofstream(report_path) << j.dump(2) << "\n";
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    csv << "work_id,page_no,cer,wer,csub,cins,cdel,wsub,wins,wdel,"
           "ref_lcs,ref_ref,ref_hyp,note_lcs,note_ref,note_hyp,"
           "hdr_ref,hdr_hyp,tab_should,tab_pred\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = page_records[i];
      csv << records[i].work_id << "," << records[i].page_no << "," << r.cer
          << "," << r.wer << "," << r.char_ops.substitutions << ","
          << r.char_ops.insertions << "," << r.char_ops.deletions << ","
          << r.word_ops.substitutions << "," << r.word_ops.insertions << ","
          << r.word_ops.deletions << "," << r.ref_lcs << "," << r.ref_ref_count
          << "," << r.hyp_ref_count << "," << r.note_lcs << ","
          << r.ref_note_count << "," << r.hyp_note_count << ","
          << r.header_ref_count << "," << r.header_hyp_count << ",";
      if (r.tab)
        csv << (r.tab->should_tab ? 1 : 0) << "," << (r.tab->predicted_tab ? 1 : 0);
      else
        csv << ",";
      csv << "\n";
    }
  }
  emit_json(opts, j);
  if (!opts.json_out)
    std::cout << "pages=" << report.n_pages << " cer_med=" << report.cer_median
              << " cer_mean=" << report.cer_mean
              << " wer_med=" << report.wer_median << "\n";
  return kExitOk;
}

// --- stats / classify / merge ---------------------------------------------

int cmd_stats(const GlobalOpts& opts, const fs::path& manifest_path,
              const fs::path& out_path) {
  std::vector<edmark::corpus::ManifestRecord> records =
      edmark::corpus::read_manifest(manifest_path);
  edmark::corpus::CorpusStats stats = edmark::corpus::corpus_stats(records);
  ordered_json j;
  j["pages"] = stats.pages;
  j["words_med"] = stats.words_median;
  j["pct_ref"] = stats.pct_ref;
  j["pct_note"] = stats.pct_note;
  j["pct_heading"] = stats.pct_heading;
  if (!out_path.empty()) std::ofstream(out_path) << j.dump(2) << "\n";
  std::cout << j.dump() << "\n";
  (void)opts;
  return kExitOk;
}

std::map<std::string, std::vector<edmark::markup::PageDocument>>
pages_by_work(const std::vector<edmark::corpus::ManifestRecord>& records) {
  std::vector<edmark::corpus::ManifestRecord> sorted = records;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) {
                     return std::tie(a.work_id, a.page_no) <
                            std::tie(b.work_id, b.page_no);
                   });
  std::map<std::string, std::vector<edmark::markup::PageDocument>> works;
  for (const auto& rec : sorted) {
    edmark::markup::PageDocument doc = edmark::markup::parse_markup(rec.markup);
    doc.work_id = rec.work_id;
    doc.page_no = rec.page_no;
    works[rec.work_id].push_back(std::move(doc));
  }
  return works;
}

int cmd_classify(const GlobalOpts&, const fs::path& manifest_path,
                 const fs::path& out_path) {
  auto works = pages_by_work(edmark::corpus::read_manifest(manifest_path));
  ordered_json j;
  for (const auto& [work_id, pages] : works)
    j[work_id] = std::string(edmark::corpus::ref_system_name(
        edmark::corpus::classify_reference_system(pages)));
  if (!out_path.empty()) std::ofstream(out_path) << j.dump(2) << "\n";
  std::cout << j.dump() << "\n";
  return kExitOk;
}

int cmd_merge(const GlobalOpts&, const fs::path& manifest_path,
              const fs::path& out_path) {
  auto works = pages_by_work(edmark::corpus::read_manifest(manifest_path));
  ordered_json j;
  for (const auto& [work_id, pages] : works) {
    edmark::markup::PageDocument merged;
    merged.blocks = edmark::corpus::merge_document(pages);
    j[work_id] = edmark::markup::serialize_markup(merged);
  }
  if (!out_path.empty()) std::ofstream(out_path) << j.dump(2) << "\n";
  std::cout << j.dump() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structure-aware OCR corpus construction and evaluation"};
  app.require_subcommand(1);

  GlobalOpts opts;
  opts.workers = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--seed", opts.seed, "seed for all randomized choices");
  app.add_option("--threshold", opts.threshold, "retention similarity threshold")
      ->check(CLI::Range(0.0, 1.0));
  app.add_flag("--include-notes,!--no-include-notes", opts.include_notes,
               "include <note> text in plain-text scoring (default on)");
  app.add_flag("--dry-run", opts.dry_run, "write sources, skip subprocesses");
  app.add_option("--workers", opts.workers, "worker pool size")
      ->check(CLI::PositiveNumber);
  app.add_flag("--json", opts.json_out, "machine-readable JSON on stdout");
  app.add_option("--catalog", opts.catalog_path, "layout catalog JSON file");

  std::string in_a, in_b, out_path, report_path, csv_path;
  int n_configs = 1, dpi = 300;

  CLI::App* tei2md = app.add_subcommand("tei2md", "convert TEI/XML to markup");
  tei2md->add_option("tei_dir", in_a)->required();
  tei2md->add_option("out_dir", in_b)->required();

  CLI::App* render = app.add_subcommand("render", "render markup to page images");
  render->add_option("markup_dir", in_a)->required();
  render->add_option("out_dir", in_b)->required();
  render->add_option("--configs", n_configs, "layout configurations per document")
      ->check(CLI::PositiveNumber);
  render->add_option("--dpi", dpi, "rasterization dpi");

  CLI::App* align = app.add_subcommand("align", "segment target against page spans");
  align->add_option("spans", in_a)->required();
  align->add_option("target", in_b)->required();
  align->add_option("--out", out_path, "output directory")->required();

  CLI::App* eval = app.add_subcommand("eval", "score hypotheses against a manifest");
  eval->add_option("ref_manifest", in_a)->required();
  eval->add_option("hyp_dir", in_b)->required();
  eval->add_option("--report", report_path, "EvalReport JSON output path");
  eval->add_option("--csv", csv_path, "per-page CSV output path");

  CLI::App* stats = app.add_subcommand("stats", "corpus statistics");
  stats->add_option("manifest", in_a)->required();
  stats->add_option("--out", out_path);

  CLI::App* classify =
      app.add_subcommand("classify", "reference-system classification per work");
  classify->add_option("manifest", in_a)->required();
  classify->add_option("--out", out_path);

  CLI::App* merge = app.add_subcommand("merge", "cross-page document reconstruction");
  merge->add_option("manifest", in_a)->required();
  merge->add_option("--out", out_path);

  CLI11_PARSE(app, argc, argv);

  try {
    if (tei2md->parsed()) return cmd_tei2md(opts, in_a, in_b);
    if (render->parsed()) return cmd_render(opts, in_a, in_b, n_configs, dpi);
    if (align->parsed()) return cmd_align(opts, in_a, in_b, out_path);
    if (eval->parsed()) return cmd_eval(opts, in_a, in_b, report_path, csv_path);
    if (stats->parsed()) return cmd_stats(opts, in_a, out_path);
    if (classify->parsed()) return cmd_classify(opts, in_a, out_path);
    if (merge->parsed()) return cmd_merge(opts, in_a, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
