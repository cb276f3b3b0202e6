#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// End-to-end tests of the command-line tool: each case invokes the installed
// binary (path injected by the build) in a scratch directory and checks exit
// codes and produced artifacts.

#include "edmark/corpus.hpp"
#include "edmark/markup.hpp"
#include "edmark/render.hpp"

#include <nlohmann/json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

#ifndef EDMARK_CLI_PATH
#error "EDMARK_CLI_PATH must be defined by the build"
#endif

namespace {

fs::path make_temp_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() /
                 ("edmark-cli-" + tag + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(EDMARK_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream(p) << content;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("cli: usage errors exit non-zero") {
  CHECK(run_cli("") != 0);
  CHECK(run_cli("no-such-command") != 0);
  CHECK(run_cli("--help") == 0);
}

TEST_CASE("cli tei2md: converts good files, reports bad ones") {
  fs::path dir = make_temp_dir("tei2md");
  fs::create_directories(dir / "tei");
  write_file(dir / "tei" / "good.xml",
             "<TEI><text><body><div n='1'><head>Κεφ.</head>"
             "<p>ἡ ἀρχή</p></div></body></text></TEI>");
  CHECK(run_cli("tei2md " + (dir / "tei").string() + " " +
                (dir / "out").string()) == 0);
  CHECK(fs::exists(dir / "out" / "good.md"));
  CHECK(fs::exists(dir / "out" / "good.cites.json"));
  std::string md = slurp(dir / "out" / "good.md");
  CHECK(md.find("# <ref>1</ref> Κεφ.") != std::string::npos);
  CHECK(md.find("<tab/>ἡ ἀρχή") != std::string::npos);

  // A malformed file makes the run fail overall but leaves good output.
  write_file(dir / "tei" / "bad.xml", "<TEI><unclosed>");
  CHECK(run_cli("tei2md " + (dir / "tei").string() + " " +
                (dir / "out2").string()) == 1);
  CHECK(fs::exists(dir / "out2" / "good.md"));
  CHECK_FALSE(fs::exists(dir / "out2" / "bad.md"));

  // Empty input directory: warning, success.
  fs::create_directories(dir / "empty");
  CHECK(run_cli("tei2md " + (dir / "empty").string() + " " +
                (dir / "out3").string()) == 0);
  fs::remove_all(dir);
}

TEST_CASE("cli render: dry run emits two sources per configuration") {
  fs::path dir = make_temp_dir("render");
  fs::create_directories(dir / "md");
  write_file(dir / "md" / "doc.md", "# Κεφ.\n<tab/>ἡ ἀρχή τοῦ λόγου");
  CHECK(run_cli("--dry-run --seed 11 render " + (dir / "md").string() + " " +
                (dir / "out").string() + " --configs 3") == 0);
  int tex = 0;
  for (const auto& e : fs::directory_iterator(dir / "out"))
    tex += e.path().extension() == ".tex";
  CHECK(tex == 6);  // 1 document x 3 configurations x {black, color}
  CHECK(fs::exists(dir / "out" / "doc-c0-black.tex"));
  CHECK(fs::exists(dir / "out" / "doc-c2-color.tex"));

  // Determinism: the same invocation reproduces identical sources.
  std::string before = slurp(dir / "out" / "doc-c1-color.tex");
  CHECK(run_cli("--dry-run --seed 11 render " + (dir / "md").string() + " " +
                (dir / "out").string() + " --configs 3") == 0);
  CHECK(slurp(dir / "out" / "doc-c1-color.tex") == before);
  fs::remove_all(dir);
}

namespace {

// Span log whose page texts exactly cover the target's blocks: pages of one
// Main span each, with the block-separator space appended.
void write_exact_spans(const fs::path& path,
                       const edmark::markup::PageDocument& target,
                       const std::vector<std::size_t>& page_sizes) {
  edmark::render::SpanLog log;
  std::size_t at = 0;
  for (std::size_t p = 0; p < page_sizes.size(); ++p) {
    std::string text;
    for (std::size_t i = 0; i < page_sizes[p]; ++i, ++at) {
      edmark::markup::PageDocument one;
      one.blocks = {target.blocks[at]};
      text += edmark::markup::strip_markup(one).plain;
      text += " ";
    }
    log.spans.push_back({static_cast<int>(p) + 1,
                         edmark::render::Channel::Main, text, std::nullopt});
  }
  log.write_jsonl(path);
}

}  // namespace

TEST_CASE("cli align: emits pairs manifest and drop report") {
  fs::path dir = make_temp_dir("align");
  std::string target_text =
      "πρῶτος στίχος τοῦ κειμένου μακρός ἐστι καὶ σαφής\n"
      "<tab/>δεύτερος στίχος ἕπεται τῷ πρώτῳ στίχῳ εὐθύς\n"
      "<tab/>τρίτος στίχος τελευταῖος πάντων ἐστὶν ἐνθάδε\n"
      "<tab/>τέταρτος στίχος περαίνει τὸ κείμενον ὅλον δή";
  write_file(dir / "work.md", target_text);
  edmark::markup::PageDocument target = edmark::markup::parse_markup(target_text);
  write_exact_spans(dir / "work.spans.jsonl", target, {2, 2});

  CHECK(run_cli("align " + (dir / "work.spans.jsonl").string() + " " +
                (dir / "work.md").string() + " --out " +
                (dir / "out").string()) == 0);
  auto pairs = edmark::corpus::read_manifest(dir / "out" / "pairs.jsonl");
  CHECK(pairs.size() == 2);
  for (const auto& rec : pairs) {
    CHECK(rec.work_id == "work");
    CHECK_NOTHROW(edmark::markup::parse_markup(rec.markup));
  }
  json report = json::parse(slurp(dir / "out" / "drop_report.json"));
  CHECK(report["pages"] == 2);
  CHECK(report["retained"] == 2);
  CHECK(report["retention_rate"] == 1.0);

  // An extra page beyond the target: partial output, exit 2.
  write_exact_spans(dir / "work.spans.jsonl", target, {2, 2});
  edmark::render::SpanLog log =
      edmark::render::SpanLog::read_jsonl(dir / "work.spans.jsonl");
  log.spans.push_back({3, edmark::render::Channel::Main,
                       "σελὶς περιττή τις ἄλλη", std::nullopt});
  log.write_jsonl(dir / "work.spans.jsonl");
  CHECK(run_cli("align " + (dir / "work.spans.jsonl").string() + " " +
                (dir / "work.md").string() + " --out " +
                (dir / "out2").string()) == 2);
  CHECK(fs::exists(dir / "out2" / "pairs.jsonl"));
  fs::remove_all(dir);
}

TEST_CASE("cli eval: scores a manifest, missing hypotheses count as empty") {
  fs::path dir = make_temp_dir("eval");
  std::vector<edmark::corpus::ManifestRecord> records;
  edmark::corpus::ManifestRecord r1;
  r1.work_id = "w";
  r1.page_no = 1;
  r1.markup = "# Κεφ.\n<tab/>ἡ ἀρχή";
  edmark::corpus::ManifestRecord r2 = r1;
  r2.page_no = 2;
  r2.markup = "τέλος";
  edmark::corpus::write_manifest(dir / "ref.jsonl", {r1, r2});

  fs::create_directories(dir / "hyp");
  write_file(dir / "hyp" / "w_p1.md", "# Κεφ.\n<tab/>ἡ ἀρχή");
  // w_p2 deliberately missing: scored as an empty hypothesis.

  CHECK(run_cli("eval " + (dir / "ref.jsonl").string() + " " +
                (dir / "hyp").string() + " --report " +
                (dir / "report.json").string() + " --csv " +
                (dir / "pages.csv").string()) == 0);
  json report = json::parse(slurp(dir / "report.json"));
  CHECK(report["n_pages"] == 2);
  // Page 1 perfect, page 2 fully deleted: median of {0, 100}.
  CHECK(report["cer_med"] == 50.0);
  CHECK(report["hdr_f1"] == 100.0);

  std::string csv = slurp(dir / "pages.csv");
  CHECK(csv.find("work_id,page_no,cer,") == 0);
  CHECK(csv.find("w,1,0") != std::string::npos);
  CHECK(csv.find("w,2,100") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cli stats, classify, merge") {
  fs::path dir = make_temp_dir("stats");
  edmark::corpus::ManifestRecord r1;
  r1.work_id = "w";
  r1.page_no = 1;
  r1.markup = "ἓν δύο τοῦ λό-";
  edmark::corpus::ManifestRecord r2 = r1;
  r2.page_no = 2;
  r2.markup = "γου <ref>1</ref> τρία";
  edmark::corpus::write_manifest(dir / "m.jsonl", {r1, r2});

  CHECK(run_cli("stats " + (dir / "m.jsonl").string() + " --out " +
                (dir / "stats.json").string()) == 0);
  json stats = json::parse(slurp(dir / "stats.json"));
  CHECK(stats["pages"] == 2);
  CHECK(stats["pct_ref"] == 50.0);

  CHECK(run_cli("classify " + (dir / "m.jsonl").string() + " --out " +
                (dir / "cls.json").string()) == 0);
  json cls = json::parse(slurp(dir / "cls.json"));
  CHECK(cls["w"] == "milestone");

  CHECK(run_cli("merge " + (dir / "m.jsonl").string() + " --out " +
                (dir / "merged.json").string()) == 0);
  json merged = json::parse(slurp(dir / "merged.json"));
  CHECK(merged["w"] == "ἓν δύο τοῦ λόγου <ref>1</ref> τρία");

  // Unreadable manifest: failure exit code.
  CHECK(run_cli("stats " + (dir / "missing.jsonl").string()) == 1);
  fs::remove_all(dir);
}
