// Microbenchmarks for the hot paths: edit-distance alignment, LCS scoring,
// text normalization, and page segmentation.

#include "edmark/align.hpp"
#include "edmark/markup.hpp"
#include "edmark/metrics.hpp"

#include <benchmark/benchmark.h>

#include <cstdint>
#include <string>
#include <vector>

using namespace edmark;

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

const std::vector<std::string>& alphabet() {
  static const std::vector<std::string> a = {
      "α", "β", "γ", "δ", "ε", "ἀ", "ἁ", "ά", "ὰ", "ᾳ", "ἐ", "ή",
      "ῆ", "ῃ", "ἰ", "ί", "ὀ", "ό", "ὐ", "ύ", "ὠ", "ώ", "ῶ", "ῳ", " "};
  return a;
}

std::string random_text(std::uint64_t seed, std::size_t len) {
  std::string out;
  const auto& a = alphabet();
  for (std::size_t i = 0; i < len; ++i) out += a[splitmix64(seed) % a.size()];
  return out;
}

void BM_levenshtein_align(benchmark::State& state) {
  std::size_t len = static_cast<std::size_t>(state.range(0));
  std::vector<std::string> ref = metrics::char_units(random_text(1, len));
  std::vector<std::string> hyp = metrics::char_units(random_text(2, len));
  for (auto _ : state)
    benchmark::DoNotOptimize(metrics::levenshtein_align(ref, hyp));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_levenshtein_align)->Range(64, 4096)->Complexity();

void BM_lcs_f1(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 3;
  std::vector<std::string> ref, hyp;
  for (std::size_t i = 0; i < n; ++i) {
    ref.push_back(std::to_string(splitmix64(seed) % 50));
    hyp.push_back(std::to_string(splitmix64(seed) % 50));
  }
  for (auto _ : state) benchmark::DoNotOptimize(metrics::lcs_f1(ref, hyp));
}
BENCHMARK(BM_lcs_f1)->Range(8, 512);

void BM_normalize_text(benchmark::State& state) {
  std::string text = random_text(4, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(markup::normalize_text(text));
}
BENCHMARK(BM_normalize_text)->Range(256, 16384);

void BM_segment_target(benchmark::State& state) {
  std::size_t n_pages = static_cast<std::size_t>(state.range(0));
  std::vector<markup::Block> blocks;
  std::vector<std::string> pages;
  for (std::size_t p = 0; p < n_pages; ++p) {
    std::string page;
    for (int b = 0; b < 3; ++b) {
      markup::Block blk;
      blk.tab = !blocks.empty();
      std::string text = markup::normalize_text(
          random_text(100 + p * 3 + static_cast<std::size_t>(b), 160));
      blk.segments = {{markup::SegmentKind::PlainText, text}};
      blocks.push_back(blk);
      if (!page.empty()) page += " ";
      page += text;
    }
    pages.push_back(page);
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(align::segment_target(blocks, pages));
}
BENCHMARK(BM_segment_target)->Range(2, 64);

}  // namespace

BENCHMARK_MAIN();
