#include "edmark/align.hpp"

#include "edmark/unicode.hpp"

#include <algorithm>
#include <cmath>

namespace edmark::align {

namespace {

std::size_t edit_distance(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t diag = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({diag, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double similarity_u32(std::u32string_view a, std::u32string_view b) {
  std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(edit_distance(a, b)) / longest;
}

// Normalized stripped text of one block, notes included (extraction keeps
// visible note text).
std::string block_plain(const markup::Block& block) {
  markup::PageDocument one;
  one.blocks.push_back(block);
  return markup::normalize_text(markup::strip_markup(one).plain);
}

}  // namespace

double similarity(std::string_view a, std::string_view b) {
  return similarity_u32(uni::to_utf32(a), uni::to_utf32(b));
}

Segmentation segment_target(const std::vector<markup::Block>& target,
                            const std::vector<std::string>& page_texts,
                            const SegmentationParams& params) {
  const std::size_t n_blocks = target.size();

  // Stripped+normalized target with per-block start offsets; block k starts
  // at start[k], start[n_blocks] is the total length.
  std::u32string stripped;
  std::vector<std::size_t> start(n_blocks + 1, 0);
  for (std::size_t i = 0; i < n_blocks; ++i) {
    std::u32string norm = uni::to_utf32(block_plain(target[i]));
    if (!norm.empty() && !stripped.empty()) stripped.push_back(U' ');
    start[i] = stripped.size();
    stripped += norm;
  }
  start[n_blocks] = stripped.size();

  Segmentation seg;
  std::size_t cursor = 0;      // offset into stripped (pre-snap)
  std::size_t block_cursor = 0;  // first block of the next chunk

  for (std::size_t page = 0; page < page_texts.size(); ++page) {
    if (block_cursor >= n_blocks) {
      seg.trace.page_count_mismatch = true;  // pages remain, target exhausted
      break;
    }
    std::u32string p = uni::to_utf32(markup::normalize_text(page_texts[page]));
    const std::size_t len = p.size();
    const std::size_t slen = std::min(params.suffix_len, len);
    std::u32string_view suffix =
        std::u32string_view(p).substr(len - slen, slen);

    const std::size_t expected = std::min(cursor + len, stripped.size());
    const std::size_t half_window = std::max(
        params.min_window,
        static_cast<std::size_t>(std::ceil(params.window_frac * len)));

    std::size_t lo = std::max(cursor + slen,
                              expected > half_window ? expected - half_window
                                                     : std::size_t{0});
    std::size_t hi = std::min(stripped.size(), expected + half_window);

    double best_sim = -1.0;
    std::size_t best_end = expected;
    for (std::size_t end = lo; end <= hi && slen > 0; ++end) {
      double sim = similarity_u32(
          suffix, std::u32string_view(stripped).substr(end - slen, slen));
      if (sim > best_sim) {
        best_sim = sim;
        best_end = end;
      }
    }

    std::size_t split;
    SplitMethod method;
    if (best_sim >= params.accept_threshold) {
      split = best_end;
      method = SplitMethod::TailMatch;
    } else {
      split = expected;
      method = SplitMethod::LengthFallback;
    }
    cursor = split;

    // Snap to the nearest block boundary; at least one block per chunk.
    std::size_t best_block = block_cursor + 1;
    std::size_t best_dist = static_cast<std::size_t>(-1);
    for (std::size_t k = block_cursor + 1; k <= n_blocks; ++k) {
      std::size_t d = start[k] > split ? start[k] - split : split - start[k];
      if (d < best_dist) {
        best_dist = d;
        best_block = k;
      }
    }

    markup::PageDocument chunk;
    chunk.blocks.assign(target.begin() + static_cast<std::ptrdiff_t>(block_cursor),
                        target.begin() + static_cast<std::ptrdiff_t>(best_block));
    seg.chunks.push_back(markup::serialize_markup(chunk));
    seg.trace.offsets.push_back(start[best_block]);
    seg.trace.methods.push_back(method);
    block_cursor = best_block;
  }

  if (block_cursor < n_blocks) seg.trace.page_count_mismatch = true;
  return seg;
}

std::vector<PagePair> build_pairs(const std::vector<std::string>& chunks,
                                  const std::vector<std::string>& page_texts,
                                  const std::vector<std::string>& images,
                                  double threshold) {
  if (chunks.size() != page_texts.size() || chunks.size() != images.size())
    throw LengthMismatchError("build_pairs: chunks/pages/images differ in length");
  std::vector<PagePair> pairs;
  pairs.reserve(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    PagePair pair;
    pair.page_no = static_cast<int>(i) + 1;
    pair.image_ref = images[i];
    pair.target_markup = chunks[i];
    pair.extracted_text = page_texts[i];
    markup::PageDocument doc = markup::parse_markup(chunks[i]);
    pair.similarity =
        similarity(markup::normalize_text(markup::strip_markup(doc).plain),
                   markup::normalize_text(page_texts[i]));
    pair.retained = pair.similarity >= threshold;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<std::string> page_texts_from_span_log(const render::SpanLog& log,
                                                  bool include_notes) {
  int max_page = 0;
  for (const render::ColoredSpan& s : log.spans)
    max_page = std::max(max_page, s.page);
  std::vector<std::string> pages(static_cast<std::size_t>(max_page));
  for (const render::ColoredSpan& s : log.spans) {
    bool content = s.channel == render::Channel::Main ||
                   s.channel == render::Channel::Heading ||
                   s.channel == render::Channel::Ref ||
                   (include_notes && s.channel == render::Channel::Note);
    if (!content || s.page < 1) continue;
    pages[static_cast<std::size_t>(s.page) - 1] += s.text;
  }
  return pages;
}

}  // namespace edmark::align
