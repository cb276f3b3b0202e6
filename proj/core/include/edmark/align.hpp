#pragma once

#include "edmark/markup.hpp"
#include "edmark/render.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Page segmentation of document-level targets and the similarity retention
// gate applied to (image, target) pairs.
namespace edmark::align {

// 1 - dist(a, b) / max(|a|, |b|) over codepoints; both empty -> 1.0.
double similarity(std::string_view a, std::string_view b);

struct SegmentationParams {
  std::size_t suffix_len = 40;    // tail of the page text used for matching
  std::size_t min_window = 64;    // search half-width floor, in characters
  double window_frac = 0.2;       // half-width as a fraction of page length
  double accept_threshold = 0.8;  // tail-match acceptance similarity
};

enum class SplitMethod { TailMatch, LengthFallback };

struct SegmentationTrace {
  // Snapped split offsets into the normalized stripped target, one per page,
  // strictly increasing; the last equals the stripped length when all pages
  // were consumed.
  std::vector<std::size_t> offsets;
  std::vector<SplitMethod> methods;
  bool page_count_mismatch = false;
};

struct Segmentation {
  std::vector<std::string> chunks;  // valid markup, one per page
  SegmentationTrace trace;
};

// Walks the stripped target with a cursor; each page boundary is located by
// matching the page's tail inside a window around the expected position,
// falling back to a pure length split, then snapped to the nearest block
// boundary so every chunk stays parseable.
Segmentation segment_target(const std::vector<markup::Block>& target,
                            const std::vector<std::string>& page_texts,
                            const SegmentationParams& params = {});

struct PagePair {
  int page_no = 1;
  std::string image_ref;
  std::string target_markup;
  std::string extracted_text;
  double similarity = 0;
  bool retained = false;
};

class LengthMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<PagePair> build_pairs(const std::vector<std::string>& chunks,
                                  const std::vector<std::string>& page_texts,
                                  const std::vector<std::string>& images,
                                  double threshold = 0.99);

// Concatenates content-channel span texts per page (artifact channels --
// footer, running head, line numbers -- excluded). Pages come back in page
// order, index 0 = page 1.
std::vector<std::string> page_texts_from_span_log(const render::SpanLog& log,
                                                  bool include_notes = true);

}  // namespace edmark::align
