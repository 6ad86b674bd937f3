#pragma once
#include <string>
#include <vector>

#include "umt/core/image.hpp"
#include "umt/loss/canny.hpp"

namespace umt::eval {

struct MetricReport {
  double sen_acc = 0.0, ned = 0.0, seq_acc = 0.0, fid = 0.0;
  double edge_iou = 0.0, region_preserve = 0.0;
  int n_lines = 0, n_images = 0;

  std::string to_json() const;
  static MetricReport from_json(const std::string& text);
};

/// 1 - Levenshtein(pred, gt) / max(|pred|, |gt|); two empty strings -> 1.
double metric_ned(const std::string& pred, const std::string& gt);

/// Fraction of positions with exact string equality.
double metric_senacc(const std::vector<std::string>& preds,
                     const std::vector<std::string>& gts);
/// Same formula at word scale; lines here are single words.
double metric_seqacc(const std::vector<std::string>& preds,
                     const std::vector<std::string>& gts);

/// IoU of canny(gen * mask) and canny(gt * mask) luminances; two empty edge
/// maps -> 1.
double metric_edge_iou(const Image& gen, const Image& gt, const Image& mask,
                       const loss::CannyParams& p = {});

/// Mean absolute difference over pixels where mask == 0; a mask of all ones
/// (nothing preserved) -> 0 by convention.
double metric_region_preserve(const Image& gen, const Image& src,
                              const Image& mask);

}  // namespace umt::eval
