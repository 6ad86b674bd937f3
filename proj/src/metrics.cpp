#include "umt/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "umt/core/error.hpp"

namespace umt::eval {

std::string MetricReport::to_json() const {
  nlohmann::ordered_json j;
  j["sen_acc"] = sen_acc;
  j["ned"] = ned;
  j["seq_acc"] = seq_acc;
  j["fid"] = fid;
  j["edge_iou"] = edge_iou;
  j["region_preserve"] = region_preserve;
  j["n_lines"] = n_lines;
  j["n_images"] = n_images;
  return j.dump(2);
}

MetricReport MetricReport::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  MetricReport r;
  r.sen_acc = j.at("sen_acc").get<double>();
  r.ned = j.at("ned").get<double>();
  r.seq_acc = j.at("seq_acc").get<double>();
  r.fid = j.at("fid").get<double>();
  r.edge_iou = j.at("edge_iou").get<double>();
  r.region_preserve = j.at("region_preserve").get<double>();
  r.n_lines = j.at("n_lines").get<int>();
  r.n_images = j.at("n_images").get<int>();
  return r;
}

double metric_ned(const std::string& pred, const std::string& gt) {
  const std::size_t n = pred.size(), m = gt.size();
  if (n == 0 && m == 0) return 1.0;
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (pred[i - 1] != gt[j - 1]);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return 1.0 - double(prev[m]) / double(std::max(n, m));
}

namespace {
double exact_match_fraction(const std::vector<std::string>& preds,
                            const std::vector<std::string>& gts,
                            const char* who) {
  if (preds.size() != gts.size())
    throw ShapeError(std::string(who) + ": list lengths differ");
  if (preds.empty()) return 1.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hit += preds[i] == gts[i];
  return double(hit) / double(preds.size());
}
}  // namespace

double metric_senacc(const std::vector<std::string>& preds,
                     const std::vector<std::string>& gts) {
  return exact_match_fraction(preds, gts, "metric_senacc");
}

double metric_seqacc(const std::vector<std::string>& preds,
                     const std::vector<std::string>& gts) {
  return exact_match_fraction(preds, gts, "metric_seqacc");
}

namespace {
Image masked(const Image& img, const Image& mask) {
  Image out = img;
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x)
      for (int c = 0; c < img.c; ++c) out.at(y, x, c) *= mask.at(y, x, 0);
  return out;
}

void require_image_pair(const Image& a, const Image& b, const Image& mask,
                        const char* who) {
  if (a.h != b.h || a.w != b.w || a.c != b.c)
    throw ShapeError(std::string(who) + ": image shapes differ");
  if (mask.h != a.h || mask.w != a.w || mask.c != 1)
    throw ShapeError(std::string(who) + ": mask must be (H,W,1)");
}
}  // namespace

double metric_edge_iou(const Image& gen, const Image& gt, const Image& mask,
                       const loss::CannyParams& p) {
  require_image_pair(gen, gt, mask, "metric_edge_iou");
  const nn::Tensor ea = loss::canny(masked(gen, mask), p);
  const nn::Tensor eb = loss::canny(masked(gt, mask), p);
  double inter = 0.0, uni = 0.0;
  for (std::size_t i = 0; i < ea.numel(); ++i) {
    inter += ea.data[i] * eb.data[i];
    uni += (ea.data[i] != 0.0 || eb.data[i] != 0.0) ? 1.0 : 0.0;
  }
  return uni == 0.0 ? 1.0 : inter / uni;
}

double metric_region_preserve(const Image& gen, const Image& src,
                              const Image& mask) {
  require_image_pair(gen, src, mask, "metric_region_preserve");
  double sum = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < gen.h; ++y)
    for (int x = 0; x < gen.w; ++x) {
      if (mask.at(y, x, 0) != 0.0) continue;
      for (int c = 0; c < gen.c; ++c) {
        sum += std::abs(gen.at(y, x, c) - src.at(y, x, c));
        ++count;
      }
    }
  return count == 0 ? 0.0 : sum / double(count);
}

}  // namespace umt::eval
