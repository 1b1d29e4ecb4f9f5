#include "svs/stereosynth/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "svs/imagecore/ops.hpp"

namespace svs::stereosynth {

using imagecore::BinaryMask;
using imagecore::ConfidenceMap;
using imagecore::Image;

std::string to_string(Variant v) {
  switch (v) {
    case Variant::baseline: return "baseline";
    case Variant::pruning_only: return "pruning-only";
    case Variant::bidirectional_only: return "bidirectional-only";
    case Variant::complete: return "complete";
  }
  throw std::invalid_argument("unknown variant");
}

Variant parse_variant(const std::string& s) {
  for (auto v : {Variant::baseline, Variant::pruning_only, Variant::bidirectional_only, Variant::complete})
    if (to_string(v) == s) return v;
  throw std::invalid_argument("unknown variant '" + s +
                              "' (expected baseline, pruning-only, bidirectional-only or complete)");
}

StereoResult synthesize(const Image& left, const tinynet::FlowNet& f_w, const tinynet::FlowNet& f_b,
                        const RectifierConfig& cfg, Variant variant) {
  cfg.validate();
  const int h = left.height(), w = left.width();
  const bool use_p = variant == Variant::pruning_only || variant == Variant::complete;
  const bool use_b = variant == Variant::bidirectional_only || variant == Variant::complete;

  StereoResult r;
  auto pr = pruning_confidence(f_w, left, use_p ? cfg.prune_fraction : 0.0, cfg.per_layer_pruning);
  r.flow_w = std::move(pr.flow);
  r.warped = std::move(pr.warped);
  r.pruned = std::move(pr.pruned);
  r.delta_p = std::move(pr.delta_p);

  if (use_b) {
    auto br = bidirectional_confidence(f_b, r.warped, left);
    r.flow_b = std::move(br.flow);
    r.backwarped_left = std::move(br.backwarped_left);
    r.delta_b = std::move(br.delta_b);
  } else {
    r.flow_b = imagecore::FlowField(h, w, 0.0f);
    r.backwarped_left = left;
    r.delta_b = ConfidenceMap(h, w, 0.0f);
  }

  if (variant == Variant::baseline) {
    r.mask = BinaryMask(h, w, 0);
  } else {
    r.mask = fuse_masks(r.delta_p, r.delta_b, cfg.fusion_threshold);
    if (cfg.close_mask) r.mask = close_mask(r.mask);
  }
  const bool any = std::any_of(r.mask.values().begin(), r.mask.values().end(), [](auto v) { return v != 0; });
  r.final = any ? inpaint(r.warped, r.mask, {}, &r.inpaint) : r.warped;
  return r;
}

const AblationRow& AblationReport::row(const std::string& name) const {
  for (const auto& r : rows)
    if (r.name == name) return r;
  throw std::out_of_range("no ablation row '" + name + "'");
}

AblationReport run_ablation(const std::vector<scenegen::StereoSample>& scenes, const tinynet::FlowNet& f_w,
                            const tinynet::FlowNet& f_b, const RectifierConfig& cfg, double crop,
                            const std::vector<double>& fractions, int jobs) {
  if (scenes.empty()) throw std::invalid_argument("ablation needs at least one scene");
  struct Job {
    std::string name;
    Variant variant;
    double p;
  };
  std::vector<Job> jobs_list;
  for (auto v : {Variant::baseline, Variant::pruning_only, Variant::bidirectional_only, Variant::complete})
    jobs_list.push_back({to_string(v), v, cfg.prune_fraction});
  for (double p : fractions) {
    char name[32];
    std::snprintf(name, sizeof name, "complete@p=%.1f", p);
    jobs_list.push_back({name, Variant::complete, p});
  }

  const std::size_t n = scenes.size();
  std::vector<double> psnr(jobs_list.size() * n), ssim(jobs_list.size() * n);
  const long total = long(jobs_list.size() * n);
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs))
  for (long k = 0; k < total; ++k) {
    const auto& job = jobs_list[std::size_t(k) / n];
    const auto& s = scenes[std::size_t(k) % n];
    RectifierConfig c = cfg;
    c.prune_fraction = job.p;
    const auto out = synthesize(s.left, f_w, f_b, c, job.variant);
    const auto a = imagecore::crop_border(out.final, crop), b = imagecore::crop_border(s.right, crop);
    psnr[std::size_t(k)] = imagecore::psnr(a, b);
    ssim[std::size_t(k)] = imagecore::ssim(a, b);
  }

  AblationReport rep;
  for (std::size_t j = 0; j < jobs_list.size(); ++j) {
    AblationRow row{jobs_list[j].name, jobs_list[j].variant, jobs_list[j].p, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      row.psnr += psnr[j * n + i] / double(n);
      row.ssim += ssim[j * n + i] / double(n);
    }
    rep.rows.push_back(row);
  }

  const auto& complete = rep.row("complete");
  if (!(complete.psnr > rep.row("baseline").psnr)) rep.violations.push_back("complete <= baseline");
  for (const char* single : {"pruning-only", "bidirectional-only"})
    if (!(complete.psnr >= rep.row(single).psnr)) rep.violations.push_back(std::string("complete < ") + single);
  rep.ordering_holds = rep.violations.empty();

  if (fractions.size() >= 3) {
    std::size_t best = 4;
    for (std::size_t j = 4; j < rep.rows.size(); ++j)
      if (rep.rows[j].psnr > rep.rows[best].psnr) best = j;
    rep.peak_at_edge = best == 4 || best + 1 == rep.rows.size();
  }
  return rep;
}

std::string format_ablation(const AblationReport& report) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof line, "%-20s %-20s %5s %9s %7s\n", "row", "variant", "p", "psnr", "ssim");
  out += line;
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%-20s %-20s %5.2f %9.4f %7.4f\n", r.name.c_str(), to_string(r.variant).c_str(),
                  r.prune_fraction, r.psnr, r.ssim);
    out += line;
  }
  return out;
}

}  // namespace svs::stereosynth
