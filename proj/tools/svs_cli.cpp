// svs: corpus generation, training, synthesis, MPI reconstruction and
// rendering, evaluation and the ablation harness.

#include <CLI11.hpp>
#include <iostream>

#include "svs/cli/commands.hpp"

using namespace svs;
using namespace svs::cli;

int main(int argc, char** argv) {
  CLI::App app{"Single-view view synthesis: pseudo-stereo rectification and MPI rendering"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 0;
  GlobalOptions opts;
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "overrides corpus.seed and train.seed");
  app.add_option("--jobs", opts.jobs, "parallel scenes / images")->check(CLI::PositiveNumber);
  app.add_flag("--force", opts.force, "replace existing outputs");

  auto* generate = app.add_subcommand("generate", "write the synthetic corpus to corpus.path");
  auto* train = app.add_subcommand("train", "train f_W and f_B on the corpus");

  SynthesizeArgs synth;
  std::string synth_gt, variant = "complete";
  auto* synthesize = app.add_subcommand("synthesize", "pseudo right view from a left image");
  synthesize->add_option("--input", synth.input, "left image")->required();
  synthesize->add_option("--out", synth.out, "output directory")->required();
  synthesize->add_option("--ground-truth", synth_gt, "true right view; enables metrics.txt");
  synthesize->add_option("--variant", variant, "baseline | pruning-only | bidirectional-only | complete");

  ReconstructArgs recon;
  std::string recon_right;
  auto* reconstruct = app.add_subcommand("reconstruct", "MPI from a left image (and optionally its right view)");
  reconstruct->add_option("--left", recon.left, "left image")->required();
  reconstruct->add_option("--right", recon_right, "right view; synthesized when absent");
  reconstruct->add_option("--out", recon.out, "output directory")->required();

  RenderArgs render_args;
  std::string poses;
  auto* render = app.add_subcommand("render", "render novel views from a saved MPI");
  render->add_option("--mpi", render_args.mpi_dir, "MPI directory")->required();
  render->add_option("--poses", poses, "pose file, one 'R(9) t(3)' line per view");
  render->add_option("--out", render_args.out, "output directory")->required();

  std::string predictions, ground_truth, eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "PSNR / SSIM after the border crop");
  evaluate->add_option("--predictions", predictions, "image or directory")->required();
  evaluate->add_option("--ground-truth", ground_truth, "image or directory")->required();
  evaluate->add_option("--out", eval_out, "metrics file");

  std::string ablate_out;
  auto* ablate = app.add_subcommand("ablate", "variant and pruning-sweep table on the corpus");
  ablate->add_option("--out", ablate_out, "table file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kValidationFailure;
  }

  try {
    RunConfig cfg = config_path.empty() ? default_config() : load_config(config_path);
    if (*seed_opt) opts.seed = seed;
    cfg = apply_overrides(cfg, opts);

    if (*generate) {
      cmd_generate(cfg, opts, std::cout);
    } else if (*train) {
      cmd_train(cfg, opts, std::cout);
    } else if (*synthesize) {
      if (!synth_gt.empty()) synth.ground_truth = synth_gt;
      try {
        synth.variant = stereosynth::parse_variant(variant);
      } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
      }
      cmd_synthesize(cfg, opts, synth, std::cout);
    } else if (*reconstruct) {
      if (!recon_right.empty()) recon.right = recon_right;
      cmd_reconstruct(cfg, opts, recon, std::cout);
    } else if (*render) {
      if (!poses.empty()) render_args.poses = poses;
      cmd_render(cfg, opts, render_args, std::cout);
    } else if (*evaluate) {
      cmd_evaluate(cfg, opts, predictions, ground_truth,
                   eval_out.empty() ? std::nullopt : std::optional<std::filesystem::path>(eval_out), std::cout);
    } else if (*ablate) {
      cmd_ablate(cfg, opts, ablate_out.empty() ? std::nullopt : std::optional<std::filesystem::path>(ablate_out),
                 std::cout);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const OrderingFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOrderingFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kSuccess;
}
