#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "svs/cli/commands.hpp"
#include "svs/imagecore/io.hpp"
#include "svs/imagecore/ops.hpp"
#include "svs/tinynet/train_utils.hpp"

using namespace svs;
using namespace svs::cli;
using imagecore::Image;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("svs_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args, const fs::path& cwd) {
  const std::string cmd = "cd '" + cwd.string() + "' && '" SVS_CLI_PATH "' " + args + " > cli.out 2> cli.err";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kSmallConfig =
    "[corpus]\npath = corpus\nn_scenes = 8\nwidth = 64\nheight = 32\n"
    "mix = flat:1,layered:2,thin-structures:1\n"
    "[train]\ncheckpoint_dir = ckpt\n";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config round trip and validation") {
    RunConfig c = default_config();
    c.corpus_path = "/data/corpus";
    c.n_scenes = 7;
    c.corpus_seed = 12345678901ULL;
    c.mix = {1.0 / 3.0, 0.1, 2.0};
    c.baseline = 0.3;
    c.rectifier.prune_fraction = 0.3;
    c.rectifier.fusion_threshold = 0.123456789012345;
    c.rectifier.close_mask = false;
    c.mpi.planes = 16;
    c.mpi.temperature = 1e-3;
    c.train.arch = tinynet::Architecture::parse("widths=6,8,8,8 slope=0.2").describe();
    c.train.lr = 3e-4;
    c.train.blur_start = 4;
    c.train.blur_epochs = 40;
    c.evaluate.metrics = {"ssim"};
    const RunConfig back = parse_config(c.serialize());
    CHECK(back == c);
    CHECK(parse_config(back.serialize()).serialize() == c.serialize());
    CHECK(parse_config(default_config().serialize()) == default_config());

    const RunConfig d = default_config();
    CHECK(d.train.lr == 1e-4);
    CHECK(d.mpi.planes == 32);
    CHECK(d.rectifier.prune_fraction == 0.5);
    CHECK(d.rectifier.lambda_adv == 0.1);
    CHECK(d.evaluate.crop == 0.05);

    CHECK_THROWS_AS(parse_config("[corpus]\nbogus = 1\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("[mpi]\nplanes = many\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("[mpi\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("no equals sign\n"), ValidationError);
    CHECK(parse_config("# comment\n\n[mpi]\nplanes = 8   # trailing\n").mpi.planes == 8);

    auto bad = d;
    bad.rectifier.prune_fraction = 1.5;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = d;
    bad.width = 60;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = d;
    bad.mpi.d_near = 70;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = d;
    bad.train.batch_size = 4;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = d;
    bad.evaluate.metrics = {"lpips"};
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    CHECK_NOTHROW(d.validate());
  }

  TEST_CASE("corpus root from the environment") {
    ::setenv("SVS_CORPUS_ROOT", "/srv/svs-corpus", 1);
    CHECK(default_config().corpus_path == fs::path("/srv/svs-corpus"));
    CHECK(parse_config("[corpus]\npath = here\n").corpus_path == fs::path("here"));
    ::unsetenv("SVS_CORPUS_ROOT");
    CHECK(default_config().corpus_path == fs::path("corpus"));
  }

  TEST_CASE("evaluate: identity, closed-form PSNR, crop, count mismatch") {
    const fs::path dir = fresh_dir("evaluate");
    fs::create_directories(dir / "pred");
    fs::create_directories(dir / "gt");
    Image a(96, 256, 3, 0.3f), b(96, 256, 3, 0.3f);
    for (int y = 0; y < 96; ++y)
      for (int x = 0; x < 256; ++x)
        for (int c = 0; c < 3; ++c) b.set(y, x, c, (6554.0f + float(std::lround(0.3 * 65535))) / 65535.0f);
    imagecore::save_image(a, dir / "pred/a.png", 16);
    imagecore::save_image(a, dir / "gt/a.png", 16);
    imagecore::save_image(b, dir / "pred/b.png", 16);
    imagecore::save_image(a, dir / "gt/b.png", 16);

    const auto e = evaluate_images(list_images(dir / "pred"), list_images(dir / "gt"), 0.05);
    REQUIRE(e.images.size() == 2);
    CHECK(std::isinf(e.images[0].psnr));
    CHECK(e.images[0].ssim == doctest::Approx(1.0));
    CHECK(e.images[1].psnr == doctest::Approx(20.0).epsilon(1e-4));
    const auto text = format_evaluation(e, 0.05, {"psnr", "ssim"});
    CHECK(text.find("a.png.psnr=inf") != std::string::npos);
    CHECK(text.find("mean.psnr=inf") != std::string::npos);
    CHECK(format_evaluation(e, 0.05, {"ssim"}).find("psnr") == std::string::npos);

    // Differences confined to the cropped border do not count: 256 -> 232 columns.
    Image framed = a;
    for (int y = 0; y < 96; ++y)
      for (int x = 0; x < 256; ++x)
        if (x < 12 || x >= 244 || y < 4 || y >= 92) framed.set(y, x, 0, 1.0f);
    imagecore::save_image(framed, dir / "framed.png", 16);
    const auto f = evaluate_images({dir / "framed.png"}, {dir / "gt/a.png"}, 0.05);
    CHECK(std::isinf(f.images[0].psnr));
    framed.set(48, 12, 0, 1.0f);
    imagecore::save_image(framed, dir / "framed.png", 16);
    CHECK(std::isfinite(evaluate_images({dir / "framed.png"}, {dir / "gt/a.png"}, 0.05).images[0].psnr));

    imagecore::save_image(a, dir / "pred/c.png", 16);
    try {
      evaluate_images(list_images(dir / "pred"), list_images(dir / "gt"), 0.05);
      FAIL("count mismatch accepted");
    } catch (const ValidationError& err) {
      CHECK(std::string(err.what()).find("c.png") != std::string::npos);
    }
  }

  TEST_CASE("generate: count, histogram, determinism, --force") {
    const fs::path dir = fresh_dir("generate");
    write(dir / "run.ini", kSmallConfig);
    REQUIRE(run_cli("--config run.ini generate", dir) == kSuccess);
    int scenes = 0;
    for (const auto& entry : fs::directory_iterator(dir / "corpus")) scenes += entry.is_directory();
    CHECK(scenes == 8);
    const auto manifest = scenegen::read_manifest(dir / "corpus");
    std::map<scenegen::Difficulty, int> hist;
    for (const auto& m : manifest) ++hist[m.difficulty];
    CHECK(hist[scenegen::Difficulty::flat] == 2);
    CHECK(hist[scenegen::Difficulty::layered] == 4);
    CHECK(hist[scenegen::Difficulty::thin_structures] == 2);

    const std::string first = slurp(dir / "corpus/manifest.txt") + slurp(dir / "corpus" / manifest[3].directory / "right.png");
    CHECK(run_cli("--config run.ini generate", dir) == kValidationFailure);
    CHECK(run_cli("--config run.ini generate --force --jobs 3", dir) == kSuccess);
    CHECK(slurp(dir / "corpus/manifest.txt") + slurp(dir / "corpus" / manifest[3].directory / "right.png") == first);
  }

  TEST_CASE("exit codes") {
    const fs::path dir = fresh_dir("exit");
    write(dir / "run.ini", kSmallConfig);
    write(dir / "bad.ini", "[mpi]\nplanes = 1\n");
    CHECK(run_cli("--config bad.ini generate", dir) == kValidationFailure);
    CHECK(run_cli("--config missing.ini generate", dir) == kValidationFailure);
    CHECK(run_cli("--config run.ini frobnicate", dir) == kValidationFailure);
    CHECK(run_cli("--config run.ini --jobs 0 generate", dir) == kValidationFailure);
    REQUIRE(run_cli("--config run.ini generate", dir) == kSuccess);
    // No checkpoints yet.
    CHECK(run_cli("--config run.ini ablate", dir) == kValidationFailure);
    CHECK(slurp(dir / "cli.err").find("checkpoint") != std::string::npos);
    CHECK(run_cli("--config run.ini synthesize --input corpus/scene_1/left.png --out syn", dir) == kValidationFailure);

    // All-zero networks: no stage can change anything, so complete cannot beat baseline.
    fs::create_directories(dir / "ckpt");
    const auto zeros = tinynet::FlowNet::zeros(tinynet::Architecture::parse("widths=4,4,4,4"));
    tinynet::save_checkpoint(zeros, dir / "ckpt/f_w.ckpt");
    tinynet::save_checkpoint(zeros, dir / "ckpt/f_b.ckpt");
    CHECK(run_cli("--config run.ini ablate --out table.txt", dir) == kOrderingFailure);
    const std::string table = slurp(dir / "table.txt");
    int rows = 0;
    for (char ch : table) rows += ch == '\n';
    CHECK(rows == 1 + 4 + 5);
    CHECK(slurp(dir / "cli.err").find("ordering") != std::string::npos);

    CHECK(run_cli("--config run.ini synthesize --input corpus/scene_1/left.png --ground-truth "
                  "corpus/scene_1/right.png --out syn",
                  dir) == kSuccess);
    for (const char* f : {"right_warped.png", "right_pruned.png", "delta_p.pgm", "delta_b.pgm", "mask.pgm",
                          "right_final.png", "metrics.txt"})
      CHECK(fs::exists(dir / "syn" / f));
    CHECK(scenegen::read_key_values(dir / "syn/metrics.txt").count("psnr") == 1);
    CHECK(run_cli("--config run.ini synthesize --input corpus/scene_1/left.png --out syn", dir) == kValidationFailure);
    CHECK(run_cli("--config run.ini synthesize --variant bogus --input corpus/scene_1/left.png --out syn2", dir) ==
          kValidationFailure);
  }

  TEST_CASE("reconstruct and render are reproducible") {
    const fs::path dir = fresh_dir("render");
    write(dir / "run.ini", std::string(kSmallConfig) + "[mpi]\nplanes = 8\n");
    REQUIRE(run_cli("--config run.ini generate", dir) == kSuccess);
    REQUIRE(run_cli("--config run.ini reconstruct --left corpus/scene_2/left.png --right corpus/scene_2/right.png "
                    "--out rec",
                    dir) == kSuccess);
    CHECK(fs::exists(dir / "rec/mpi/plane_007.png"));
    REQUIRE(run_cli("--config run.ini render --mpi rec/mpi --out a", dir) == kSuccess);
    REQUIRE(run_cli("--config run.ini render --mpi rec/mpi --out b --jobs 3", dir) == kSuccess);
    for (const char* f : {"frame_000.png", "frame_001.png", "frame_002.png", "poses.txt"})
      CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    write(dir / "behind.txt", "1 0 0 0 1 0 0 0 1 0 0 -100\n");
    CHECK(run_cli("--config run.ini render --mpi rec/mpi --poses behind.txt --out c", dir) == kValidationFailure);
  }
}
