#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "svs/scenegen/scene.hpp"

namespace svs::scenegen {

/// Fraction of scenes per difficulty; need not be normalised.
struct DifficultyMix {
  double flat = 0.25;
  double layered = 0.5;
  double thin_structures = 0.25;

  std::string to_string() const;
  static DifficultyMix parse(const std::string& text);
  friend bool operator==(const DifficultyMix&, const DifficultyMix&) = default;
};

struct CorpusSpec {
  int n_scenes = 20;
  std::uint64_t seed = 1;
  DifficultyMix mix;
  SceneConfig scene;
  double baseline = 0.5;
  double focal = 120.0;
};

struct ManifestEntry {
  std::string directory;
  std::uint64_t seed = 0;
  Difficulty difficulty = Difficulty::flat;
};

/// Largest-remainder allocation of n scenes over the mix, in a deterministic
/// seed-dependent order. Scene i gets seed spec.seed + i.
std::vector<ManifestEntry> plan_corpus(const CorpusSpec& spec);

/// Rig implied by a CorpusSpec (principal point at the image centre).
mpi::CameraRig corpus_rig(const CorpusSpec& spec);

StereoSample make_sample(const ManifestEntry& entry, const CorpusSpec& spec);

/// In-memory corpus (same samples write_corpus would store).
std::vector<StereoSample> build_corpus(const CorpusSpec& spec, int jobs = 1);

/// Writes scene_<seed>/ directories plus manifest.txt. `dir` must be empty or absent.
std::vector<ManifestEntry> write_corpus(const CorpusSpec& spec, const std::filesystem::path& dir, int jobs = 1);

/// scene_<seed>/left.png, right.png, disp.pgm, disp_right.pgm, occ.pgm,
/// cameras.txt, novel_<k>.png, novel_<k>_pose.txt.
void write_sample(const StereoSample& sample, const std::filesystem::path& dir);
StereoSample read_sample(const std::filesystem::path& dir);

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& corpus_dir);
std::vector<StereoSample> read_corpus(const std::filesystem::path& corpus_dir);

/// Plain `key=value` lines; blank lines and '#' comments ignored.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);
void write_key_values(const std::map<std::string, std::string>& kv, const std::filesystem::path& path);

}  // namespace svs::scenegen
