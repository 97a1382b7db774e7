/*
Copyright 2026 The binscene Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include "binscene/cli/commands.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "binscene/cgan/checkpoint.hpp"
#include "binscene/cgan/train.hpp"
#include "binscene/codec/metrics.hpp"
#include "binscene/codec/preprocess.hpp"
#include "binscene/codec/resample.hpp"
#include "binscene/core/json_util.hpp"
#include "binscene/core/rng.hpp"
#include "binscene/core/wav.hpp"
#include "binscene/geometry/close_mesh.hpp"
#include "binscene/geometry/mesh_io.hpp"
#include "binscene/geometry/simplify.hpp"
#include "binscene/materials/materials.hpp"
#include "binscene/raytracer/dataset.hpp"
#include "binscene/raytracer/raytracer.hpp"
#include "binscene/render/walkthrough.hpp"
#include "binscene/scene_graph/encoder.hpp"

namespace binscene::cli {

namespace fs = std::filesystem;

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return kExitUsage;
    case ErrorKind::kInvalidInput: return kExitInput;
    case ErrorKind::kNumerical: return kExitNumerical;
    case ErrorKind::kIo: return kExitIo;
  }
  return kExitInternal;
}

namespace {

[[noreturn]] void Usage(const std::string& message) { throw Error(ErrorKind::kUsage, message); }

// Flat JSON object whose keys are long option names ("_" and "-" both
// accepted) of the subcommand being run. CLI11 applies it only to options
// absent from the command line.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    return "{}";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      input >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kInvalidInput, std::string("config file: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorKind::kInvalidInput, "config file must hold a JSON object");
    const auto subs = root_->get_subcommands();
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      CLI::ConfigItem item;
      if (!subs.empty()) item.parents = {subs.front()->get_name()};
      item.name = key;
      std::replace(item.name.begin(), item.name.end(), '_', '-');
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(Scalar(v));
      } else {
        item.inputs.push_back(Scalar(value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  const CLI::App* root_;

  static std::string Scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_float()) return fmt::format("{:.17g}", v.get<double>());
    throw Error(ErrorKind::kInvalidInput, "config values must be scalars or arrays of scalars");
  }
};

// Options shared by every subcommand.
struct Common {
  int threads = 0;
};

CLI::App* AddCommand(CLI::App& app, const char* name, const char* help, Common& common) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->add_option("--threads", common.threads, "Worker threads, 0 = all cores; 1 is the bit-exact reference")
      ->check(CLI::NonNegativeNumber);
  return sub;
}

void EnsureParent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) ThrowIo("cannot create directory " + parent.string() + ": " + ec.message());
}

std::string DefaultLabelsPath(const std::string& ply) {
  return (fs::path(ply).parent_path() / (fs::path(ply).stem().string() + ".labels.json")).string();
}

materials::MaterialAnnotatedMesh LoadScene(const std::string& mesh, const std::string& labels) {
  return materials::ReadMaterialMesh(mesh, labels.empty() ? DefaultLabelsPath(mesh) : labels);
}

std::uint64_t RequireSeed(const std::optional<std::uint64_t>& seed, const char* command) {
  if (!seed) Usage(std::string(command) + " is stochastic and needs --seed");
  return *seed;
}

// Scene encoder from an encoder archive, a checkpoint that carries one, or a
// fresh initialization from a seed, in that order.
scene_graph::GraphEncoderParams ResolveEncoder(const std::string& encoder_path, const std::string& checkpoint,
                                               const std::optional<std::uint64_t>& seed, const char* command) {
  if (!encoder_path.empty()) return scene_graph::LoadEncoderParams(encoder_path);
  if (!checkpoint.empty()) {
    const auto ck = cgan::LoadCheckpoint(checkpoint);
    if (ck.state.encoder) return cgan::FromEncoderWeights(*ck.state.encoder);
  }
  return scene_graph::InitEncoderParams({}, RequireSeed(seed, command));
}

codec::BirLayout ParseLayout(const std::string& name) {
  if (name == "full") return codec::kFullLayout;
  if (name == "desk") return codec::kDeskLayout;
  Usage("unknown layout '" + name + "' (expected full or desk)");
}

geometry::Vec3 JsonVec3(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) ThrowInvalidInput("positions must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::vector<std::string> SortedWavs(const std::string& dir) {
  if (!fs::is_directory(dir)) ThrowIo(dir + " is not a directory");
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

// ---------------------------------------------------------------- commands

struct PreprocessMeshArgs {
  std::string mesh, labels, out, out_labels;
  double target_ratio = 0.025;
  double small_hole = 0.5;
};

void PreprocessMesh(const PreprocessMeshArgs& a) {
  Warnings warnings;
  const auto mesh = geometry::LoadAnnotatedMesh(a.mesh, a.labels, &warnings);
  geometry::CloseOptions close;
  close.small_hole_perimeter = a.small_hole;
  const auto closed = geometry::CloseMesh(mesh, close, &warnings);
  const auto simple = geometry::Simplify(closed, a.target_ratio, &warnings);
  EnsureParent(a.out);
  geometry::WriteLabeledMesh(simple, a.out, a.out_labels.empty() ? DefaultLabelsPath(a.out) : a.out_labels);
  spdlog::info("preprocess-mesh: {} -> {} faces", mesh.faces.size(), simple.faces.size());
}

struct AssignArgs {
  std::string mesh, labels, materials, embeddings, out, out_labels;
  std::string strategy = "exact";
  std::string band_mode = "mid";
  std::optional<std::uint64_t> seed;
  double sc_mean = 0.3, sc_std = 0.15;
};

void AssignMaterialsCmd(const AssignArgs& a) {
  materials::AssignOptions opt;
  opt.seed = RequireSeed(a.seed, "assign-materials");
  opt.strategy = materials::ParseMatchStrategy(a.strategy);
  opt.mode = materials::ParseBandAverageMode(a.band_mode);
  opt.prior.mean = a.sc_mean;
  opt.prior.stddev = a.sc_std;
  Warnings warnings;
  const auto mesh = geometry::LoadAnnotatedMesh(a.mesh, a.labels, &warnings);
  const auto db = materials::LoadMaterialDatabase(a.materials, a.embeddings);
  const auto out = materials::AssignMaterials(mesh, db, opt, &warnings);
  EnsureParent(a.out);
  materials::WriteMaterialMesh(out, a.out, a.out_labels.empty() ? DefaultLabelsPath(a.out) : a.out_labels);
}

struct EncodeArgs {
  std::string mesh, labels, encoder, checkpoint, out;
  std::optional<std::uint64_t> seed;
  bool raw_frame = false;
};

void EncodeSceneCmd(const EncodeArgs& a) {
  const auto scene = LoadScene(a.mesh, a.labels);
  const auto params = ResolveEncoder(a.encoder, a.checkpoint, a.seed, "encode-scene");
  const auto graph = scene_graph::BuildGraph(scene, !a.raw_frame);
  const auto latent = scene_graph::EncodeScene(graph, params);
  EnsureParent(a.out);
  scene_graph::WriteLatentJson(a.out, latent);
}

struct DatasetArgs {
  std::string mesh, labels, out, scene_id = "scene";
  std::optional<std::uint64_t> seed;
  double spacing = 1.0, clearance = 0.2, duration = 1.0;
  int sources = 10, rays = 20000, max_depth = 2000;
  double ear_separation = 0.18, ild_db = 20.0;
  bool air = false;
};

void GenDataset(const DatasetArgs& a, const Common& common) {
  raytracer::DatasetConfig cfg;
  cfg.scene_id = a.scene_id;
  cfg.spacing = a.spacing;
  cfg.clearance = a.clearance;
  cfg.n_sources = a.sources;
  cfg.sim.n_rays = a.rays;
  cfg.sim.max_depth = a.max_depth;
  cfg.sim.duration = a.duration;
  cfg.sim.air_absorption = a.air;
  cfg.sim.threads = common.threads;
  cfg.head.ear_separation = a.ear_separation;
  cfg.head.ild_max_db = a.ild_db;
  const auto scene = LoadScene(a.mesh, a.labels);
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) ThrowIo("cannot create " + a.out + ": " + ec.message());
  Warnings warnings;
  const auto manifest = raytracer::GenerateDataset(scene, cfg, a.out, RequireSeed(a.seed, "gen-dataset"), &warnings);
  spdlog::info("gen-dataset: {} pairs written to {}", manifest.at("pairs").size(), a.out);
}

struct TrainArgs {
  std::string mesh, labels, out, encoder, layout = "full";
  std::vector<std::string> datasets;
  std::optional<std::uint64_t> seed;
  cgan::TrainConfig cfg;
  bool frozen_encoder = false;
};

void TrainCmd(TrainArgs a) {
  a.cfg.seed = RequireSeed(a.seed, "train");
  a.cfg.joint_encoder = !a.frozen_encoder;
  if (a.datasets.empty()) Usage("train needs at least one --dataset");
  const codec::BirLayout layout = ParseLayout(a.layout);
  const auto scene = LoadScene(a.mesh, a.labels);
  auto encoder = a.encoder.empty() ? scene_graph::InitEncoderParams({}, MixSeed(a.cfg.seed, 0xE5C))
                                   : scene_graph::LoadEncoderParams(a.encoder);
  cgan::TrainSet data;
  data.graphs.push_back(scene_graph::BuildGraph(scene, true));
  const auto& graph = data.graphs.back();
  const auto latent = scene_graph::EncodeScene(graph, encoder);
  for (const auto& dir : a.datasets) {
    const auto manifest = ReadJsonFile((fs::path(dir) / "manifest.json").string());
    for (const auto& p : manifest.at("pairs")) {
      cgan::TrainRecord r;
      r.scene = 0;
      r.latent.assign(latent.data(), latent.data() + latent.size());
      r.source = graph.ToSceneFrame(JsonVec3(p.at("src")));
      r.listener = graph.ToSceneFrame(JsonVec3(p.at("lst")));
      const Bir bir = ReadBirWav((fs::path(dir) / p.at("wav").get<std::string>()).string());
      r.bir = codec::PreprocessBir(bir, layout);
      data.records.push_back(std::move(r));
    }
  }
  cgan::GeneratorConfig gc;
  gc.layout = layout;
  gc.cond_dim = encoder.config.latent_dim + 2 * cgan::kPositionDims;
  cgan::DiscriminatorConfig dc;
  dc.layout = layout;
  dc.cond_dim = gc.cond_dim;
  cgan::TrainState init{cgan::InitGenerator(gc, MixSeed(a.cfg.seed, 1)),
                        cgan::InitDiscriminator(dc, MixSeed(a.cfg.seed, 2)), cgan::ToEncoderWeights(encoder)};
  const auto result = cgan::Train(data, std::move(init), a.cfg, [](const cgan::HistoryRow& r) {
    spdlog::debug("step {} L_CGAN {:.4g} L_BIR {:.4g} L_ED {:.4g} L_MSE {:.4g} L_D {:.4g}", r.step, r.l_cgan, r.l_bir,
                  r.l_ed, r.l_mse, r.l_d);
  });
  EnsureParent(a.out);
  cgan::SaveCheckpoint(a.out, result.state, a.cfg);
  WriteTextFile(a.out + ".history.csv", cgan::HistoryCsv(result.history));
}

// Loads the scene graph and latent used to condition a trained generator.
struct Conditioning {
  scene_graph::SceneGraph graph;
  scene_graph::SceneLatent latent;
};

Conditioning Condition(const std::string& mesh, const std::string& labels, const std::string& latent_path,
                       const cgan::Checkpoint& ck) {
  Conditioning c;
  c.graph = scene_graph::BuildGraph(LoadScene(mesh, labels), true);
  if (!latent_path.empty()) {
    c.latent = scene_graph::ReadLatentJson(latent_path);
  } else {
    if (!ck.state.encoder) Usage("checkpoint has no encoder; pass --latent");
    c.latent = scene_graph::EncodeScene(c.graph, cgan::FromEncoderWeights(*ck.state.encoder));
  }
  return c;
}

Bir GenerateBir(const cgan::Generator& g, const Conditioning& c, const geometry::Vec3& src,
                const geometry::Vec3& lst) {
  const auto cond = cgan::MakeCondition(c.latent, c.graph.ToSceneFrame(src), c.graph.ToSceneFrame(lst));
  return codec::PostprocessBir(cgan::Generate(g, cond));
}

struct InferArgs {
  std::string checkpoint, mesh, labels, latent, pairs, out;
};

void InferCmd(const InferArgs& a) {
  const auto ck = cgan::LoadCheckpoint(a.checkpoint);
  const auto c = Condition(a.mesh, a.labels, a.latent, ck);
  const auto pairs = ReadJsonFile(a.pairs);
  if (!pairs.is_array()) ThrowInvalidInput(a.pairs + ": expected an array of {src, lst}");
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) ThrowIo("cannot create " + a.out + ": " + ec.message());
  std::size_t i = 0;
  for (const auto& p : pairs) {
    const Bir bir = GenerateBir(ck.state.generator, c, JsonVec3(p.at("src")), JsonVec3(p.at("lst")));
    WriteBirWav((fs::path(a.out) / fmt::format("pair_{:05d}.wav", i++)).string(), bir);
  }
}

struct MetricsArgs {
  std::string gen, ref, out, csv, ed_csv;
};

void MetricsCmd(const MetricsArgs& a) {
  const auto gen_names = SortedWavs(a.gen);
  const auto ref_names = SortedWavs(a.ref);
  if (gen_names != ref_names) ThrowInvalidInput("generated and reference directories hold different file names");
  std::vector<Bir> gen, ref;
  for (const auto& n : gen_names) {
    Bir g = ReadBirWav((fs::path(a.gen) / n).string());
    Bir r = ReadBirWav((fs::path(a.ref) / n).string());
    // Compare at the generated rate over the common length.
    if (r.sample_rate != g.sample_rate) {
      r.left = codec::ResampleRate(r.left, r.sample_rate, g.sample_rate);
      r.right = codec::ResampleRate(r.right, r.sample_rate, g.sample_rate);
      r.sample_rate = g.sample_rate;
    }
    const std::size_t len = std::min(g.size(), r.size());
    for (Bir* b : {&g, &r}) {
      b->left.resize(len);
      b->right.resize(len);
    }
    gen.push_back(std::move(g));
    ref.push_back(std::move(r));
  }
  const auto report = codec::BuildMetricReport(gen, ref, gen_names);
  if (a.out.empty()) {
    std::cout << codec::ReportToText(report);
  } else {
    EnsureParent(a.out);
    WriteJsonFile(a.out, codec::ReportToJson(report));
  }
  if (!a.csv.empty()) WriteTextFile(a.csv, codec::ReportToCsv(report));
  if (!a.ed_csv.empty() && !gen.empty()) WriteTextFile(a.ed_csv, codec::EdDifferenceCsv(report, gen[0].sample_rate));
}

struct RenderArgs {
  std::string spec, out, checkpoint, mesh, labels, latent;
  bool raytrace = false;
  std::optional<std::uint64_t> seed;
  int rays = 20000;
};

void RenderCmd(const RenderArgs& a, const Common& common) {
  const auto spec = render::WalkthroughSpecFromJson(ReadJsonFile(a.spec), fs::path(a.spec).parent_path().string());
  const auto scene = LoadScene(a.mesh, a.labels);
  Warnings warnings;
  std::vector<std::vector<double>> dry;
  double rate = 0.0;
  for (const auto& s : spec.sources) {
    auto audio = render::ReadDryAudio(s.audio, &warnings);
    if (rate == 0.0) rate = audio.sample_rate;
    if (audio.sample_rate != rate) audio.samples = codec::ResampleRate(audio.samples, audio.sample_rate, rate);
    dry.push_back(std::move(audio.samples));
  }
  render::RenderOptions options;
  options.bounds = geometry::ComputeAabb(scene.vertices);

  render::RenderResult result;
  if (a.raytrace) {
    const std::uint64_t seed = RequireSeed(a.seed, "render --raytrace");
    const raytracer::AcousticScene acoustic(scene);
    raytracer::SimConfig sim;
    sim.n_rays = a.rays;
    sim.threads = common.threads;
    // The per-BIR seed depends only on the positions, so a listener standing
    // still hears the same BIR in every frame.
    result = render::RenderWalkthrough(spec, dry, rate, [&](const geometry::Vec3& s, const geometry::Vec3& l) -> Bir {
      std::uint64_t h = seed;
      for (int k = 0; k < 3; ++k) h = MixSeed(MixSeed(h, std::bit_cast<std::uint64_t>(s[k])), std::bit_cast<std::uint64_t>(l[k]));
      return raytracer::SimulatePair(acoustic, s, l, sim, {}, h, &warnings);
    }, options);
  } else {
    if (a.checkpoint.empty()) Usage("render needs --checkpoint or --raytrace");
    const auto ck = cgan::LoadCheckpoint(a.checkpoint);
    const auto c = Condition(a.mesh, a.labels, a.latent, ck);
    result = render::RenderWalkthrough(spec, dry, rate, [&](const geometry::Vec3& s, const geometry::Vec3& l) -> Bir {
      return GenerateBir(ck.state.generator, c, s, l);
    }, options);
  }
  if (result.normalized) spdlog::warn("render: output clipped; scaled by {:.4f} to -1 dBFS peak", result.gain);
  EnsureParent(a.out);
  render::WriteStereoWav(a.out, result.audio);
}

struct BenchArgs {
  std::string checkpoint, mesh, labels, out;
  std::optional<std::uint64_t> seed;
  int n = 2500;
};

nlohmann::json BenchCmd(const BenchArgs& a) {
  if (a.n <= 0) Usage("bench --n must be positive");
  std::optional<cgan::Checkpoint> ck;
  if (!a.checkpoint.empty()) ck = cgan::LoadCheckpoint(a.checkpoint);
  scene_graph::GraphEncoderParams encoder;
  cgan::Generator g;
  if (ck && ck->state.encoder) {
    encoder = cgan::FromEncoderWeights(*ck->state.encoder);
    g = ck->state.generator;
  } else {
    const std::uint64_t seed = RequireSeed(a.seed, "bench without a trained checkpoint");
    encoder = scene_graph::InitEncoderParams({}, seed);
    g = ck ? ck->state.generator : cgan::InitGenerator({}, seed);
  }
  const auto scene = LoadScene(a.mesh, a.labels);
  const auto positions = raytracer::GridPositions(scene, 1.0, 0.2);
  if (positions.empty()) ThrowInvalidInput("bench: the scene has no valid grid positions");

  // The scene is encoded once; only generation is repeated per BIR.
  const auto t0 = std::chrono::steady_clock::now();
  const auto graph = scene_graph::BuildGraph(scene, true);
  const auto latent = scene_graph::EncodeScene(graph, encoder);
  const auto t1 = std::chrono::steady_clock::now();
  double checksum = 0.0;
  const std::size_t m = positions.size();
  for (int i = 0; i < a.n; ++i) {
    const auto& src = positions[static_cast<std::size_t>(i) % m];
    const auto& lst = positions[(static_cast<std::size_t>(i) / m + 1 + static_cast<std::size_t>(i)) % m];
    const auto cond = cgan::MakeCondition(latent, graph.ToSceneFrame(src), graph.ToSceneFrame(lst));
    checksum += cgan::Generate(g, cond).left[0];
  }
  const auto t2 = std::chrono::steady_clock::now();
  const double encode_s = std::chrono::duration<double>(t1 - t0).count();
  const double gen_s = std::chrono::duration<double>(t2 - t1).count();
  nlohmann::json report = {{"encode_s", encode_s},
                           {"mean_ms_per_bir", 1e3 * gen_s / a.n},
                           {"birs_per_sec", a.n / gen_s},
                           {"n", a.n},
                           {"bir_samples", g.config.layout.total()}};
  spdlog::debug("bench checksum {}", checksum);
  if (a.out.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    EnsureParent(a.out);
    WriteJsonFile(a.out, report);
  }
  return report;
}

const char* kExitCodeHelp =
    "Exit codes: 0 ok, 1 internal error, 2 usage, 3 invalid input, 4 numerical failure, 5 I/O error.";

}  // namespace

int Run(int argc, const char* const* argv) {
  CLI::App app{"Scene-conditioned binaural impulse response toolkit"};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);
  // Lets --config and --log-level follow the subcommand name.
  app.fallthrough();
  app.set_config("--config", "", "JSON file of option values; command-line flags take precedence");
  app.config_formatter(std::make_shared<JsonConfig>(&app));
  app.allow_config_extras(false);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  Common common;

  PreprocessMeshArgs pm;
  auto* c_pm = AddCommand(app, "preprocess-mesh", "Close holes and simplify a labeled mesh", common);
  c_pm->add_option("--mesh", pm.mesh, "Input OBJ or PLY")->required();
  c_pm->add_option("--labels", pm.labels, "Per-vertex label sidecar (JSON or CSV)")->required();
  c_pm->add_option("--out", pm.out, "Output PLY")->required();
  c_pm->add_option("--out-labels", pm.out_labels, "Output label dictionary (default <out>.labels.json)");
  c_pm->add_option("--target-ratio", pm.target_ratio, "Face budget as a fraction of the closed mesh")
      ->check(CLI::Range(1e-6, 1.0));
  c_pm->add_option("--small-hole", pm.small_hole, "Fill boundary loops shorter than this perimeter (m)");

  AssignArgs am;
  auto* c_am = AddCommand(app, "assign-materials", "Attach acoustic materials to mesh labels", common);
  c_am->add_option("--mesh", am.mesh, "Labeled PLY")->required();
  c_am->add_option("--labels", am.labels, "Label sidecar")->required();
  c_am->add_option("--materials", am.materials, "Material database (CSV, or JSON by extension)")->required();
  c_am->add_option("--embeddings", am.embeddings, "Optional label embeddings JSON");
  c_am->add_option("--strategy", am.strategy, "exact, token-overlap or embedding-cosine");
  c_am->add_option("--band-mode", am.band_mode, "mid or full");
  c_am->add_option("--scattering-mean", am.sc_mean, "Scene scattering prior mean");
  c_am->add_option("--scattering-std", am.sc_std, "Scene scattering prior standard deviation");
  c_am->add_option("--seed", am.seed, "Seed for the scene scattering draw");
  c_am->add_option("--out", am.out, "Output PLY")->required();
  c_am->add_option("--out-labels", am.out_labels, "Output label dictionary");

  EncodeArgs en;
  auto* c_en = AddCommand(app, "encode-scene", "Encode a material mesh into a scene latent", common);
  c_en->add_option("--mesh", en.mesh, "Material PLY")->required();
  c_en->add_option("--labels", en.labels, "Label dictionary (default <mesh>.labels.json)");
  c_en->add_option("--encoder", en.encoder, "Encoder archive prefix");
  c_en->add_option("--checkpoint", en.checkpoint, "Training checkpoint prefix carrying an encoder");
  c_en->add_option("--seed", en.seed, "Initialize an untrained encoder from this seed");
  c_en->add_flag("--raw-frame", en.raw_frame, "Keep mesh coordinates instead of the AABB-min frame");
  c_en->add_option("--out", en.out, "Latent JSON")->required();

  DatasetArgs ds;
  auto* c_ds = AddCommand(app, "gen-dataset", "Ray-trace BIRs on a listener grid", common);
  c_ds->add_option("--mesh", ds.mesh, "Material PLY")->required();
  c_ds->add_option("--labels", ds.labels, "Label dictionary");
  c_ds->add_option("--out", ds.out, "Output directory")->required();
  c_ds->add_option("--seed", ds.seed, "Dataset seed");
  c_ds->add_option("--scene-id", ds.scene_id, "Scene name recorded in the manifest");
  c_ds->add_option("--spacing", ds.spacing, "Grid spacing (m)")->check(CLI::PositiveNumber);
  c_ds->add_option("--clearance", ds.clearance, "Minimum distance to any surface (m)")->check(CLI::NonNegativeNumber);
  c_ds->add_option("--sources", ds.sources, "Sources drawn from the grid")->check(CLI::PositiveNumber);
  c_ds->add_option("--rays", ds.rays, "Rays per source")->check(CLI::PositiveNumber);
  c_ds->add_option("--max-depth", ds.max_depth, "Reflection limit")->check(CLI::PositiveNumber);
  c_ds->add_option("--duration", ds.duration, "BIR length (s)")->check(CLI::PositiveNumber);
  c_ds->add_option("--ear-separation", ds.ear_separation, "Ear distance (m)")->check(CLI::PositiveNumber);
  c_ds->add_option("--ild-db", ds.ild_db, "Head shadow at 8 kHz for a fully lateral source (dB)");
  c_ds->add_flag("--air-absorption", ds.air, "Apply per-band air attenuation");

  TrainArgs tr;
  auto* c_tr = AddCommand(app, "train", "Train the conditional BIR generator", common);
  c_tr->add_option("--mesh", tr.mesh, "Material PLY of the training scene")->required();
  c_tr->add_option("--labels", tr.labels, "Label dictionary");
  c_tr->add_option("--dataset", tr.datasets, "Dataset directory (repeatable)")->required();
  c_tr->add_option("--out", tr.out, "Checkpoint prefix")->required();
  c_tr->add_option("--encoder", tr.encoder, "Initial encoder archive");
  c_tr->add_option("--seed", tr.seed, "Training seed");
  c_tr->add_option("--layout", tr.layout, "full (3968+128) or desk (512+32)");
  c_tr->add_option("--epochs", tr.cfg.epochs)->check(CLI::NonNegativeNumber);
  c_tr->add_option("--batch", tr.cfg.batch)->check(CLI::PositiveNumber);
  c_tr->add_option("--lr", tr.cfg.lr)->check(CLI::PositiveNumber);
  c_tr->add_option("--lr-decay", tr.cfg.lr_decay)->check(CLI::PositiveNumber);
  c_tr->add_option("--decay-every", tr.cfg.decay_every, "Epochs between decays")->check(CLI::PositiveNumber);
  c_tr->add_option("--lambda-bir", tr.cfg.lambda_bir)->check(CLI::NonNegativeNumber);
  c_tr->add_option("--lambda-ed", tr.cfg.lambda_ed)->check(CLI::NonNegativeNumber);
  c_tr->add_option("--lambda-mse", tr.cfg.lambda_mse)->check(CLI::NonNegativeNumber);
  c_tr->add_flag("--non-saturating", tr.cfg.non_saturating, "Generator minimizes -log D(G(y))");
  c_tr->add_flag("--frozen-encoder", tr.frozen_encoder, "Keep the scene encoder fixed");
  c_tr->add_option("--max-joint-nodes", tr.cfg.max_joint_nodes, "Largest graph trained jointly");

  InferArgs in;
  auto* c_in = AddCommand(app, "infer", "Generate BIRs for source/listener pairs", common);
  c_in->add_option("--checkpoint", in.checkpoint, "Checkpoint prefix")->required();
  c_in->add_option("--mesh", in.mesh, "Material PLY")->required();
  c_in->add_option("--labels", in.labels, "Label dictionary");
  c_in->add_option("--latent", in.latent, "Precomputed latent JSON");
  c_in->add_option("--pairs", in.pairs, "JSON array of {src, lst} in mesh coordinates")
      ->required()
      ;
  c_in->add_option("--out", in.out, "Output directory")->required();

  MetricsArgs me;
  auto* c_me = AddCommand(app, "metrics", "Compare generated BIRs against references", common);
  c_me->add_option("--gen", me.gen, "Directory of generated WAVs")->required();
  c_me->add_option("--ref", me.ref, "Directory of reference WAVs with the same names")->required();
  c_me->add_option("--out", me.out, "JSON report (default: text on stdout)");
  c_me->add_option("--csv", me.csv, "Per-pair CSV");
  c_me->add_option("--ed-csv", me.ed_csv, "Left-minus-right energy decay curves");

  RenderArgs re;
  auto* c_re = AddCommand(app, "render", "Render a listener walkthrough", common);
  c_re->add_option("--spec", re.spec, "Walkthrough JSON")->required();
  c_re->add_option("--mesh", re.mesh, "Material PLY")->required();
  c_re->add_option("--labels", re.labels, "Label dictionary");
  c_re->add_option("--checkpoint", re.checkpoint, "Generator checkpoint");
  c_re->add_option("--latent", re.latent, "Precomputed latent JSON");
  c_re->add_flag("--raytrace", re.raytrace, "Use the ray tracer instead of the generator");
  c_re->add_option("--rays", re.rays, "Rays per BIR with --raytrace")->check(CLI::PositiveNumber);
  c_re->add_option("--seed", re.seed, "Ray tracing seed");
  c_re->add_option("--out", re.out, "Output WAV")->required();

  BenchArgs be;
  auto* c_be = AddCommand(app, "bench", "Time scene encoding and per-BIR generation", common);
  c_be->add_option("--mesh", be.mesh, "Material PLY")->required();
  c_be->add_option("--labels", be.labels, "Label dictionary");
  c_be->add_option("--checkpoint", be.checkpoint, "Checkpoint prefix (default: untrained networks)");
  c_be->add_option("--seed", be.seed, "Seed for untrained networks");
  c_be->add_option("--n", be.n, "BIRs to generate");
  c_be->add_option("--out", be.out, "JSON report (default: stdout)");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::FileError& e) {
      spdlog::error("io: {}", e.what());
      return kExitIo;
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? kExitOk : kExitUsage;
    }
    spdlog::set_level(spdlog::level::from_str(log_level));

    if (c_pm->parsed()) PreprocessMesh(pm);
    if (c_am->parsed()) AssignMaterialsCmd(am);
    if (c_en->parsed()) EncodeSceneCmd(en);
    if (c_ds->parsed()) GenDataset(ds, common);
    if (c_tr->parsed()) TrainCmd(tr);
    if (c_in->parsed()) InferCmd(in);
    if (c_me->parsed()) MetricsCmd(me);
    if (c_re->parsed()) RenderCmd(re, common);
    if (c_be->parsed()) BenchCmd(be);
    return kExitOk;
  } catch (const Error& e) {
    spdlog::error("{}: {}", ErrorKindName(e.kind()), e.what());
    return ExitCodeFor(e.kind());
  } catch (const nlohmann::json::exception& e) {
    spdlog::error("invalid input: {}", e.what());
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    spdlog::error("io: {}", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return kExitInternal;
  }
}

}  // namespace binscene::cli
