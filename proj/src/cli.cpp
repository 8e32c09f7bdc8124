#include "regor/cli.hpp"

#include "regor/benchmark.hpp"
#include "regor/config.hpp"
#include "regor/errors.hpp"
#include "regor/io.hpp"
#include "regor/parallel.hpp"
#include "regor/pipeline.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>

namespace regor {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw IoError("file not found: " + p.string());
}

void report(std::ostream& err, std::string_view kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

int exit_code_for(std::string_view kind) {
  if (kind == "IoError") return 2;
  if (kind == "ParseError" || kind == "InvalidConfig" || kind == "InvalidSpec" || kind == "UnsupportedFormat" ||
      kind == "IndexOutOfRange") {
    return 3;
  }
  return 4;
}

struct RegisterArgs {
  std::string source, target, features_src, features_dst, init_corr, config, out;
  std::vector<std::string> ablations;
};

int cmd_register(const RegisterArgs& a, std::ostream& out) {
  for (const auto& p : {a.source, a.target, a.config}) require_file(p);
  for (const auto& p : {a.features_src, a.features_dst, a.init_corr}) {
    if (!p.empty()) require_file(p);
  }
  RunConfig config = load_run_config(a.config);
  for (const auto& ab : a.ablations) config.apply_ablation(ab);
  config.validate();

  const PointCloud source = load_point_cloud(a.source);
  const PointCloud target = load_point_cloud(a.target);
  std::optional<FeatureSet> fs_src, fs_dst;
  if (!a.features_src.empty()) fs_src = read_feature_file(a.features_src);
  if (!a.features_dst.empty()) fs_dst = read_feature_file(a.features_dst);
  std::optional<CorrespondenceSet> initial;
  if (!a.init_corr.empty()) initial = load_correspondences(a.init_corr);

  const auto result = register_clouds(source, target, fs_src, fs_dst, initial, config);
  fs::create_directories(a.out);
  const fs::path dir(a.out);
  save_transform(dir / "transform.json", result.transform);
  save_correspondences(dir / "correspondences.csv", result.regeneration.correspondences);
  save_trace(dir / "trace.json", result.regeneration.trace);
  out << json{{"transform_valid", result.transform_valid},
              {"refined", result.refined},
              {"correspondences", result.regeneration.correspondences.size()},
              {"collapsed", result.regeneration.trace.collapsed}}
             .dump()
      << '\n';
  return 0;
}

int cmd_benchmark(const std::string& spec_path, const std::string& out_dir, std::ostream& out) {
  require_file(spec_path);
  const auto spec = parse_benchmark_spec(read_text_file(spec_path));
  const auto records = run_benchmark(spec);
  write_benchmark_outputs(out_dir, spec, records);
  std::size_t ok = 0;
  for (const auto& r : records) ok += r.metrics.success ? 1 : 0;
  out << json{{"pairs", records.size()}, {"successes", ok}}.dump() << '\n';
  return 0;
}

int cmd_synth(const std::string& spec_path, std::optional<std::uint64_t> seed, const std::string& out_dir,
              std::ostream& out) {
  require_file(spec_path);
  SceneSpec spec = parse_scene_spec(read_text_file(spec_path));
  if (seed) spec.rng_seed = *seed;
  const Scene scene = generate_scene(spec);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  save_point_cloud(dir / "source.ply", scene.source);
  save_point_cloud(dir / "target.ply", scene.target);
  save_correspondences(dir / "initial.csv", scene.initial);
  save_transform(dir / "ground_truth.json", scene.truth.transform);
  out << json{{"source_points", scene.source.size()},
              {"target_points", scene.target.size()},
              {"initial_pairs", scene.initial.size()}}
             .dump()
      << '\n';
  return 0;
}

struct EvalArgs {
  std::string source, target, init_corr, final_corr, transform, ground_truth, config, out;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  for (const auto& p : {a.source, a.target, a.init_corr, a.final_corr, a.transform, a.ground_truth}) require_file(p);
  RunConfig config;
  if (!a.config.empty()) {
    require_file(a.config);
    config = load_run_config(a.config);
  }
  const PointCloud source = load_point_cloud(a.source);
  const PointCloud target = load_point_cloud(a.target);
  const auto initial = load_correspondences(a.init_corr);
  const auto final_set = load_correspondences(a.final_corr);
  initial.validate(source.size(), target.size());
  final_set.validate(source.size(), target.size());
  const GroundTruth gt{load_transform(a.ground_truth), config.inlier_tolerance};
  const auto m = pair_metrics(positioned(initial.pairs(), source, target), positioned(final_set.pairs(), source, target),
                              load_transform(a.transform), gt, config.thresholds);
  const json j{{"re", m.re},         {"te", m.te},           {"ip", m.ip},
               {"in_count", m.in_count}, {"initial_in_count", m.initial_in_count},
               {"initial_ip", m.initial_ip}, {"inr", m.inr}, {"success", m.success}};
  if (a.out.empty()) {
    out << j.dump() << '\n';
  } else {
    write_text_file(a.out, j.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_threads_from_env();
  CLI::App app{"Progressive correspondence regeneration for rigid point cloud registration", "regor"};
  app.require_subcommand(1);

  RegisterArgs reg;
  auto* r = app.add_subcommand("register", "Register a source cloud onto a target cloud");
  r->add_option("--source", reg.source, "Source cloud (.ply/.xyz)")->required();
  r->add_option("--target", reg.target, "Target cloud (.ply/.xyz)")->required();
  r->add_option("--features-src", reg.features_src, "Source feature file");
  r->add_option("--features-dst", reg.features_dst, "Target feature file");
  r->add_option("--init-corr", reg.init_corr, "Initial correspondences CSV");
  r->add_option("--config", reg.config, "Run configuration JSON")->required();
  r->add_option("--out", reg.out, "Output directory")->required();
  r->add_option("--ablation", reg.ablations, "Override an ablation switch, key=value");

  std::string bench_spec, bench_out;
  auto* b = app.add_subcommand("benchmark", "Run a synthetic benchmark sweep");
  b->add_option("--spec", bench_spec, "Benchmark spec JSON")->required();
  b->add_option("--out", bench_out, "Output directory")->required();

  std::string synth_spec, synth_out;
  std::optional<std::uint64_t> synth_seed;
  auto* s = app.add_subcommand("synth", "Generate one synthetic scene");
  s->add_option("--spec", synth_spec, "Scene spec JSON")->required();
  s->add_option("--seed", synth_seed, "Override the scene seed");
  s->add_option("--out", synth_out, "Output directory")->required();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score a registration result against ground truth");
  e->add_option("--source", ev.source)->required();
  e->add_option("--target", ev.target)->required();
  e->add_option("--init-corr", ev.init_corr)->required();
  e->add_option("--final-corr", ev.final_corr)->required();
  e->add_option("--transform", ev.transform)->required();
  e->add_option("--gt", ev.ground_truth)->required();
  e->add_option("--config", ev.config);
  e->add_option("--out", ev.out, "Write metrics JSON here instead of stdout");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& ex) {
    report(err, "UsageError", ex.what());
    return 64;
  }

  try {
    if (*r) return cmd_register(reg, out);
    if (*b) return cmd_benchmark(bench_spec, bench_out, out);
    if (*s) return cmd_synth(synth_spec, synth_seed, synth_out, out);
    return cmd_eval(ev, out);
  } catch (const Error& ex) {
    report(err, ex.kind(), ex.what());
    return exit_code_for(ex.kind());
  } catch (const std::exception& ex) {
    report(err, "InternalError", ex.what());
    return 70;
  }
}

}  // namespace regor
