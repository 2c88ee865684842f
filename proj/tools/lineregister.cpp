#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "linereg/io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRegistrationFailed = 3;
constexpr int kExitIo = 4;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path + "'");
}

struct RegisterArgs {
  std::string lines2d, lines3d, intrinsics, out, config;
  std::uint64_t seed = 0;
  bool no_timings = false;
  int threads = 0;
};

int run_register(const RegisterArgs& args) {
  const auto segs2d = linereg::parse_segments_2d(read_file(args.lines2d));
  const auto segs3d = linereg::parse_segments_3d(read_file(args.lines3d));
  const auto K = linereg::parse_intrinsics(read_file(args.intrinsics));

  linereg::PipelineConfig cfg;
  if (!args.config.empty()) {
    linereg::apply_pipeline_overrides(read_file(args.config), cfg);
  }
  cfg.cluster.rng_seed = linereg::mix_seed(args.seed + 1);
  cfg.ransac.rng_seed = linereg::mix_seed(args.seed + 2);
  if (args.threads > 0) cfg.n_threads = args.threads;

  try {
    const auto report = linereg::register_image(segs2d, segs3d, K, cfg);
    write_file(args.out, linereg::write_report(report, !args.no_timings));
    std::cout << "registered: " << report.correspondences.size()
              << " correspondences, ransac score " << report.ransac_score
              << ", report written to " << args.out << "\n";
  } catch (const linereg::RegistrationError& err) {
    std::cerr << "registration failed: " << err.what() << "\n";
    return kExitRegistrationFailed;
  }
  return kExitOk;
}

struct SimulateArgs {
  std::string config, out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int run_simulate(const SimulateArgs& args) {
  linereg::SimConfig cfg = linereg::parse_sim_config(read_file(args.config));
  if (args.seed_set) cfg.rng_seed = args.seed;

  std::mt19937_64 rng(cfg.rng_seed);
  const linereg::Scene scene = linereg::generate_scene(cfg, rng);

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(args.out_dir, ec);
  if (ec) throw IoError("cannot create directory '" + args.out_dir + "'");

  const fs::path dir(args.out_dir);
  write_file((dir / "lines2d.csv").string(), linereg::write_segments_2d(scene.segs2d));
  write_file((dir / "lines3d.csv").string(), linereg::write_segments_3d(scene.segs3d));
  write_file((dir / "intrinsics.txt").string(), linereg::write_intrinsics(scene.K));
  write_file((dir / "gt_pose.txt").string(), linereg::write_pose(scene.gt));
  write_file((dir / "pairing.csv").string(), linereg::write_pairing(scene.pairing));
  std::cout << "scene written to " << args.out_dir << ": "
            << scene.segs2d.size() << " 2D segments, " << scene.segs3d.size()
            << " 3D segments\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string campaign, out;
  bool no_timings = false;
  int threads = 0;
};

int run_evaluate(const EvaluateArgs& args) {
  const auto spec = linereg::parse_campaign_config(read_file(args.campaign));
  linereg::PipelineConfig pipeline = spec.pipeline;
  if (args.threads > 0) pipeline.n_threads = args.threads;
  const auto rows = linereg::campaign(spec.sweep, pipeline, spec.with_baseline,
                                      spec.master_seed, pipeline.n_threads);
  write_file(args.out, linereg::campaign_csv(rows, !args.no_timings));
  std::cout << "campaign table written to " << args.out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D-3D line registration: pose estimation for a single image "
               "against an untextured point cloud"};
  app.require_subcommand(1);

  RegisterArgs reg;
  auto* reg_cmd = app.add_subcommand(
      "register", "Register an image's 2D segments to a 3D segment set");
  reg_cmd->add_option("--lines2d", reg.lines2d, "2D segment CSV")->required();
  reg_cmd->add_option("--lines3d", reg.lines3d, "3D segment CSV")->required();
  reg_cmd->add_option("--intrinsics", reg.intrinsics, "intrinsics file")->required();
  reg_cmd->add_option("--out", reg.out, "output report path")->required();
  reg_cmd->add_option("--seed", reg.seed, "RNG seed");
  reg_cmd->add_option("--config", reg.config, "key=value overrides");
  reg_cmd->add_flag("--no-timings", reg.no_timings, "omit timing lines");
  reg_cmd->add_option("--threads", reg.threads, "worker threads (0 = default)");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic scene");
  sim_cmd->add_option("--config", sim.config, "simulation config")->required();
  sim_cmd->add_option("--out-dir", sim.out_dir, "output directory")->required();
  sim_cmd->add_option("--seed", sim.seed, "override config seed")
      ->each([&](const std::string&) { sim.seed_set = true; });

  EvaluateArgs eval;
  auto* eval_cmd =
      app.add_subcommand("evaluate", "Run a Monte Carlo benchmark campaign");
  eval_cmd->add_option("--campaign", eval.campaign, "campaign config")->required();
  eval_cmd->add_option("--out", eval.out, "output CSV path")->required();
  eval_cmd->add_flag("--no-timings", eval.no_timings, "zero the runtime column");
  eval_cmd->add_option("--threads", eval.threads, "worker threads (0 = default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (reg_cmd->parsed()) return run_register(reg);
    if (sim_cmd->parsed()) return run_simulate(sim);
    if (eval_cmd->parsed()) return run_evaluate(eval);
  } catch (const linereg::ParseError& err) {
    std::cerr << "input error: " << err.what() << "\n";
    return kExitIo;
  } catch (const IoError& err) {
    std::cerr << "io error: " << err.what() << "\n";
    return kExitIo;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
