// Experiment runner for random polynomial singularities on spheres.
//
// Subcommands mirror the experiment kinds (zeros, crit, minima, fold, cusp,
// components, semicont, coupled, knot, kacrice, scaling) plus `report` and
// `verify`. Exit codes: 0 success, 2 acceptance failure, 3 config error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "singulab/report.hpp"
#include "singulab/verify.hpp"

namespace {

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("SINGULAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  return hw > 0 ? hw : 2;
}

struct CommonFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "experiment config file (key = value lines)");
  cmd->add_option("--seed", flags.seed, "root seed override")->each([&](const std::string&) {
    flags.seed_set = true;
  });
  cmd->add_option("--threads", flags.threads, "worker threads (default: SINGULAB_THREADS or all)");
  cmd->add_option("--out", flags.out_dir, "output directory");
}

int run_kind(const std::string& kind, const CommonFlags& flags) {
  singulab::ExperimentConfig cfg;
  if (!flags.config_path.empty()) {
    cfg = singulab::parse_config_file(flags.config_path);
  } else {
    throw singulab::ConfigError("--config is required for experiment subcommands");
  }
  cfg.kind = kind;
  if (flags.seed_set) cfg.seed = flags.seed;
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  cfg.threads = resolve_threads(flags.threads > 0 ? flags.threads : cfg.threads);
  singulab::validate_config(cfg);

  std::cout << "running " << cfg.id() << " on " << cfg.threads << " threads ("
            << cfg.degrees.size() << " degrees x " << cfg.trials << " trials)\n";
  const auto records = singulab::run_experiment(cfg);
  singulab::emit_report(cfg, records);
  for (const auto& s : singulab::summarize(records)) {
    std::cout << "  d=" << s.d << " " << s.statistic << ": mean " << s.mean << " se " << s.se
              << " n " << s.n;
    if (s.discard_rate > 0) std::cout << " (discard rate " << s.discard_rate << ")";
    std::cout << "\n";
  }

  namespace fs = std::filesystem;
  const std::string base = (fs::path(cfg.out_dir) / cfg.id()).string();
  if (kind == "components" || kind == "knot") {
    // integer-statistic histograms, one dump per degree
    const std::string stat = kind == "knot" ? "crossings" : "interior_b0";
    for (int d : cfg.degrees) {
      singulab::Histogram h;
      for (const auto& r : records)
        if (r.d == d && r.statistic == stat && !r.discarded)
          h.add(static_cast<int>(std::lround(r.value)));
      std::ofstream os(base + "_hist_d" + std::to_string(d) + ".txt");
      singulab::dump_histogram(h, os);
    }
  }
  if (kind == "kacrice") {
    for (int d : cfg.degrees) {
      singulab::KernelSpec spec{singulab::KernelSpec::Kind::RescaledKostlan, d, cfg.m, cfg.m};
      std::ofstream os(base + "_density_d" + std::to_string(d) + ".txt");
      singulab::dump_density_profile(spec, 64, cfg.mc_samples, singulab::hash2(cfg.seed, d), os);
    }
  }
  std::cout << "artifacts under " << cfg.out_dir << "/" << cfg.id() << ".{csv,json,svg}\n";
  return 0;
}

int run_report(const std::string& records_path, const std::string& curves_path,
               const std::string& out_dir) {
  namespace fs = std::filesystem;
  if (!records_path.empty()) {
    std::ifstream is(records_path);
    if (!is) throw singulab::IoError("cannot open records: " + records_path);
    const auto records = singulab::read_csv(is);
    if (records.empty()) throw singulab::IoError("no records in " + records_path);
    const std::string id = records.front().experiment_id;
    const std::string primary = records.front().statistic;
    std::unique_ptr<singulab::ScalingFit> fit;
    try {
      fit = std::make_unique<singulab::ScalingFit>(singulab::scaling_fit(records, primary));
    } catch (const singulab::ConfigError&) {
    }
    fs::create_directories(out_dir);
    const std::string base = (fs::path(out_dir) / id).string();
    singulab::write_json_file(singulab::summary_json(id, records, fit.get()), base + ".json");
    if (fit) {
      std::ofstream os(base + ".svg");
      os << singulab::svg_scaling_plot(records, primary, fit.get());
      std::cout << "fit: slope " << fit->slope << " +/- " << fit->slope_se << " (r2 " << fit->r2
                << ")\n";
    }
    std::cout << "summary written to " << base << ".json\n";
  }
  if (!curves_path.empty()) {
    std::ifstream is(curves_path);
    if (!is) throw singulab::IoError("cannot open curve dump: " + curves_path);
    const auto comps = singulab::parse_curve_dump(is);
    fs::create_directories(out_dir);
    const std::string svg_path =
        (fs::path(out_dir) / (fs::path(curves_path).stem().string() + ".svg")).string();
    std::ofstream os(svg_path);
    os << singulab::svg_curves(comps);
    std::cout << comps.size() << " components rendered to " << svg_path << "\n";
  }
  if (records_path.empty() && curves_path.empty())
    throw singulab::ConfigError("report needs --records and/or --curves");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for singularities of random polynomial maps on spheres"};
  app.require_subcommand(1);

  std::map<std::string, CommonFlags> flags;
  for (const auto& kind : singulab::experiment_kinds()) {
    CLI::App* cmd = app.add_subcommand(kind, "run the " + kind + " experiment");
    add_common(cmd, flags[kind]);
  }

  CommonFlags report_flags;
  std::string records_path, curves_path;
  CLI::App* report = app.add_subcommand("report", "summaries, fits and plots from records");
  report->add_option("--records", records_path, "records CSV produced by an experiment run");
  report->add_option("--curves", curves_path, "curve dump to render as SVG");
  report->add_option("--out", report_flags.out_dir, "output directory")->default_val(".");

  CommonFlags verify_flags;
  CLI::App* verify = app.add_subcommand("verify", "run the full acceptance suite");
  verify->add_option("--threads", verify_flags.threads, "worker threads");
  verify->add_option("--out", verify_flags.out_dir, "directory for the acceptance log");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    for (const auto& kind : singulab::experiment_kinds())
      if (app.got_subcommand(kind)) return run_kind(kind, flags[kind]);
    if (app.got_subcommand("report"))
      return run_report(records_path, curves_path, report_flags.out_dir);
    if (app.got_subcommand("verify")) {
      const int threads = resolve_threads(verify_flags.threads);
      std::cout << "running acceptance suite on " << threads << " threads\n";
      const auto results = singulab::run_acceptance(threads, &std::cout);
      if (!verify_flags.out_dir.empty()) {
        std::filesystem::create_directories(verify_flags.out_dir);
        std::ofstream os(std::filesystem::path(verify_flags.out_dir) / "acceptance.txt");
        for (const auto& r : results)
          os << (r.pass ? "PASS" : "FAIL") << "  criterion " << r.id << ": " << r.name << " -- "
             << r.detail << "\n";
      }
      return singulab::all_passed(results) ? 0 : 2;
    }
  } catch (const singulab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
