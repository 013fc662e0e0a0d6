// Command-line front end: simulate | fit | select | compare.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bcfm/baselines.hpp"
#include "bcfm/io.hpp"
#include "bcfm/selection.hpp"
#include "bcfm/simulate.hpp"
#include "bcfm/study.hpp"

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string data_path;
  std::string preset;
  std::string out_dir = ".";
  std::string config_path;
  int clusters = 0;
  int factors = 0;
  int k_min = 1;
  int k_max = 5;
  int f_min = 1;
  int f_max = 5;
  long iterations = 50000;
  int thin = 10;
  int burnin = 1500;
  std::uint64_t seed = 0;
  bool standardize = false;
  std::vector<double> separations = {0.1, 0.5, 1.0};
  int replicates = 20;
};

bcfm::SimSpec preset_spec(const std::string& name) {
  if (name == "sec4.1") return bcfm::SimSpec::benchmark(0.5);
  throw bcfm::ConfigError("unknown preset \"" + name + "\" (available: sec4.1)");
}

// Column-wise standardization to mean 0, sd 1.
bcfm::Dataset standardize_columns(const bcfm::Dataset& data) {
  bcfm::Matrix Z = data.Y;
  for (int j = 0; j < data.R(); ++j) {
    const double mean = Z.col(j).mean();
    const double var = (Z.col(j).array() - mean).square().sum() / (data.n() - 1);
    if (!(var > 0.0))
      throw bcfm::DataError("variable " + data.variable_names[j] +
                            " is constant; cannot standardize");
    Z.col(j) = (Z.col(j).array() - mean) / std::sqrt(var);
  }
  return bcfm::Dataset::create(std::move(Z), data.variable_names);
}

// Values from the JSON config file fill in flags the user did not pass.
class ConfigFile {
 public:
  ConfigFile(const CLI::App& cmd, const std::string& path) : cmd_(cmd) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw bcfm::DataError("cannot open config file " + path);
    try {
      doc_ = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& ex) {
      throw bcfm::DataError("config file " + path + ": " + ex.what());
    }
    if (!doc_.is_object()) throw bcfm::DataError("config file " + path + ": not a JSON object");
  }

  template <typename T>
  void fill(const std::string& flag, const std::string& key, T& value) const {
    if (!doc_.contains(key) || cmd_.count(flag) > 0) return;
    try {
      value = doc_.at(key).get<T>();
    } catch (const nlohmann::json::exception& ex) {
      throw bcfm::DataError("config key \"" + key + "\": " + ex.what());
    }
  }

 private:
  const CLI::App& cmd_;
  nlohmann::json doc_;
};

void fill_common(const ConfigFile& cfg, Options& opt) {
  cfg.fill("--data", "data", opt.data_path);
  cfg.fill("--preset", "preset", opt.preset);
  cfg.fill("--out", "out", opt.out_dir);
  cfg.fill("--iterations", "iterations", opt.iterations);
  cfg.fill("--thin", "thin", opt.thin);
  cfg.fill("--burnin", "burnin", opt.burnin);
  cfg.fill("--seed", "seed", opt.seed);
  cfg.fill("--standardize", "standardize", opt.standardize);
}

bcfm::Dataset load_dataset(const Options& opt) {
  const bool have_data = !opt.data_path.empty();
  const bool have_preset = !opt.preset.empty();
  if (have_data == have_preset)
    throw bcfm::ConfigError("pass exactly one of --data or --preset");
  bcfm::Dataset data = [&] {
    if (have_data) return bcfm::read_dataset(opt.data_path);
    bcfm::SimSpec spec = preset_spec(opt.preset);
    spec.seed = opt.seed;
    return bcfm::generate_dataset(spec).data;
  }();
  return opt.standardize ? standardize_columns(data) : data;
}

fs::path prepare_out_dir(const Options& opt) {
  const fs::path dir(opt.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw bcfm::DataError("cannot create output directory " + dir.string());
  return dir;
}

bcfm::ChainConfig chain_config(const Options& opt) {
  bcfm::ChainConfig config;
  config.iterations = opt.iterations;
  config.thin = opt.thin;
  config.burnin_draws = opt.burnin;
  config.seed = opt.seed;
  config.validate();
  return config;
}

int run_simulate(const Options& opt) {
  bcfm::SimSpec spec = preset_spec(opt.preset.empty() ? "sec4.1" : opt.preset);
  spec.seed = opt.seed;
  const bcfm::SimulatedData sim = bcfm::generate_dataset(spec);
  const fs::path dir = prepare_out_dir(opt);
  bcfm::write_dataset((dir / "data.csv").string(), sim.data);
  bcfm::write_truth((dir / "truth.json").string(), sim.truth);
  std::printf("wrote %s and %s (n=%d, R=%d, K=%d, F=%d, separation=%s)\n",
              (dir / "data.csv").c_str(), (dir / "truth.json").c_str(), spec.n, spec.R, spec.K,
              spec.F, bcfm::format_double(spec.separation).c_str());
  return 0;
}

int run_fit(const Options& opt) {
  if (opt.clusters < 1 || opt.factors < 1)
    throw bcfm::ConfigError("fit requires --clusters and --factors (both >= 1)");
  const bcfm::Dataset data = load_dataset(opt);
  const bcfm::ModelDims dims{opt.clusters, opt.factors};
  const fs::path dir = prepare_out_dir(opt);
  try {
    const bcfm::ModelFit fit = bcfm::fit_model(data, dims, chain_config(opt));
    bcfm::write_summaries((dir / "summaries.json").string(), fit.chain);
    bcfm::write_assignments((dir / "assignments.csv").string(), fit.chain);
    bcfm::write_trace((dir / "trace.csv").string(), fit.chain);
    std::printf("fit K=%d F=%d: loglik=%s ic=%s; wrote summaries.json, assignments.csv, "
                "trace.csv under %s\n",
                dims.K, dims.F, bcfm::format_double(fit.ic.loglik).c_str(),
                bcfm::format_double(fit.ic.ic).c_str(), dir.c_str());
    return 0;
  } catch (const bcfm::ChainError& ex) {
    const fs::path checkpoint = dir / "checkpoint.json";
    bcfm::write_checkpoint(checkpoint.string(), ex);
    std::fprintf(stderr, "chain failed: %s\ncheckpoint written to %s\n", ex.what(),
                 checkpoint.c_str());
    return 3;
  }
}

int run_select(const Options& opt) {
  const bcfm::Dataset data = load_dataset(opt);
  bcfm::GridSpec grid;
  grid.k_min = opt.k_min;
  grid.k_max = opt.k_max;
  grid.f_min = opt.f_min;
  grid.f_max = opt.f_max;
  grid.chain = chain_config(opt);
  const bcfm::GridResult result = bcfm::grid_search(data, grid);
  const fs::path dir = prepare_out_dir(opt);
  bcfm::write_ic_table((dir / "ic_table.csv").string(), result.table);
  for (const bcfm::ICRecord& rec : result.table) {
    if (rec.K == result.best_K && rec.F == result.best_F) {
      bcfm::write_best((dir / "best.json").string(), rec);
      std::printf("best model: K=%d F=%d (ic=%s); wrote ic_table.csv and best.json under %s\n",
                  rec.K, rec.F, bcfm::format_double(rec.ic).c_str(), dir.c_str());
      break;
    }
  }
  return 0;
}

int run_compare(const Options& opt) {
  bcfm::CompareSpec spec;
  spec.separations = opt.separations;
  spec.replicates = opt.replicates;
  spec.grid.k_min = opt.k_min;
  spec.grid.k_max = opt.k_max;
  spec.grid.f_min = opt.f_min;
  spec.grid.f_max = opt.f_max;
  spec.grid.chain = chain_config(opt);
  spec.seed = opt.seed;
  const bcfm::CompareResult result =
      bcfm::run_compare(spec, +[](const std::string& line) {
        std::fprintf(stderr, "%s\n", line.c_str());
      });
  const fs::path dir = prepare_out_dir(opt);
  bcfm::write_compare_rows((dir / "compare_replicates.csv").string(), result.rows);
  bcfm::write_compare_summary((dir / "compare_summary.csv").string(), result.summary);
  std::printf("wrote compare_replicates.csv and compare_summary.csv under %s\n", dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian clustering factor models"};
  app.require_subcommand(1);
  Options opt;

  const auto add_common = [&](CLI::App* cmd, bool chain_flags) {
    cmd->add_option("--out", opt.out_dir, "output directory (created if missing)");
    cmd->add_option("--seed", opt.seed, "root seed; every stage derives from it");
    cmd->add_option("--config", opt.config_path,
                    "JSON file supplying any flag not passed on the command line");
    if (chain_flags) {
      cmd->add_option("--iterations", opt.iterations, "Gibbs iterations");
      cmd->add_option("--thin", opt.thin, "keep one draw per this many iterations");
      cmd->add_option("--burnin", opt.burnin, "retained draws discarded as burn-in");
    }
  };
  const auto add_data = [&](CLI::App* cmd) {
    cmd->add_option("--data", opt.data_path, "input CSV (header + numeric rows)");
    cmd->add_option("--preset", opt.preset, "built-in synthetic design (sec4.1)");
    cmd->add_flag("--standardize", opt.standardize, "center and scale each variable first");
  };
  const auto add_grid = [&](CLI::App* cmd) {
    cmd->add_option("--kmin", opt.k_min, "smallest cluster count");
    cmd->add_option("--kmax", opt.k_max, "largest cluster count");
    cmd->add_option("--fmin", opt.f_min, "smallest factor count");
    cmd->add_option("--fmax", opt.f_max, "largest factor count");
  };

  CLI::App* cmd_sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  cmd_sim->add_option("--preset", opt.preset, "built-in synthetic design (sec4.1)");
  add_common(cmd_sim, false);

  CLI::App* cmd_fit = app.add_subcommand("fit", "run one model and write its posterior");
  add_data(cmd_fit);
  cmd_fit->add_option("--clusters", opt.clusters, "number of mixture components");
  cmd_fit->add_option("--factors", opt.factors, "number of latent factors");
  add_common(cmd_fit, true);

  CLI::App* cmd_select = app.add_subcommand("select", "score a (K, F) grid and pick the best");
  add_data(cmd_select);
  add_grid(cmd_select);
  add_common(cmd_select, true);

  CLI::App* cmd_compare =
      app.add_subcommand("compare", "selection study against the PCA+k-means reference");
  cmd_compare->add_option("--separations", opt.separations, "cluster separations to simulate")
      ->delimiter(',');
  cmd_compare->add_option("--replicates", opt.replicates, "datasets per separation");
  add_grid(cmd_compare);
  add_common(cmd_compare, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return 1;
  }

  try {
    CLI::App* cmd = app.get_subcommands().front();
    const ConfigFile cfg(*cmd, opt.config_path);
    fill_common(cfg, opt);
    if (cmd == cmd_fit) {
      cfg.fill("--clusters", "clusters", opt.clusters);
      cfg.fill("--factors", "factors", opt.factors);
    }
    if (cmd == cmd_select || cmd == cmd_compare) {
      cfg.fill("--kmin", "kmin", opt.k_min);
      cfg.fill("--kmax", "kmax", opt.k_max);
      cfg.fill("--fmin", "fmin", opt.f_min);
      cfg.fill("--fmax", "fmax", opt.f_max);
    }
    if (cmd == cmd_compare) {
      cfg.fill("--separations", "separations", opt.separations);
      cfg.fill("--replicates", "replicates", opt.replicates);
    }

    if (cmd == cmd_sim) return run_simulate(opt);
    if (cmd == cmd_fit) return run_fit(opt);
    if (cmd == cmd_select) return run_select(opt);
    return run_compare(opt);
  } catch (const bcfm::ConfigError& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  } catch (const bcfm::DataError& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 2;
  } catch (const bcfm::SmallClusterError& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 2;
  } catch (const bcfm::Error& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 3;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 3;
  }
}
