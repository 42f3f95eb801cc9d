// Command-line front end: impute / pool / simulate / validate.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hcmm/csv.hpp"
#include "hcmm/engine.hpp"
#include "hcmm/error.hpp"
#include "hcmm/mechanism.hpp"
#include "hcmm/pooling.hpp"
#include "hcmm/population.hpp"
#include "hcmm/repeat.hpp"
#include "hcmm/schema.hpp"

namespace fs = std::filesystem;

namespace {

constexpr const char* kConfigFormatVersion = "1";

hcmm::RunConfig load_run_config(const std::string& path) {
  hcmm::RunConfig cfg = hcmm::RunConfig::from_json_file(path);
  // environment override applies to the seed only
  if (const char* env_seed = std::getenv("HCMM_SEED")) {
    cfg.seed = std::strtoull(env_seed, nullptr, 10);
  }
  return cfg;
}

int cmd_impute(const std::string& data_path, const std::string& schema_path,
               const std::string& config_path, const std::string& out_dir,
               char delimiter) {
  hcmm::Schema schema = hcmm::Schema::from_json_file(schema_path);
  hcmm::CsvTable table = hcmm::read_csv_file(data_path, delimiter);
  hcmm::RunConfig cfg = load_run_config(config_path);

  fs::create_directories(out_dir);
  for (int chain = 0; chain < cfg.chains; ++chain) {
    hcmm::RunConfig chain_cfg = cfg;
    std::string chain_dir = out_dir;
    if (cfg.chains > 1) {
      chain_cfg.seed = hcmm::Rng(cfg.seed).fork(chain + 1).engine()();
      chain_dir = out_dir + "/chain_" + std::to_string(chain + 1);
      fs::create_directories(chain_dir);
    }
    try {
      hcmm::MIOutput out =
          hcmm::run_mi(table, schema, chain_cfg, chain_dir);
      hcmm::write_mi_output(out, chain_dir);
      if (out.saturation_warning)
        std::cerr << "warning: occupied components reached a truncation "
                     "level; consider raising Kz/Kx/Ky\n";
    } catch (const hcmm::SamplerError& e) {
      std::cerr << "error:sampler: " << e.what() << "\n";
      std::cerr << "checkpoint: " << chain_dir << "/chain.ckpt\n";
      return 2;
    }
  }
  return 0;
}

int cmd_pool(const std::string& imp_dir, const std::string& schema_path,
             const std::string& estimands_path, const std::string& out_path,
             double population_size, double level, char delimiter) {
  hcmm::Schema schema = hcmm::Schema::from_json_file(schema_path);
  auto specs = hcmm::load_estimands_file(estimands_path);

  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(imp_dir)) {
    std::string name = entry.path().filename().string();
    if (name.rfind("imp_", 0) == 0 && name.size() > 4 &&
        entry.path().extension() == ".csv")
      files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.size() < 2)
    throw hcmm::InputError("need at least 2 imp_*.csv files in " + imp_dir);

  std::vector<hcmm::MixedDataset> completed;
  for (const auto& file : files)
    completed.push_back(
        hcmm::load_dataset(hcmm::read_csv_file(file, delimiter), schema));
  auto pooled = hcmm::pool_datasets(completed, specs, population_size, level);
  hcmm::write_csv_file(out_path, hcmm::pooled_rows_to_csv(pooled));
  return 0;
}

int cmd_simulate(const std::string& population_path,
                 const std::string& mechanism_path,
                 const std::string& config_path, const std::string& out_dir) {
  std::ifstream pop_in(population_path);
  if (!pop_in)
    throw hcmm::InputError("cannot open population spec: " + population_path);
  nlohmann::json pop_spec;
  try {
    pop_in >> pop_spec;
  } catch (const nlohmann::json::exception& e) {
    throw hcmm::InputError(std::string("population spec parse failure: ") +
                           e.what());
  }
  const std::string generator = pop_spec.value("generator", std::string("desk"));
  if (generator != "desk")
    throw hcmm::InputError("unknown population generator: " + generator);
  const int population_n = pop_spec.value("N", 20000);
  const std::uint64_t pop_seed = pop_spec.value("seed", 1ULL);

  hcmm::RepeatedSamplingDesign design;
  design.mechanism = hcmm::MechanismSpec::from_json_file(mechanism_path);
  design.run = load_run_config(config_path);
  std::ifstream cfg_in(config_path);
  nlohmann::json cfg_json;
  cfg_in >> cfg_json;
  design.sample_size = cfg_json.value("sample_size", 1000);
  design.replicates = cfg_json.value("replicates", 100);
  design.level = cfg_json.value("level", 0.95);

  hcmm::Rng pop_rng(pop_seed);
  hcmm::Population pop = hcmm::build_desk_population(population_n, pop_rng);

  fs::create_directories(out_dir);
  std::ofstream log(out_dir + "/replicates.log");
  auto progress = [&log](int done, int total) {
    log << "replicate " << done << "/" << total << " done\n";
    log.flush();
  };
  hcmm::Scoreboard board =
      hcmm::run_repeated_sampling(pop, design, design.run.seed, progress);
  hcmm::write_csv_file(out_dir + "/scoreboard.csv",
                       hcmm::scoreboard_to_csv(board));
  for (const auto& failure : board.failures) log << failure << "\n";
  std::cout << "replicates: " << board.replicates_attempted - board.replicates_failed
            << " ok, " << board.replicates_failed << " failed\n";
  return 0;
}

int cmd_validate(const std::string& data_path, const std::string& schema_path,
                 char delimiter) {
  hcmm::Schema schema = hcmm::Schema::from_json_file(schema_path);
  hcmm::MixedDataset ds =
      hcmm::load_dataset(hcmm::read_csv_file(data_path, delimiter), schema);
  long missing_x = ds.Rx.count(), missing_y = ds.Ry.count();
  std::cout << "ok: " << ds.n << " records, " << ds.p()
            << " categorical and " << ds.q() << " continuous columns, "
            << missing_x + missing_y << " missing cells\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HCMM-LD multiple imputation engine"};
  app.set_version_flag("--version", std::string(hcmm::kEngineVersion) +
                                        " (config format " +
                                        kConfigFormatVersion + ")");
  app.require_subcommand(1);

  std::string data_path, schema_path, config_path, out_path;
  std::string estimands_path, population_path, mechanism_path;
  double population_size = 0.0, level = 0.95;
  std::string delimiter = ",";
  int threads = 1;
  app.add_option("--threads", threads, "Worker thread cap");

  auto* impute = app.add_subcommand("impute", "Produce M completed datasets");
  impute->add_option("--data", data_path)->required();
  impute->add_option("--schema", schema_path)->required();
  impute->add_option("--config", config_path)->required();
  impute->add_option("--out", out_path)->required();
  impute->add_option("--delimiter", delimiter);

  auto* pool = app.add_subcommand("pool", "Rubin-combine completed datasets");
  pool->add_option("--imputations", data_path)->required();
  pool->add_option("--schema", schema_path)->required();
  pool->add_option("--estimands", estimands_path)->required();
  pool->add_option("--out", out_path)->required();
  pool->add_option("--population-size", population_size);
  pool->add_option("--level", level);
  pool->add_option("--delimiter", delimiter);

  auto* simulate =
      app.add_subcommand("simulate", "Repeated-sampling evaluation study");
  simulate->add_option("--population", population_path)->required();
  simulate->add_option("--mechanism", mechanism_path)->required();
  simulate->add_option("--config", config_path)->required();
  simulate->add_option("--out", out_path)->required();

  auto* validate = app.add_subcommand("validate", "Lint a data/schema pair");
  validate->add_option("--data", data_path)->required();
  validate->add_option("--schema", schema_path)->required();
  validate->add_option("--delimiter", delimiter);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return 1;
  }

  const char delim = delimiter.empty() ? ',' : delimiter[0];
  try {
    if (impute->parsed())
      return cmd_impute(data_path, schema_path, config_path, out_path, delim);
    if (pool->parsed())
      return cmd_pool(data_path, schema_path, estimands_path, out_path,
                      population_size, level, delim);
    if (simulate->parsed())
      return cmd_simulate(population_path, mechanism_path, config_path,
                          out_path);
    if (validate->parsed())
      return cmd_validate(data_path, schema_path, delim);
  } catch (const hcmm::InputError& e) {
    std::cerr << "error:input: " << e.what() << "\n";
    return 1;
  } catch (const hcmm::SamplerError& e) {
    std::cerr << "error:sampler: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error:internal: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
