#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hcmm/checkpoint.hpp"
#include "hcmm/engine.hpp"
#include "hcmm/error.hpp"
#include "hcmm/gibbs.hpp"
#include "hcmm/population.hpp"

using namespace hcmm;

namespace {

Schema mixed_schema() {
  return Schema::from_json_text(R"({
    "columns": [
      {"name": "sex", "kind": "categorical", "levels": ["F", "M"]},
      {"name": "grp", "kind": "categorical", "levels": ["a", "b", "c"]},
      {"name": "age", "kind": "continuous"},
      {"name": "earn", "kind": "semicontinuous"}
    ]})");
}

CsvTable toy_table(int n, double missing_rate, std::uint64_t seed) {
  Rng rng(seed);
  CsvTable t;
  t.header = {"sex", "grp", "age", "earn"};
  char buf[32];
  for (int i = 0; i < n; ++i) {
    std::vector<std::string> row(4);
    auto cell = [&](double v) {
      std::snprintf(buf, sizeof buf, "%.6g", v);
      return std::string(buf);
    };
    row[0] = rng.uniform() < 0.5 ? "F" : "M";
    row[1] = std::vector<std::string>{"a", "b", "c"}[rng.uniform_int(0, 2)];
    row[2] = cell(rng.normal(40.0, 10.0));
    row[3] = rng.uniform() < 0.3 ? "0" : cell(std::exp(rng.normal(7.0, 0.5)));
    for (auto& c : row)
      if (rng.uniform() < missing_rate) c = "";
    t.rows.push_back(std::move(row));
  }
  return t;
}

RunConfig small_config() {
  RunConfig cfg;
  cfg.iterations = 30;
  cfg.burn_in = 10;
  cfg.thin = 10;
  cfg.m_datasets = 2;
  cfg.seed = 42;
  cfg.checkpoint_every = 0;
  cfg.trunc = {3, 5, 4};
  return cfg;
}

}  // namespace

TEST_CASE("run_mi: retention rule picks the last M thin multiples") {
  CsvTable t = toy_table(40, 0.1, 201);
  MIOutput out = run_mi(t, mixed_schema(), small_config());
  REQUIRE(out.datasets.size() == 2);
  REQUIRE(out.dataset_sweeps.size() == 2);
  CHECK(out.dataset_sweeps[0] == 20);
  CHECK(out.dataset_sweeps[1] == 30);
}

TEST_CASE("run_mi: bit-reproducible under a fixed seed") {
  CsvTable t = toy_table(35, 0.15, 202);
  Schema schema = mixed_schema();
  RunConfig cfg = small_config();
  MIOutput a = run_mi(t, schema, cfg);
  MIOutput b = run_mi(t, schema, cfg);
  REQUIRE(a.datasets.size() == b.datasets.size());
  for (std::size_t m = 0; m < a.datasets.size(); ++m) {
    CHECK(a.datasets[m].header == b.datasets[m].header);
    CHECK(a.datasets[m].rows == b.datasets[m].rows);
  }
  CHECK(a.manifest_json == b.manifest_json);

  RunConfig other = cfg;
  other.seed = 43;
  MIOutput c = run_mi(t, schema, other);
  CHECK(a.datasets[0].rows != c.datasets[0].rows);
}

TEST_CASE("run_mi: observed cells identical across input and all outputs") {
  CsvTable t = toy_table(40, 0.2, 203);
  Schema schema = mixed_schema();
  MIOutput out = run_mi(t, schema, small_config());
  MixedDataset input = load_dataset(t, schema);
  std::uint64_t base = input.observed_checksum();
  for (const auto& d : out.datasets) {
    MixedDataset completed = load_dataset(d, schema);
    // no missing cells remain
    CHECK(completed.Rx.count() == 0);
    CHECK(completed.Ry.count() == 0);
    // overlaying the original masks yields the original observed content
    completed.Rx = input.Rx;
    completed.Ry = input.Ry;
    for (int i = 0; i < completed.n; ++i) {
      for (int j = 0; j < completed.p(); ++j)
        if (input.Rx(i, j)) completed.X(i, j) = 0;
      for (int v = 0; v < completed.q(); ++v)
        if (input.Ry(i, v))
          completed.Y(i, v) = std::numeric_limits<double>::quiet_NaN();
    }
    CHECK(completed.observed_checksum() == base);
  }
}

TEST_CASE("run_mi: no-missing input yields M identical copies") {
  CsvTable t = toy_table(30, 0.0, 204);
  MIOutput out = run_mi(t, mixed_schema(), small_config());
  REQUIRE(out.datasets.size() == 2);
  CHECK(out.datasets[0].rows == out.datasets[1].rows);
  // values round-trip to the input
  Schema schema = mixed_schema();
  MixedDataset input = load_dataset(t, schema);
  MixedDataset back = load_dataset(out.datasets[0], schema);
  CHECK(back.X == input.X);
  for (int i = 0; i < input.n; ++i)
    for (int v = 0; v < input.q(); ++v)
      CHECK(back.Y(i, v) == doctest::Approx(input.Y(i, v)).epsilon(1e-12));
}

TEST_CASE("run_mi: semicontinuous imputations follow the recomposition rule") {
  CsvTable t = toy_table(60, 0.25, 205);
  Schema schema = mixed_schema();
  MIOutput out = run_mi(t, schema, small_config());
  int earn_col = 3;
  int zeros = 0, positives = 0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (!t.rows[i][earn_col].empty()) continue;  // only imputed cells
    const std::string& cell = out.datasets[0].rows[i][earn_col];
    REQUIRE_FALSE(cell.empty());
    double v = std::stod(cell);
    if (v == 0.0)
      ++zeros;
    else
      ++positives;
  }
  CHECK(zeros + positives > 0);
}

TEST_CASE("run_mi: trace rows carry diagnostics and constant stats when fully observed") {
  CsvTable t = toy_table(30, 0.0, 206);
  MIOutput out = run_mi(t, mixed_schema(), small_config());
  REQUIRE_FALSE(out.trace.empty());
  const auto& first = out.trace.front();
  REQUIRE(first.cont_stats.size() == 2);  // age, earn
  for (const auto& row : out.trace) {
    CHECK(std::isfinite(row.log_joint));
    CHECK(row.occupied_z >= 1);
    for (std::size_t v = 0; v < row.cont_stats.size(); ++v)
      for (int k = 0; k < 5; ++k)
        CHECK(row.cont_stats[v][k] ==
              doctest::Approx(first.cont_stats[v][k]).epsilon(1e-9));
  }
  CsvTable trace = trace_to_csv(out.trace, out.frame);
  CHECK(trace.rows.size() == out.trace.size());
  CHECK(trace.header[0] == "sweep");
}

TEST_CASE("run_mi: manifest is valid JSON recording config and seed") {
  CsvTable t = toy_table(25, 0.1, 207);
  RunConfig cfg = small_config();
  cfg.seed = 777;
  MIOutput out = run_mi(t, mixed_schema(), cfg);
  nlohmann::json m = nlohmann::json::parse(out.manifest_json);
  CHECK(m["seed"].get<std::uint64_t>() == 777);
  CHECK(m["n_records"].get<int>() == 25);
  CHECK(m["dataset_sweeps"].size() == 2);
  CHECK(m.contains("config"));
  CHECK(m.contains("version"));
}

TEST_CASE("run_mi: config validation failures reject the run") {
  CsvTable t = toy_table(20, 0.1, 208);
  RunConfig cfg = small_config();
  cfg.burn_in = 50;
  CHECK_THROWS_AS(run_mi(t, mixed_schema(), cfg), InputError);
}

TEST_CASE("write_mi_output emits imp files, manifest and trace") {
  namespace fs = std::filesystem;
  CsvTable t = toy_table(25, 0.1, 209);
  MIOutput out = run_mi(t, mixed_schema(), small_config());
  std::string dir = (fs::temp_directory_path() / "hcmm_engine_test").string();
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_mi_output(out, dir);
  CHECK(fs::exists(dir + "/imp_01.csv"));
  CHECK(fs::exists(dir + "/imp_02.csv"));
  CHECK_FALSE(fs::exists(dir + "/imp_03.csv"));
  CHECK(fs::exists(dir + "/manifest"));
  CHECK(fs::exists(dir + "/trace.csv"));
  CsvTable back = read_csv_file(dir + "/imp_01.csv");
  CHECK(back.rows == out.datasets[0].rows);
  fs::remove_all(dir);
}

TEST_CASE("checkpoint: save/load resumes a chain bit-exactly") {
  Schema schema = mixed_schema();
  CsvTable t = toy_table(30, 0.2, 210);
  ModelFrame frame = ModelFrame::build(t, schema);
  const MixedDataset& ds = frame.model_data();
  TruncationConfig trunc{3, 4, 3};
  Rng rng(301);
  ModelState st = init_state(ds, trunc, PriorConfig::defaults(ds), rng);
  for (int s = 0; s < 5; ++s) gibbs_sweep(st, ds, rng, false);

  std::stringstream buf;
  save_checkpoint(buf, {5, st, rng});

  // continue the original chain
  for (int s = 0; s < 5; ++s) gibbs_sweep(st, ds, rng, false);

  // resume from the snapshot and replay
  Checkpoint resumed = load_checkpoint(buf, ds);
  CHECK(resumed.sweep == 5);
  for (int s = 0; s < 5; ++s)
    gibbs_sweep(resumed.state, ds, resumed.rng, false);

  CHECK(resumed.state.Z == st.Z);
  CHECK(resumed.state.completed_x == st.completed_x);
  CHECK(resumed.state.completed_y == st.completed_y);
  CHECK(resumed.state.lambda == st.lambda);
  CHECK(resumed.state.alpha == st.alpha);
  CHECK(resumed.state.B[0] == st.B[0]);
}

TEST_CASE("checkpoint: rejects corrupted headers and shape mismatches") {
  Schema schema = mixed_schema();
  CsvTable t = toy_table(20, 0.1, 211);
  ModelFrame frame = ModelFrame::build(t, schema);
  const MixedDataset& ds = frame.model_data();
  Rng rng(302);
  ModelState st =
      init_state(ds, {2, 3, 2}, PriorConfig::defaults(ds), rng);

  std::stringstream buf;
  save_checkpoint(buf, {1, st, rng});
  std::string blob = buf.str();
  blob[0] ^= 0x5a;  // clobber the magic number
  std::istringstream broken(blob);
  CHECK_THROWS_AS(load_checkpoint(broken, ds), InputError);

  ModelFrame other = ModelFrame::build(toy_table(21, 0.1, 212), schema);
  std::istringstream ok(buf.str());
  CHECK_THROWS_AS(load_checkpoint(ok, other.model_data()), InputError);
}

TEST_CASE("run_mi writes checkpoints on the configured cadence") {
  namespace fs = std::filesystem;
  std::string dir = (fs::temp_directory_path() / "hcmm_ckpt_test").string();
  fs::remove_all(dir);
  fs::create_directories(dir);
  CsvTable t = toy_table(20, 0.1, 213);
  RunConfig cfg = small_config();
  cfg.checkpoint_every = 10;
  run_mi(t, mixed_schema(), cfg, dir);
  CHECK(fs::exists(dir + "/chain.ckpt"));
  fs::remove_all(dir);
}
