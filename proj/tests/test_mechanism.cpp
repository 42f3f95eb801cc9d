#include <doctest.h>

#include <cmath>
#include <set>

#include "hcmm/density.hpp"
#include "hcmm/error.hpp"
#include "hcmm/mechanism.hpp"
#include "hcmm/population.hpp"

using namespace hcmm;

TEST_CASE("desk population: registered truths equal direct computation") {
  Rng rng(401);
  Population pop = build_desk_population(5000, rng);
  REQUIRE(pop.truth_names.size() >= 10);
  REQUIRE(pop.truth_names.size() == pop.truth_values.size());
  for (std::size_t e = 0; e < pop.estimands.size(); ++e) {
    auto rows = estimators(pop.data, pop.estimands[e], 0.0);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].point == doctest::Approx(pop.truth_values[e]));
  }
  // structure sanity: ages within the clamped range, earnings positive
  CHECK(pop.data.Y.col(0).minCoeff() >= 18.0);
  CHECK(pop.data.Y.col(0).maxCoeff() <= 85.0);
  CHECK(pop.data.Y.col(1).minCoeff() > 0.0);
  // earnings dispersion differs by sex (subgroup-varying skew/variance)
  double mean_m = 0.0, mean_f = 0.0;
  int nm = 0, nf = 0;
  for (int i = 0; i < pop.data.n; ++i)
    (pop.data.X(i, 0) == 2 ? mean_m : mean_f) += pop.data.Y(i, 1),
        ++(pop.data.X(i, 0) == 2 ? nm : nf);
  CHECK(mean_m / nm > mean_f / nf);
}

TEST_CASE("population from a fixed state matches marginal_px within 3 SE") {
  // small model state; cell frequencies of the emitted population against the
  // exact marginal
  MixedDataset proto;
  proto.n = 2;
  proto.cat = {{"a", {"1", "2"}}, {"b", {"1", "2"}}};
  proto.cont = {{"y"}};
  proto.X = Eigen::MatrixXi::Constant(2, 2, 1);
  proto.Y = Eigen::MatrixXd::Zero(2, 1);
  proto.Rx = BoolMatrix::Constant(2, 2, false);
  proto.Ry = BoolMatrix::Constant(2, 1, false);
  Rng seed_rng(402);
  ModelState st =
      init_state(proto, {2, 3, 2}, PriorConfig::defaults(proto), seed_rng);
  Rng rng(403);
  const int n = 10000;
  Population pop = build_population_from_state(st, proto.cat, proto.cont, n, rng);
  for (int a = 1; a <= 2; ++a)
    for (int b = 1; b <= 2; ++b) {
      Eigen::RowVectorXi x(2);
      x << a, b;
      double p = marginal_px(x, st);
      long count = 0;
      for (int i = 0; i < n; ++i)
        if (pop.data.X(i, 0) == a && pop.data.X(i, 1) == b) ++count;
      double se = std::sqrt(p * (1 - p) / n);
      CHECK(std::fabs(count / static_cast<double>(n) - p) < 3.5 * se);
    }
}

TEST_CASE("draw_srs: without-replacement sample preserving records") {
  Rng rng(404);
  Population pop = build_desk_population(500, rng);
  MixedDataset s = draw_srs(pop.data, 100, rng);
  CHECK(s.n == 100);
  CHECK_THROWS_AS(draw_srs(pop.data, 501, rng), InputError);
  // every sampled record exists in the population (match on all fields)
  for (int i = 0; i < 5; ++i) {
    bool found = false;
    for (int k = 0; k < pop.data.n && !found; ++k)
      found = (pop.data.X.row(k) == s.X.row(i)) &&
              pop.data.Y.row(k) == s.Y.row(i);
    CHECK(found);
  }
}

TEST_CASE("impose_mcar: rate 0, rate 1, and the 0.35 preset rate") {
  Rng pop_rng(405);
  Population pop = build_desk_population(4000, pop_rng);
  Rng rng(406);

  MixedDataset none = impose_mcar(pop.data, 0.0, 0, rng);
  CHECK(none.Rx.count() == 0);
  CHECK(none.Ry.count() == 0);

  MixedDataset all = impose_mcar(pop.data, 1.0, 0, rng);
  CHECK(all.Rx.count() == all.Rx.size());
  CHECK(all.Ry.count() == all.Ry.size());

  MixedDataset masked = impose_mcar(pop.data, 0.35, 0, rng);
  double cells = static_cast<double>(masked.Rx.size() + masked.Ry.size());
  double rate = (masked.Rx.count() + masked.Ry.count()) / cells;
  double se = std::sqrt(0.35 * 0.65 / cells);
  CHECK(std::fabs(rate - 0.35) < 3.0 * se);
  // values untouched, only masks set
  CHECK(masked.X == pop.data.X);
  CHECK(masked.Y == pop.data.Y);

  CHECK_THROWS_AS(impose_mcar(pop.data, 1.2, 0, rng), InputError);
}

TEST_CASE("impose_mcar honors the complete-case exemption exactly") {
  Rng pop_rng(407);
  Population pop = build_desk_population(1000, pop_rng);
  Rng rng(408);
  MixedDataset masked = impose_mcar(pop.data, 0.9, 200, rng);
  int complete = 0;
  for (int i = 0; i < masked.n; ++i) {
    bool any = false;
    for (int j = 0; j < masked.p(); ++j) any = any || masked.Rx(i, j);
    for (int v = 0; v < masked.q(); ++v) any = any || masked.Ry(i, v);
    if (!any) ++complete;
  }
  CHECK(complete >= 200);  // exempt records plus lucky ones
}

TEST_CASE("impose_mar: saturated-low logit produces no missingness") {
  Rng pop_rng(409);
  Population pop = build_desk_population(500, pop_rng);
  MarSpec spec;
  spec.complete_cases = 0;
  MarTarget t;
  t.variable = "earn";
  t.intercept = -50.0;
  spec.targets.push_back(t);
  Rng rng(410);
  MixedDataset masked = impose_mar(pop.data, spec, rng);
  CHECK(masked.Ry.count() == 0);
}

TEST_CASE("impose_mar: zero logit masks with probability one half") {
  Rng pop_rng(411);
  Population pop = build_desk_population(4000, pop_rng);
  MarSpec spec;
  spec.complete_cases = 0;
  MarTarget t;
  t.variable = "earn";
  t.intercept = 0.0;
  spec.targets.push_back(t);
  Rng rng(412);
  MixedDataset masked = impose_mar(pop.data, spec, rng);
  int v = masked.cont_index("earn");
  double rate = static_cast<double>(masked.Ry.col(v).count()) / masked.n;
  double se = std::sqrt(0.25 / masked.n);
  CHECK(std::fabs(rate - 0.5) < 3.0 * se);
}

TEST_CASE("impose_mar: preset rates land near one third per variable") {
  Rng pop_rng(413);
  Population pop = build_desk_population(20000, pop_rng);
  MarSpec spec = default_mar_preset();
  spec.complete_cases = 0;  // rate check on the raw mechanism
  Rng rng(414);
  MixedDataset masked = impose_mar(pop.data, spec, rng);
  const int n = masked.n;
  double earn_rate =
      static_cast<double>(masked.Ry.col(masked.cont_index("earn")).count()) / n;
  double child_rate =
      static_cast<double>(masked.Rx.col(masked.cat_index("child")).count()) / n;
  double race_rate =
      static_cast<double>(masked.Rx.col(masked.cat_index("race")).count()) / n;
  CHECK(earn_rate > 0.28);
  CHECK(earn_rate < 0.38);
  CHECK(child_rate > 0.28);
  CHECK(child_rate < 0.38);
  CHECK(race_rate > 0.28);
  CHECK(race_rate < 0.38);
  // fully observed variables are never masked
  CHECK(masked.Ry.col(masked.cont_index("age")).count() == 0);
  CHECK(masked.Rx.col(masked.cat_index("sex")).count() == 0);
  // values untouched
  CHECK(masked.X == pop.data.X);
  CHECK(masked.Y == pop.data.Y);
}

TEST_CASE("impose_mar: complete cases stay complete under the preset") {
  Rng pop_rng(415);
  Population pop = build_desk_population(2000, pop_rng);
  MarSpec spec = default_mar_preset();
  spec.complete_cases = 180;
  Rng rng(416);
  MixedDataset masked = impose_mar(pop.data, spec, rng);
  int complete = 0;
  for (int i = 0; i < masked.n; ++i) {
    bool any = false;
    for (int j = 0; j < masked.p(); ++j) any = any || masked.Rx(i, j);
    for (int v = 0; v < masked.q(); ++v) any = any || masked.Ry(i, v);
    if (!any) ++complete;
  }
  CHECK(complete >= 180);
}

TEST_CASE("impose_mar rejects bad specs") {
  Rng pop_rng(417);
  Population pop = build_desk_population(100, pop_rng);
  Rng rng(418);

  MarSpec unknown;
  MarTarget t;
  t.variable = "nope";
  unknown.targets.push_back(t);
  CHECK_THROWS_AS(impose_mar(pop.data, unknown, rng), InputError);

  MarSpec conflicting = default_mar_preset();
  conflicting.fully_observed.push_back("earn");
  CHECK_THROWS_AS(impose_mar(pop.data, conflicting, rng), InputError);

  MarSpec bad_corr = default_mar_preset();
  bad_corr.blocks[0].correlation = 1.5;
  CHECK_THROWS_AS(impose_mar(pop.data, bad_corr, rng), InputError);

  MarSpec too_many;
  too_many.complete_cases = 101;
  CHECK_THROWS_AS(impose_mar(pop.data, too_many, rng), InputError);
}

TEST_CASE("mechanism spec parsing") {
  MechanismSpec none = MechanismSpec::from_json_text(R"({"type": "none"})");
  CHECK(none.type == MechanismSpec::Type::None);

  MechanismSpec mcar =
      MechanismSpec::from_json_text(R"({"type": "mcar", "rate": 0.2,
                                        "complete_cases": 10})");
  CHECK(mcar.type == MechanismSpec::Type::Mcar);
  CHECK(mcar.mcar_rate == doctest::Approx(0.2));
  CHECK(mcar.mcar_complete_cases == 10);

  MechanismSpec mar =
      MechanismSpec::from_json_text(R"({"type": "mar", "preset": true})");
  CHECK(mar.type == MechanismSpec::Type::Mar);
  CHECK(mar.mar.targets.size() == 2);
  CHECK(mar.mar.blocks.size() == 1);
  CHECK(mar.mar.complete_cases == 180);
  CHECK(mar.mar.blocks[0].correlation == doctest::Approx(0.3));
  CHECK(mar.mar.blocks[0].loading == doctest::Approx(1.25));
  CHECK(mar.mar.blocks[0].driver_coef == doctest::Approx(0.7));

  MechanismSpec tweaked = MechanismSpec::from_json_text(
      R"({"type": "mar", "preset": true, "complete_cases": 50})");
  CHECK(tweaked.mar.complete_cases == 50);
  CHECK(tweaked.mar.targets.size() == 2);

  CHECK_THROWS_AS(MechanismSpec::from_json_text(R"({"type": "wat"})"),
                  InputError);
  CHECK_THROWS_AS(MechanismSpec::from_json_text("{oops"), InputError);
}

TEST_CASE("impose_mechanism dispatches on type") {
  Rng pop_rng(419);
  Population pop = build_desk_population(300, pop_rng);
  Rng rng(420);
  MechanismSpec none;
  none.type = MechanismSpec::Type::None;
  MixedDataset same = impose_mechanism(pop.data, none, rng);
  CHECK(same.Rx.count() == 0);

  MechanismSpec mcar;
  mcar.type = MechanismSpec::Type::Mcar;
  mcar.mcar_rate = 0.5;
  MixedDataset masked = impose_mechanism(pop.data, mcar, rng);
  CHECK(masked.Rx.count() > 0);
}
