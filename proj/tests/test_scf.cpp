#include <doctest.h>

#include "evp/scf.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace evp;

namespace {

ScfProblem reference_problem() { return build_problem(128, 16, 3, 0.1, 0.1, 0.5); }

}  // namespace

TEST_CASE("problem construction") {
  CHECK_THROWS_AS(build_problem(0, 1, 1, 0.1, 0.1, 0.5), ArgumentError);
  CHECK_THROWS_AS(build_problem(8, 9, 1, 0.1, 0.1, 0.5), ArgumentError);
  CHECK_THROWS_AS(build_problem(8, 2, 1, -1, 0.1, 0.5), ArgumentError);
  CHECK_THROWS_AS(build_problem(8, 2, 1, 0.1, 0.31, 0.5), ArgumentError);
  CHECK_THROWS_AS(build_problem(8, 2, 1, 0.1, 0.1, 0.0), ArgumentError);
  CHECK_THROWS_AS(build_problem(8, 2, 1, 0.1, 0.1, 1.5), ArgumentError);

  const auto p = build_problem(20, 4, 5, 0.2, 0.25, 0.7);
  CHECK(is_symmetric(p.h0));
  CHECK(p.b(3, 3) == 1.0);
  CHECK(p.b(3, 4) == 0.25);
  CHECK(p.b(4, 3) == 0.25);
  CHECK(p.b(3, 5) == 0.0);
  Matrix<double> id = Matrix<double>::Identity(20, 20);
  const auto spectrum = oracle::pencil_eigenvalues(p.h0, id, 0, 21);
  for (Index i = 0; i < 20; ++i) CHECK(spectrum[static_cast<std::size_t>(i)] == doctest::Approx(i + 1.0).epsilon(1e-12));

  Vector<double> rho = Vector<double>::LinSpaced(20, 0, 1);
  const auto a = scf_hamiltonian(p, rho);
  CHECK(a(7, 7) == p.h0(7, 7) + 0.2 * rho[7]);
  CHECK(a(7, 8) == p.h0(7, 8));
  CHECK_THROWS_AS(scf_hamiltonian(p, Vector<double>::Zero(3)), ArgumentError);
}

TEST_CASE("one step: density, energy and overlap reuse") {
  const auto p = build_problem(30, 5, 2, 0.1, 0.1, 0.5);
  Solver h;
  h.set("na", 30);
  h.set("nev", 5);
  h.setup();
  Matrix<double> b = p.b;
  const Vector<double> rho0 = Vector<double>::Zero(30);
  const auto s1 = scf_step(p, rho0, h, b, false);
  CHECK_FALSE(testing::bitwise_equal(b, p.b));
  CHECK(s1.report.stage_flops(Stage::cholesky) > 0);

  const auto ref = oracle::pencil_eigenvalues(p.h0, p.b, 0, 60);
  double energy = 0;
  for (int j = 0; j < 5; ++j) energy += ref[static_cast<std::size_t>(j)];
  CHECK(s1.energy == doctest::Approx(energy).epsilon(1e-12));
  // B-orthonormal vectors have sum_i rho_i = sum_j v_j^T v_j, not k
  CHECK(s1.rho.minCoeff() >= 0);
  CHECK(s1.rho.sum() == doctest::Approx(0.5 * s1.report.eigenpairs.vectors.squaredNorm()));

  const auto s2 = scf_step(p, s1.rho, h, b, true);
  CHECK(s2.report.stage_seconds(Stage::cholesky) == 0);
  CHECK(s2.report.stage_flops(Stage::invert) == 0);
  CHECK(s2.energy > s1.energy);
}

TEST_CASE("precision schedules") {
  const auto dp = PrecisionSchedule::all_dp();
  CHECK(dp.phase_for(1)->esolve == "dp");
  CHECK(dp.phase_for(500)->invert == "dp");
  const auto sp = PrecisionSchedule::sp_until(20);
  CHECK(sp.phase_for(1)->multiply == "sp");
  CHECK(sp.phase_for(20)->esolve == "sp");
  CHECK(sp.phase_for(20)->invert == "dp");
  CHECK(sp.phase_for(21)->esolve == "dp");
  CHECK(sp.phase_for(21)->multiply == "dp");
  const auto inv = PrecisionSchedule::sp_invert();
  CHECK(inv.phase_for(1)->invert == "sp");
  CHECK(inv.phase_for(150)->invert == "sp");
  CHECK(inv.phase_for(150)->esolve == "dp");
}

TEST_CASE("all double precision cycle converges") {
  const auto p = reference_problem();
  Solver h;
  const auto trace = run_scf(p, h, 60, 1e-10, PrecisionSchedule::all_dp());
  CHECK(trace.converged);
  CHECK(trace.steps.size() <= 60);
  CHECK(trace.steps.back().density_delta < 1e-10);
  CHECK(trace.final_energy == trace.steps.back().energy);
  for (std::size_t i = 1; i < trace.steps.size(); ++i)
    CHECK(trace.steps[i].params_hash == trace.steps[0].params_hash);
  CHECK(trace.steps[0].params.find("step_precision_esolve=dp") != std::string::npos);

  Solver g;
  const auto again = run_scf(p, g, 60, 1e-10, PrecisionSchedule::all_dp());
  CHECK(again.final_energy == trace.final_energy);
  CHECK(testing::bitwise_equal(again.final_rho, trace.final_rho));
}

TEST_CASE("single precision then double precision reaches the same energy") {
  const auto p = reference_problem();
  Solver dp, mixed;
  const auto ref = run_scf(p, dp, 60, 1e-10, PrecisionSchedule::all_dp());
  const auto trace = run_scf(p, mixed, 100, 1e-10, PrecisionSchedule::sp_until(20));
  REQUIRE(trace.converged);
  CHECK(std::abs(trace.final_energy - ref.final_energy) <= 1e-8 * std::abs(ref.final_energy));
  CHECK(trace.steps[19].params_hash != trace.steps[20].params_hash);
  CHECK(trace.steps[0].params_hash == trace.steps[19].params_hash);
}

TEST_CASE("single precision inversion perturbs the fixed point") {
  const auto p = reference_problem();
  Solver dp, sp;
  const auto ref = run_scf(p, dp, 60, 1e-10, PrecisionSchedule::all_dp());
  const auto trace = run_scf(p, sp, 200, 1e-10, PrecisionSchedule::sp_invert());
  const double rel = std::abs(trace.final_energy - ref.final_energy) / std::abs(ref.final_energy);
  CHECK(rel > 1e-12);
  CHECK(rel < 1e-5);
}

TEST_CASE("autotuning inside a cycle") {
  const auto p = build_problem(40, 6, 4, 0.1, 0.1, 0.5);
  Solver h;
  h.set("na", 40);
  h.set("nev", 6);
  h.setup();
  auto st = autotune_setup(h, AutotuneLevel::fast);
  const auto trace = run_scf(p, h, 60, 1e-10, PrecisionSchedule::all_dp(), ScfAutotune{&st, -1});
  CHECK(trace.converged);
  CHECK(st.finished);
  CHECK(st.timings.size() == 3);
  CHECK(h.parameters().provenance("kernel") == Provenance::tuned);
  CHECK(trace.steps[0].params_hash != trace.steps[1].params_hash);
  CHECK(trace.steps[3].params_hash == trace.steps.back().params_hash);

  Solver budgeted;
  budgeted.set("na", 40);
  budgeted.set("nev", 6);
  budgeted.setup();
  auto bst = autotune_setup(budgeted, AutotuneLevel::medium);
  run_scf(p, budgeted, 60, 1e-10, PrecisionSchedule::all_dp(), ScfAutotune{&bst, 5});
  CHECK(bst.timings.size() == 5);
  CHECK_FALSE(bst.finished);
}

TEST_CASE("tuning across cycles and transferability") {
  const auto p = build_problem(32, 4, 9, 0.1, 0.1, 0.5);
  Solver tuned;
  const auto st = tune_across_cycles(p, tuned, AutotuneLevel::medium, 40, 1e-10, PrecisionSchedule::all_dp());
  CHECK(st.finished);
  CHECK(st.timings.size() == 360);
  CHECK(tuned.parameters().provenance("band_width") == Provenance::tuned);

  Solver fallback;
  const auto rows = transferability_experiment(p, 3, 0.01, fallback, tuned, 100, 1e-10);
  REQUIRE(rows.size() == 6);
  for (const auto& r : rows) {
    CHECK(r.converged);
    CHECK(r.max_residual <= 50);
    CHECK(r.max_orthogonality <= 50);
    CHECK(r.mean_step_ms <= r.max_step_ms);
  }
  CHECK(rows[0].handle == "default");
  CHECK(rows[1].handle == "tuned");
  CHECK(rows[4].instance == 2);
}
