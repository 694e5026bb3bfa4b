#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

#include "attractor/io.hpp"
#include "attractor/iterate.hpp"

using namespace attractor;

namespace {

const ScheduleDiagnostic& find(const std::vector<ScheduleDiagnostic>& diags, const std::string& condition) {
  for (const auto& d : diags) {
    if (d.condition == condition) return d;
  }
  throw std::runtime_error("no diagnostic " + condition);
}

ExtensionMapping paper_extension() {
  const MappingSpec T = paper_example();
  return extend(T, build_attractor(T, std::vector<Vector>{Vector{0.5}, Vector{-0.5}}));
}

ExtensionMapping rotation_extension(double theta) {
  const MappingSpec T = rotation_2d(theta);
  return extend(T, build_attractor(T, T.domain.sample(1, 50)));
}

/// Rotation restricted to the closed unit disc, a convex set it maps into itself.
MappingSpec rotation_on_disc(double theta) {
  MappingSpec T = rotation_2d(theta);
  const Membership in_disc = [](const Vector& x) { return squared_norm(x) <= 1.0; };
  T.domain.membership = in_disc;
  T.domain.sampler = box_sampler(2, in_disc);
  T.domain.is_convex = true;
  T.domain.maps_into_self = true;
  T.name = "rotation on the unit disc";
  return T;
}

}  // namespace

// ---------------------------------------------------------------------------
// schedules

TEST(Schedules, ValuesOfEachFamily) {
  EXPECT_EQ(Schedule::power(1.0, 1.0, 1.0)(1), 0.5);
  EXPECT_EQ(Schedule::power(0.5, 2.0)(2), 0.125);
  EXPECT_EQ(Schedule::constant(0.3)(1000), 0.3);
  EXPECT_EQ(Schedule::custom([](std::size_t n) { return 1.0 / double(n * n); }, "inv_sq")(4), 1.0 / 16.0);
}

TEST(Schedules, HalpernValidatorExamples) {
  const auto ok = validate_halpern_schedules(Schedule::power(1.0, 1.0, 1.0), Schedule::constant(0.5));
  EXPECT_TRUE(all_pass(ok));

  const auto fast = validate_halpern_schedules(Schedule::power(1.0, 2.0, 1.0), Schedule::constant(0.5));
  EXPECT_EQ(find(fast, "sum alpha_n = inf").status, DiagnosticStatus::fail);
  EXPECT_FALSE(all_pass(fast));

  const auto constant_alpha = validate_halpern_schedules(Schedule::constant(0.5), Schedule::constant(0.5));
  EXPECT_EQ(find(constant_alpha, "alpha_n -> 0").status, DiagnosticStatus::fail);

  const auto beta_one = validate_halpern_schedules(Schedule::power(1.0, 1.0, 1.0), Schedule::constant(1.0));
  EXPECT_EQ(find(beta_one, "beta_n in [0,1]").status, DiagnosticStatus::pass);
  EXPECT_EQ(find(beta_one, "liminf beta_n(1-beta_n) > 0").status, DiagnosticStatus::fail);

  const auto beta_power = validate_halpern_schedules(Schedule::power(1.0, 1.0, 1.0), Schedule::power(1.0, 1.0, 1.0));
  EXPECT_EQ(find(beta_power, "liminf beta_n(1-beta_n) > 0").status, DiagnosticStatus::fail);
}

TEST(Schedules, ExponentAndWeightGrid) {
  for (double theta : {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 3.0}) {
    for (double beta : {0.0, 0.1, 0.5, 0.9, 1.0}) {
      const auto diags = validate_halpern_schedules(Schedule::power(1.0, theta, 1.0), Schedule::constant(beta));
      EXPECT_EQ(find(diags, "sum alpha_n = inf").status == DiagnosticStatus::pass, theta <= 1.0) << theta;
      EXPECT_EQ(find(diags, "alpha_n -> 0").status, DiagnosticStatus::pass);
      const bool interior = beta > 0.0 && beta < 1.0;
      EXPECT_EQ(find(diags, "liminf beta_n(1-beta_n) > 0").status == DiagnosticStatus::pass, interior) << beta;
      const auto& restated = find(diags, "liminf beta_n > 0 and limsup beta_n < 1");
      EXPECT_TRUE(restated.derived);
      EXPECT_EQ(restated.status == DiagnosticStatus::pass, interior);
      EXPECT_EQ(all_pass(diags), theta <= 1.0 && interior);
    }
  }
}

TEST(Schedules, CustomSequencesAreUndecidable) {
  const Schedule custom = Schedule::custom([](std::size_t n) { return 1.0 / double(n + 1); }, "harmonic");
  const auto diags = validate_halpern_schedules(custom, custom);
  for (const auto& d : diags) EXPECT_EQ(d.status, DiagnosticStatus::undecidable) << d.condition;
  EXPECT_FALSE(all_pass(diags));

  const auto mann = validate_mann_schedule(custom);
  EXPECT_EQ(find(mann, "liminf alpha_n(1-alpha_n) > 0").status, DiagnosticStatus::undecidable);

  // the run still happens
  const IterationTrace t = run_halpern(paper_extension(), Vector{1.0}, Vector{3.0}, custom, Schedule::constant(0.5), 50);
  EXPECT_EQ(t.size(), 51u);
}

TEST(Schedules, MannValidatorExamples) {
  EXPECT_TRUE(all_pass(validate_mann_schedule(Schedule::constant(0.5))));
  EXPECT_FALSE(all_pass(validate_mann_schedule(Schedule::constant(0.0))));
  EXPECT_FALSE(all_pass(validate_mann_schedule(Schedule::constant(1.5))));
  EXPECT_FALSE(all_pass(validate_mann_schedule(Schedule::power(1.0, 1.0, 1.0))));
}

// ---------------------------------------------------------------------------
// iteration examples

TEST(Halpern, PaperExampleApproachesTheProjectionOfTheAnchor) {
  const IterationTrace t = run_halpern(paper_extension(), Vector{1.0}, Vector{3.0}, Schedule::power(1.0, 1.0, 1.0),
                                       Schedule::constant(0.5), 2000);
  EXPECT_EQ(t.iterates[1], Vector{0.5});
  EXPECT_LE(distance(t.last(), Vector{0.0}), 1e-3);
  EXPECT_TRUE(all_pass(t.diagnostics));
  ASSERT_TRUE(t.anchor);
  EXPECT_EQ(*t.anchor, Vector{1.0});
}

TEST(Halpern, InvalidScheduleStillRunsAndIsFlagged) {
  const IterationTrace t = run_halpern(paper_extension(), Vector{1.0}, Vector{3.0}, Schedule::power(1.0, 2.0, 1.0),
                                       Schedule::constant(0.5), 100);
  EXPECT_FALSE(all_pass(t.diagnostics));
  EXPECT_EQ(t.size(), 101u);
}

TEST(Halpern, LimitDoesNotDependOnTheStartingPoint) {
  const ExtensionMapping ext = rotation_extension(std::numbers::pi / 3);
  const Vector u{1.0, 2.0};
  const Vector target = project_attractor(ext.attractor(), u);
  for (const Vector& x1 : {Vector{3, -1}, Vector{-2, 2}, Vector{0.5, 0.5}}) {
    const IterationTrace t =
        run_halpern(ext, u, x1, Schedule::power(1.0, 1.0, 1.0), Schedule::constant(0.5), 40000);
    EXPECT_LE(distance(t.last(), target), 1e-3);
  }
}

TEST(Mann, PaperExampleConvergesToZero) {
  const ExtensionMapping ext = paper_extension();
  const IterationTrace t = run_mann(ext, Vector{3.0}, Schedule::constant(0.5));
  ASSERT_TRUE(t.verdict.converged);
  EXPECT_EQ(*t.verdict.limit, Vector{0.0});
  EXPECT_TRUE(residual_limit_check(t, ext.attractor()));
  EXPECT_TRUE(all_pass(t.diagnostics));
  EXPECT_TRUE(t.schedule_values[0].second == std::nullopt);
}

TEST(Mann, ResidualLimitCheckRejectsPointsOutsideTheAttractor) {
  const ExtensionMapping ext = paper_extension();
  // started at the fixed point 1, the run stays there, outside A(T) = {0}
  const IterationTrace t = run_mann(ext, Vector{1.0}, Schedule::constant(0.5));
  ASSERT_TRUE(t.verdict.converged);
  EXPECT_EQ(*t.verdict.limit, Vector{1.0});
  EXPECT_FALSE(residual_limit_check(t, ext.attractor()));
  EXPECT_NE(t.note.find("outside"), std::string::npos);

  IterationTrace unconverged = t;
  unconverged.verdict = {false, std::nullopt, "budget"};
  EXPECT_FALSE(residual_limit_check(unconverged, ext.attractor()));
}

// ---------------------------------------------------------------------------
// properties

TEST(Mann, FejerMonotoneWithRespectToAttractivePoints) {
  for (double theta : {0.4, 1.0, 2.5}) {
    const ExtensionMapping ext = rotation_extension(theta);
    const Vector z = Vector::zeros(2);  // attractive for every rotation
    for (const Vector& x1 : whole_space(2).sample(3, 10, Box{-5.0, 5.0})) {
      const IterationTrace t = run_mann(ext, x1, Schedule::constant(0.3), 500);
      for (std::size_t k = 0; k + 1 < t.size(); ++k) {
        EXPECT_LE(distance(t.iterates[k + 1], z), distance(t.iterates[k], z) + 1e-9);
      }
    }
  }
}

TEST(Iteration, RerunsAreBitIdentical) {
  const ExtensionMapping ext = rotation_extension(0.9);
  const auto a = run_halpern(ext, Vector{1, 1}, Vector{2, -3}, Schedule::power(1.0, 0.75, 1.0),
                             Schedule::constant(0.4), 300);
  const auto b = run_halpern(ext, Vector{1, 1}, Vector{2, -3}, Schedule::power(1.0, 0.75, 1.0),
                             Schedule::constant(0.4), 300);
  EXPECT_EQ(a.iterates, b.iterates);
  EXPECT_EQ(trace_csv(a), trace_csv(b));
}

TEST(Iteration, ConvexSelfMapKeepsIteratesInTheDomain) {
  const MappingSpec T = rotation_on_disc(1.1);
  const ExtensionMapping ext = extend(T, build_attractor(T, T.domain.sample(2, 40)));
  const auto starts = T.domain.sample(4, 6);
  for (std::size_t i = 0; i + 1 < starts.size(); i += 2) {
    const auto h = run_halpern(ext, starts[i], starts[i + 1], Schedule::power(1.0, 1.0, 1.0),
                               Schedule::constant(0.5), 400);
    for (const Vector& x : h.iterates) EXPECT_LE(squared_norm(x), 1.0 + 1e-12);
    const auto m = run_mann(ext, starts[i], Schedule::constant(0.25), 400);
    for (const Vector& x : m.iterates) EXPECT_LE(squared_norm(x), 1.0 + 1e-12);
  }
}

TEST(Iteration, OverflowRaisesWithPartialTrace) {
  MappingSpec T{whole_space(1), [](const Vector& x) { return 1e200 * x; }, "blow_up", {}};
  const ExtensionMapping ext = extend(T, HalfspaceSet{1, {}, {}});
  try {
    run_mann(ext, Vector{1.0}, Schedule::constant(0.5), 100);
    FAIL() << "expected NumericalDivergence";
  } catch (const NumericalDivergence& e) {
    ASSERT_TRUE(e.partial_trace());
    EXPECT_FALSE(e.partial_trace()->iterates.empty());
    for (const Vector& x : e.partial_trace()->iterates) EXPECT_TRUE(x.is_finite());
  }
}

TEST(Iteration, TraceCsvLayout) {
  const IterationTrace t = run_halpern(paper_extension(), Vector{1.0}, Vector{3.0}, Schedule::power(1.0, 1.0, 1.0),
                                       Schedule::constant(0.5), 3);
  std::istringstream in(trace_csv(t));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "n,x_1,residual,step_norm,alpha_n,beta_n");
  EXPECT_EQ(lines[1].rfind("1,3,6,", 0), 0u);
  EXPECT_EQ(lines[4].substr(lines[4].size() - 2), ",,");

  const IterationTrace m = run_mann(rotation_extension(0.5), Vector{1, 0}, Schedule::constant(0.5), 2);
  const std::string csv = trace_csv(m);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,x_1,x_2,residual,step_norm,alpha_n,beta_n");
  EXPECT_NE(csv.find(",0.5,\n"), std::string::npos);
}
