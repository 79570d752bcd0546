#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fredholm/colloc.hpp"

using namespace fredholm;
using std::numbers::pi;

namespace {

const double kD1 = 0.7 * pi;

Contour astroid() { return Contour(ConformalMap::preset("astroid")); }
Contour circle() { return Contour(ConformalMap::preset("circle")); }

PiecewiseFn pieces(const Contour& c, const JumpSet& js, const char* left, const char* right) {
  return PiecewiseFn::from_expressions(c,
                                       {{0.0, js[0], expr::Expression::parse(left)},
                                        {js[0], kTwoPi, expr::Expression::parse(right)}},
                                       js);
}

const char* kU = "((0.78148-0.081271i)*t^2+0.91818+0.025237i)";

JumpSet astroid_jumps() { return JumpSet({kD1, kTwoPi}); }
PiecewiseFn astroid_phi() { return pieces(astroid(), astroid_jumps(), "2*t", "t^3+2*t"); }
PiecewiseFn astroid_rhs() {
  return pieces(astroid(), astroid_jumps(), (std::string("2*t-0.5*") + kU).c_str(),
                (std::string("t^3+2*t-0.5*") + kU).c_str());
}

Problem astroid_problem() {
  return Problem(astroid(), Kernel::parse("t^2+s^2"), 0.5, astroid_rhs(), astroid_jumps(), astroid_phi());
}

Discretization disc(std::size_t n_B) {
  Discretization d;
  d.n_B = n_B;
  return d;
}

double max_diff(std::span<const complex> a, std::span<const complex> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(CollocationPoints, OffsetTwoForCubic) {
  const auto nodes = generate_nodes(circle(), 8, 4);
  const auto pts = collocation_points(disc(8), nodes, JumpSet{});
  ASSERT_EQ(pts.size(), 8u);
  for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(pts.angles[j], nodes.angles[(j + 2) % 8]);
  Discretization plain = disc(8);
  plain.rule = CollocationRule::Nodes;
  EXPECT_EQ(collocation_points(plain, nodes, JumpSet{}).angles, nodes.angles);
}

TEST(CollocationPoints, JumpAtNodeIsShifted) {
  const auto nodes = generate_nodes(circle(), 16, 2);
  Discretization d = disc(16);
  d.order = 2;
  const JumpSet js({nodes.angles[4]});
  const auto pts = collocation_points(d, nodes, js);
  // offset 1: row 3 would land on node 4
  EXPECT_EQ(pts.angles[3], nodes.angles[4] - 0.01);
  EXPECT_EQ(pts.shifted[3], std::optional<std::size_t>(0));
  for (std::size_t j = 0; j < 16; ++j)
    if (j != 3) EXPECT_EQ(pts.angles[j], nodes.angles[(j + 1) % 16]);
}

TEST(CollocationPoints, OneRowPerJump) {
  const auto nodes = generate_nodes(astroid(), 40, 4);
  const auto pts = collocation_points(disc(40), nodes, astroid_jumps());
  ASSERT_EQ(pts.size(), 42u);
  EXPECT_EQ(pts.angles[40], kD1);
  EXPECT_EQ(pts.angles[41], kTwoPi);
  EXPECT_TRUE(pts.is_jump_row(41));
  EXPECT_FALSE(pts.is_jump_row(39));
}

TEST(CollocationPoints, ShiftCollisionIsConfigError) {
  const auto nodes = generate_nodes(circle(), 16, 4);
  const JumpSet js({nodes.angles[4] - 0.01, nodes.angles[4]});
  EXPECT_THROW(collocation_points(disc(16), nodes, js), ConfigError);
}

TEST(Discretization, Validation) {
  EXPECT_NO_THROW(disc(160).validate());
  Discretization d = disc(160);
  d.order = 5;
  EXPECT_THROW(d.validate(), ConfigError);
  d = disc(3);
  EXPECT_THROW(d.validate(), ConfigError);
  d = disc(1000);
  EXPECT_THROW(d.validate(), ConfigError);  // eps2 >= 2pi/n_B
  d = disc(160);
  d.eps2 = 0.0;
  EXPECT_THROW(d.validate(), ConfigError);
}

TEST(Problem, NonFiniteKernelRejected) {
  EXPECT_THROW(Problem(circle(), Kernel::parse("1/(t-t)"), 0.5, PiecewiseFn::smooth(circle(), [](double, complex t) {
                         return t;
                       }),
                       JumpSet{}),
               std::exception);
}

TEST(Assemble, MatrixIsB1MinusLambdaB2) {
  const auto sys = assemble(astroid_problem(), disc(40));
  ASSERT_EQ(sys.size(), 42u);
  for (std::size_t j = 0; j < 42; ++j)
    for (std::size_t k = 0; k < 42; ++k) EXPECT_EQ(sys.matrix(j, k), sys.b1(j, k) - sys.lambda * sys.b2(j, k));
}

TEST(Assemble, B1Entries) {
  const auto sys = assemble(astroid_problem(), disc(40));
  for (std::size_t j = 0; j < 42; ++j) {
    for (std::size_t k = 0; k < 40; ++k) EXPECT_EQ(sys.b1(j, k), sys.basis->eval(k, sys.points.angles[j]));
    for (std::size_t r = 0; r < 2; ++r) {
      const complex h = sys.b1(j, 40 + r);
      EXPECT_TRUE(h == complex(0.0) || h == complex(1.0));
    }
  }
  // the reference-point step is 1 only on its own row
  for (std::size_t j = 0; j < 41; ++j) EXPECT_EQ(sys.b1(j, 41), complex(0.0)) << j;
  EXPECT_EQ(sys.b1(41, 41), complex(1.0));
}

TEST(Assemble, B2EntriesMatchDirectIntegrals) {
  const auto p = astroid_problem();
  const auto sys = assemble(p, disc(40));
  for (std::size_t j = 0; j < 42; j += 5) {
    const complex tc = p.contour.point(sys.points.angles[j]);
    for (std::size_t k = 0; k < 40; k += 3) {
      const complex direct = integral_I1(*sys.basis, k, tc, p.kernel, {});
      EXPECT_LE(std::abs(sys.b2(j, k) - direct), 1e-12 * std::max(1.0, std::abs(direct)));
    }
    const complex direct = integral_I2(p.contour, kD1, tc, p.kernel, {}, sys.basis->nodes().angles);
    EXPECT_LE(std::abs(sys.b2(j, 40) - direct), 1e-12 * std::max(1.0, std::abs(direct)));
  }
}

TEST(Assemble, UnitKernelReferenceJumpColumnVanishes) {
  const Problem p(astroid(), Kernel::parse("1"), 0.5, astroid_rhs(), astroid_jumps());
  const auto sys = assemble(p, disc(40));
  for (std::size_t j = 0; j < 42; ++j) EXPECT_EQ(sys.b2(j, 41), complex(0.0));
}

TEST(Assemble, ZeroLambdaGivesB1) {
  Problem p = astroid_problem();
  p.lambda = 0.0;
  const auto sys = assemble(p, disc(40));
  for (std::size_t j = 0; j < 42; ++j)
    for (std::size_t k = 0; k < 42; ++k) EXPECT_EQ(sys.matrix(j, k), sys.b1(j, k));
}

TEST(Assemble, RhsSamplesAtCollocationPoints) {
  const auto sys = assemble(astroid_problem(), disc(40));
  const auto f = astroid_rhs();
  for (std::size_t j = 0; j < 40; ++j) EXPECT_EQ(sys.rhs[j], f.eval(sys.points.angles[j]));
  EXPECT_EQ(sys.rhs[40], f.right_limit(kD1));
}

TEST(Assemble, ThreadCountDoesNotChangeBits) {
  const auto p = astroid_problem();
  Discretization d = disc(40);
  const auto a = assemble(p, d);
  d.threads = 4;
  const auto b = assemble(p, d);
  for (std::size_t j = 0; j < a.size(); ++j)
    EXPECT_EQ(std::memcmp(a.matrix.row(j).data(), b.matrix.row(j).data(), a.size() * sizeof(complex)), 0) << j;
}

TEST(Solve, IdentitySystem) {
  const auto c = circle();
  auto basis = std::make_shared<const BSplineBasis>(c, generate_nodes(c, 8, 4), 4);
  CollocationSystem sys;
  sys.basis = basis;
  sys.matrix = ComplexMatrix::identity(8);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int i = 0; i < 8; ++i) sys.rhs.emplace_back(g(rng), g(rng));
  const auto sol = solve(sys);
  EXPECT_EQ(sol.coefficients(), sys.rhs);
  EXPECT_EQ(sol.diagnostics.residual_inf, 0.0);
}

TEST(Solve, SingularSystemReported) {
  const auto c = circle();
  CollocationSystem sys;
  sys.basis = std::make_shared<const BSplineBasis>(c, generate_nodes(c, 8, 4), 4);
  sys.matrix = ComplexMatrix(8, 8);
  sys.rhs.assign(8, 1.0);
  EXPECT_THROW(solve(sys), SingularSystemError);
}

TEST(Solve, ZeroLambdaIsEnrichedInterpolation) {
  const auto c = astroid();
  Discretization d = disc(40);
  Problem p(c, Kernel::parse("t^2+s^2"), 0.0, astroid_rhs(), astroid_jumps());
  const auto sol = solve(p, d);
  auto basis = std::make_shared<const BSplineBasis>(c, generate_nodes(c, 40, 4), 4);
  const auto proj = bh_project(astroid_rhs(), basis, astroid_jumps(), d.eps2);
  EXPECT_LE(max_diff(sol.coefficients(), proj.coefficients()), 1e-10);
}

TEST(Solve, ZeroLambdaRecoversSplinePlusStep) {
  const auto c = astroid();
  auto basis = std::make_shared<const BSplineBasis>(c, generate_nodes(c, 40, 4), 4);
  const JumpSet js({kD1});
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  std::vector<complex> alpha(40);
  for (auto& a : alpha) a = {g(rng), g(rng)};
  const EnrichedSpline s(basis, js, alpha, {complex(0.8, -0.4)});
  auto value = [s](double theta, complex) { return s(theta); };
  const PiecewiseFn f(c, {{0.0, kD1, value}, {kD1, kTwoPi, value}}, js);
  const auto sol = solve(Problem(c, Kernel::parse("t^2+s^2"), 0.0, f, js), disc(40));
  EXPECT_LE(max_diff(sol.coefficients(), s.coefficients()), 1e-10);
}

TEST(Solve, ResidualAndDiagnostics) {
  const auto sol = solve(astroid_problem(), disc(40));
  EXPECT_TRUE(sol.diagnostics.residual_ok());
  EXPECT_GT(sol.diagnostics.condition_estimate_1norm, 1.0);
  EXPECT_TRUE(std::isfinite(sol.diagnostics.condition_estimate_1norm));
  EXPECT_GT(sol.diagnostics.min_pivot_ratio, 0.0);
}

TEST(Solve, LambdaContinuity) {
  Problem p = astroid_problem();
  const auto a = solve(p, disc(40));
  p.lambda += complex(0.6e-8, 0.8e-8);
  const auto b = solve(p, disc(40));
  EXPECT_LE(max_diff(a.coefficients(), b.coefficients()), 1e-5);
}

TEST(Solve, FullSizeAstroidSystem) {
  const auto sys = assemble(astroid_problem(), disc(320));
  EXPECT_EQ(sys.size(), 322u);
  const auto sol = solve(sys);
  EXPECT_TRUE(std::isfinite(sol.diagnostics.condition_estimate_1norm));
  EXPECT_TRUE(sol.diagnostics.residual_ok());
}

TEST(EvaluateSolution, CoefficientExamples) {
  const auto c = circle();
  auto basis = std::make_shared<const BSplineBasis>(c, generate_nodes(c, 16, 4), 4);
  const JumpSet js({2.0});
  const Solution zero{EnrichedSpline(basis, js, std::vector<complex>(16), {complex(0.0)}), {}};
  const Solution step{EnrichedSpline(basis, js, std::vector<complex>(16), {complex(1.0)}), {}};
  for (double th : {0.1, 1.9, 2.0, 2.5, 6.0}) EXPECT_EQ(evaluate_solution(zero, th), complex(0.0));
  EXPECT_EQ(evaluate_solution(step, 2.5), complex(1.0));
  EXPECT_EQ(evaluate_solution(step, 1.5), complex(0.0));
}

TEST(Manufactured, ZeroSolution) {
  const auto c = circle();
  const JumpSet js({kD1});
  const auto phi = pieces(c, js, "0", "0");
  const auto p = manufactured_problem(c, Kernel::parse("t^2+s^2"), 0.5, phi, {});
  for (double th : {0.3, 2.0, 5.0}) EXPECT_EQ(p.rhs.eval(th), complex(0.0));
  Discretization d = disc(40);
  EXPECT_EQ(max_diff(solve(p, d).coefficients(), std::vector<complex>(41)), 0.0);
}

TEST(Manufactured, IdentityOnCircle) {
  const auto c = circle();
  const auto phi = PiecewiseFn::smooth(c, [](double, complex t) { return t; });
  const auto p = manufactured_problem(c, Kernel::parse("t^2+s^2"), 0.5, phi, {});
  const auto sol = solve(p, disc(80));
  const auto err = measure_grid_errors(sol, phi, JumpSet{}, 0.01, 2000, 80);
  EXPECT_LE(err.max_including_wrap, 1e-4);
}

TEST(Manufactured, AstroidRhsMatchesPrintedConstant) {
  const auto p = manufactured_problem(astroid(), Kernel::parse("t^2+s^2"), 0.5, astroid_phi(), {});
  const auto printed = astroid_rhs();
  std::mt19937_64 rng(50);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (int i = 0; i < 50; ++i) {
    const double th = u(rng);
    EXPECT_LE(std::abs(p.rhs.eval(th) - printed.eval(th)), 2e-4) << th;
  }
}

TEST(Unenriched, ContinuousDataMatchesEnrichedPipeline) {
  const auto c = circle();
  const auto f = PiecewiseFn::smooth(c, [](double, complex t) { return t * t + 1.0 / t; });
  const Problem p(c, Kernel::parse("t^2+s^2"), 0.5, f, JumpSet{});
  EXPECT_LE(max_diff(solve(p, disc(40)).coefficients(), solve_without_enrichment(p, disc(40)).coefficients()),
            1e-10);
}

TEST(Unenriched, PlainSolveHasOnlySplineColumns) {
  const auto sol = solve_without_enrichment(astroid_problem(), disc(40));
  EXPECT_EQ(sol.coefficients().size(), 40u);
  EXPECT_TRUE(sol.phi.beta().empty());
}

TEST(Unenriched, AwayErrorDecreasesWithNodes) {
  const auto p = astroid_problem();
  double prev = INFINITY;
  for (std::size_t n : {80u, 160u}) {
    const auto sol = solve_without_enrichment(p, disc(n));
    const double away = measure_grid_errors(sol, *p.exact, p.jumps, 0.01, 2000, n).away;
    EXPECT_LT(away, prev) << n;
    prev = away;
  }
}

TEST(GridErrors, ClassifiesPoints) {
  const auto c = circle();
  const JumpSet js({pi});
  const auto exact = pieces(c, js, "0", "0");
  // unit error everywhere: every populated bucket reads 1
  const auto e = measure_grid_errors([](double) { return complex(1.0); }, exact, js, 0.01, 2000, 40);
  EXPECT_EQ(e.max_excluding_wrap, 1.0);
  EXPECT_EQ(e.max_including_wrap, 1.0);
  EXPECT_EQ(e.near_jump, 1.0);
  EXPECT_EQ(e.away, 1.0);
  // error confined to the reference neighbourhood only shows up in the wrap-inclusive figure
  const auto w = measure_grid_errors([](double th) { return complex(angular_distance(th, 0.0) < 0.015 ? 1.0 : 0.0); },
                                     exact, js, 0.01, 2000, 40);
  EXPECT_EQ(w.max_excluding_wrap, 0.0);
  EXPECT_EQ(w.max_including_wrap, 1.0);
}
