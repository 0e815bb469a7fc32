#include <gtest/gtest.h>

#include <random>

#include "eq2pc/niezgoda.hpp"
#include "fixtures.hpp"

using namespace eq2pc;

namespace {

Structure random_structure(std::mt19937& rng, const Shape& dims, int phases) {
  std::uniform_int_distribution<int> u(1, phases);
  std::vector<std::int64_t> cells(element_count(dims));
  for (auto& c : cells) c = u(rng);
  return Structure(dims, phases, cells);
}

double map_error(const DftCorrelationMap& a, const DftCorrelationMap& b) {
  double m = 0;
  for (int x = 1; x <= a.phases(); ++x)
    for (int y = 1; y <= a.phases(); ++y) m = std::max(m, max_abs_difference(a(x, y), b(x, y)));
  return m;
}

}  // namespace

TEST(DftCorrelations, OneDimensionalDiagonals) {
  const auto map = dft_correlations(fixtures::ambiguity1d());
  EXPECT_TRUE(map.complete());
  const std::vector<std::vector<double>> want{{9, 4, 0, 1, 0, 4}, {4, 3, 1, 0, 1, 3}, {1, 1, 1, 1, 1, 1}};
  for (int a = 1; a <= 3; ++a)
    for (std::size_t p = 0; p < 6; ++p)
      EXPECT_NEAR(std::abs(map(a, a)[p] - want[static_cast<std::size_t>(a - 1)][p]), 0.0, 1e-9);
}

TEST(DftCorrelations, TwoDimensionalCounterexampleSpectra) {
  const auto map = dft_correlations(fixtures::vanishing_a());
  const double rows11[4] = {4, 2, 0, 2};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(std::abs(map(1, 1)[i * 3 + j] - rows11[i]), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(map(1, 2)[1] - Complex(-6, -2 * std::sqrt(3.0))), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(map(1, 2)[2] - Complex(-6, 2 * std::sqrt(3.0))), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(map(2, 2)[0] - 36.0), 0.0, 1e-9);
}

TEST(Properties, HoldForRandomStructures) {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Structure s = random_structure(rng, trial % 2 ? Shape{5, 4} : Shape{7}, 2 + trial % 3);
    const auto report = check_properties(s);
    EXPECT_TRUE(report.all_passed());
    EXPECT_EQ(report.checks.size(), 8u);
  }
}

TEST(Properties, DetectTampering) {
  auto map = dft_correlations(fixtures::vanishing_b());
  map(1, 2)[1] += Complex(0.5, 0.0);
  const auto report = check_properties(map);
  EXPECT_FALSE(report.all_passed());
  EXPECT_FALSE(report["conjugate_transpose"].passed);
  EXPECT_FALSE(report["row_sum"].passed);
  EXPECT_THROW(report["missing"], std::out_of_range);
}

TEST(Vanishing, ReferenceCounts) {
  EXPECT_EQ(count_vanishing(fixtures::vanishing_a()), (std::vector<std::size_t>{3, 6, 0}));
  EXPECT_EQ(count_vanishing(fixtures::vanishing_b()), (std::vector<std::size_t>{2, 2, 3}));
  EXPECT_EQ(count_vanishing(fixtures::vanishing_n4()), (std::vector<std::size_t>{3, 0, 10, 4}));
  EXPECT_EQ(count_vanishing(fixtures::ambiguity1d()), (std::vector<std::size_t>{2, 1, 0}));
}

TEST(Reconstruction, UndeterminedFrequencies) {
  const Structure s = fixtures::ambiguity1d();
  const auto r = reconstruct_from_row(s.dims(), 3, 1, correlation_row(s, 1));
  EXPECT_EQ(r.undetermined_frequencies, (std::vector<std::size_t>{2, 4}));
  EXPECT_EQ(r.unknown_entries, 8u);
  EXPECT_FALSE(r.map.complete());
}

TEST(Reconstruction, ConstraintsResolveTheRest) {
  const Structure s = fixtures::ambiguity1d();
  const auto r = reconstruct_from_row(s.dims(), 3, 1, correlation_row(s, 1), {.use_symmetry = true, .use_inverse_sum = true});
  EXPECT_EQ(r.unknown_entries, 0u);
  EXPECT_LT(map_error(r.map, dft_correlations(s)), 1e-9);
  bool inverse_sum_used = false;
  for (const auto& e : r.resolved) inverse_sum_used = inverse_sum_used || e.rule == "inverse-sum";
  EXPECT_TRUE(inverse_sum_used);
}

TEST(Reconstruction, LastPhaseRow) {
  const Structure s = fixtures::ambiguity1d();
  const auto r = reconstruct_from_row(s.dims(), 3, 3, correlation_row(s, 3));
  EXPECT_TRUE(r.undetermined_frequencies.empty());
  EXPECT_EQ(r.unknown_entries, 0u);
  EXPECT_LT(map_error(r.map, dft_correlations(s)), 1e-9);
}

TEST(Reconstruction, TwoPhasesAlwaysComplete) {
  std::mt19937 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const Structure s = random_structure(rng, Shape{4, 3}, 2);
    const auto r = reconstruct_from_row(s.dims(), 2, 1, correlation_row(s, 1));
    EXPECT_EQ(r.unknown_entries, 0u);
    EXPECT_LT(map_error(r.map, dft_correlations(s)), 1e-9);
  }
}

TEST(Reconstruction, NonVanishingRowDeterminesAll) {
  std::mt19937 rng(43);
  int checked = 0;
  for (int trial = 0; trial < 40 && checked < 10; ++trial) {
    const Structure s = random_structure(rng, Shape{5, 3}, 3);
    const auto counts = count_vanishing(s);
    if (counts[0] != 0) continue;
    ++checked;
    const auto r = reconstruct_from_row(s.dims(), 3, 1, correlation_row(s, 1));
    EXPECT_TRUE(r.undetermined_frequencies.empty());
    EXPECT_LT(map_error(r.map, dft_correlations(s)), 1e-9);
  }
  EXPECT_GT(checked, 0);
}

TEST(Reconstruction, RejectsBadRows) {
  const Structure s = fixtures::ambiguity1d();
  auto row = correlation_row(s, 1);
  EXPECT_THROW(reconstruct_from_row(s.dims(), 3, 1, {row[0]}), InconsistentRow);
  EXPECT_THROW(reconstruct_from_row(s.dims(), 3, 4, row), PhaseError);
  auto last = correlation_row(s, 3);
  last[0][0] += 0.5;
  EXPECT_THROW(reconstruct_from_row(s.dims(), 3, 3, last), InconsistentRow);
}

TEST(Ambiguity, PerturbationKeepsAllConstraints) {
  const auto report = verify_ambiguity(fixtures::vanishing_a(), 1, fixtures::ambiguity_delta());
  for (const auto& c : report.checks) EXPECT_TRUE(c.passed) << c.name << " " << c.max_violation;
  EXPECT_TRUE(report.all_passed());
}

TEST(Ambiguity, WrongRowOrPerturbationFails) {
  EXPECT_FALSE(verify_ambiguity(fixtures::vanishing_a(), 2, fixtures::ambiguity_delta())["row_unchanged"].passed);
  auto delta = fixtures::ambiguity_delta();
  delta(2, 3)[6] = 1;
  EXPECT_FALSE(verify_ambiguity(fixtures::vanishing_a(), 1, delta).all_passed());
}
