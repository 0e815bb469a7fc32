#include <gtest/gtest.h>

#include <random>
#include <set>

#include "eq2pc/search.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace eq2pc;

namespace {

std::vector<int> cells_of(const Structure& s) { return std::vector<int>(s.cells().values().begin(), s.cells().values().end()); }

Structure random_structure(std::mt19937& rng, const Shape& dims, int phases) {
  std::uniform_int_distribution<int> u(1, phases);
  std::vector<std::int64_t> cells(element_count(dims));
  for (auto& c : cells) c = u(rng);
  return Structure(dims, phases, cells);
}

/// Random shift, reflection and phase permutation of s.
Structure transformed(std::mt19937& rng, const Structure& s) {
  std::vector<int> perm(static_cast<std::size_t>(s.phases()));
  std::iota(perm.begin(), perm.end(), 1);
  std::shuffle(perm.begin(), perm.end(), rng);
  const Shape& d = s.dims();
  std::vector<Index> shift(d.size());
  std::vector<bool> flip(d.size());
  for (std::size_t r = 0; r < d.size(); ++r) {
    shift[r] = static_cast<Index>(rng() % d[r]);
    flip[r] = rng() % 2;
  }
  IntArray out(d);
  std::vector<std::size_t> p(d.size());
  std::vector<Index> src(d.size());
  for (std::size_t f = 0; f < s.size(); ++f) {
    unravel(f, d, p);
    for (std::size_t r = 0; r < d.size(); ++r) src[r] = (flip[r] ? -static_cast<Index>(p[r]) : static_cast<Index>(p[r])) + shift[r];
    out[f] = perm[static_cast<std::size_t>(s.cells().at(src) - 1)];
  }
  return Structure(out, s.phases());
}

bool contains_pair(const std::vector<EquivalenceClass>& classes, const Structure& x, const Structure& y) {
  for (const auto& c : classes) {
    bool hx = false, hy = false;
    for (const auto& m : c.members) {
      hx = hx || related(m, x);
      hy = hy || related(m, y);
    }
    if (hx && hy) return true;
  }
  return false;
}

}  // namespace

TEST(Enumerator, Counts) {
  EXPECT_EQ(candidate_count({.dims = {2}}), 4u);
  EXPECT_EQ(candidate_count({.dims = {4, 3}}), 4096u);
  SearchSpec fixed{.dims = {4, 3}, .counts = std::vector<std::size_t>{5, 7}};
  EXPECT_EQ(candidate_count(fixed), 792u);
  StructureEnumerator e(fixed);
  std::set<std::vector<std::int64_t>> seen;
  while (auto s = e.next()) {
    EXPECT_EQ(phase_counts(*s), (std::vector<std::int64_t>{5, 7}));
    seen.insert(s->cells().values());
  }
  EXPECT_EQ(seen.size(), 792u);
}

TEST(Enumerator, ColexOrderAndBudget) {
  StructureEnumerator e({.dims = {2}, .phases = 3});
  std::vector<std::vector<std::int64_t>> order;
  while (auto s = e.next()) order.push_back(s->cells().values());
  ASSERT_EQ(order.size(), 9u);
  EXPECT_EQ(order[0], (std::vector<std::int64_t>{1, 1}));
  EXPECT_EQ(order[1], (std::vector<std::int64_t>{2, 1}));
  EXPECT_EQ(order[3], (std::vector<std::int64_t>{1, 2}));
  EXPECT_THROW(StructureEnumerator({.dims = {30}, .budget = 1000}), BudgetExceeded);
  EXPECT_THROW(find_root_sets({.dims = {30}, .budget = 1000}), BudgetExceeded);
}

TEST(Related, BasicRelations) {
  const Structure s = fixtures::root2d_a();
  EXPECT_TRUE(related(s, s));
  IntArray shifted_cells = shifted(s.cells(), std::vector<Index>{1, 0});
  EXPECT_TRUE(related(s, Structure(shifted_cells, 2)));
  IntArray swapped = s.cells();
  for (auto& v : swapped.data()) v = 3 - v;
  EXPECT_TRUE(related(s, Structure(swapped, 2)));
  EXPECT_FALSE(related(fixtures::root2d_a(), fixtures::root2d_b()));
  EXPECT_FALSE(related(fixtures::root1d_a(), fixtures::root1d_b()));
  EXPECT_FALSE(related(s, fixtures::root1d_a()));
}

TEST(Related, AgreesWithExplicitGroup) {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 60; ++trial) {
    const Shape dims = trial % 3 == 0 ? Shape{6} : (trial % 3 == 1 ? Shape{3, 2} : Shape{2, 2, 2});
    const int n = 2 + trial % 2;
    const Structure a = random_structure(rng, dims, n);
    const Structure b = trial % 2 ? transformed(rng, a) : random_structure(rng, dims, n);
    const bool want = oracle::related(dims, cells_of(a), cells_of(b), n);
    EXPECT_EQ(related(a, b), want);
    EXPECT_EQ(canonical_form(a) == canonical_form(b), want);
  }
}

TEST(Related, AxisPermutationIsOptIn) {
  const Structure a({2, 2}, 2, {1, 1, 2, 2});
  const Structure t({2, 2}, 2, {1, 2, 1, 2});
  EXPECT_FALSE(related(a, t));
  EXPECT_TRUE(related(a, t, {.axis_permutations = true}));
}

TEST(CanonicalForm, Invariance) {
  std::mt19937 rng(12);
  const Structure s = fixtures::root2d_a();
  for (int i = 0; i < 10; ++i) EXPECT_EQ(canonical_form(transformed(rng, s)), canonical_form(s));
  EXPECT_NE(canonical_form(fixtures::root2d_a()), canonical_form(fixtures::root2d_b()));
  EXPECT_EQ(canonical_form(Structure({3, 2}, 1, {1, 1, 1, 1, 1, 1})),
            canonical_form(Structure({3, 2}, 1, {1, 1, 1, 1, 1, 1})));
  EXPECT_THROW(canonical_form(s, {}, 10), BudgetExceeded);
}

TEST(FindRootSets, TooFewCells) { EXPECT_TRUE(find_root_sets({.dims = {2}}).empty()); }

TEST(FindRootSets, TwoDimensionalRoots) {
  const auto classes = find_root_sets({.dims = {4, 3}});
  ASSERT_FALSE(classes.empty());
  EXPECT_TRUE(contains_pair(classes, fixtures::root2d_a(), fixtures::root2d_b()));
  for (const auto& c : classes) {
    for (std::size_t i = 0; i < c.members.size(); ++i)
      for (std::size_t j = i + 1; j < c.members.size(); ++j) {
        EXPECT_TRUE(equivalent(c.members[i], c.members[j]));
        EXPECT_FALSE(related(c.members[i], c.members[j]));
      }
    EXPECT_EQ(c.fingerprint, independent_set(c.members[0]).fingerprint());
  }
}

TEST(FindRootSets, OneDimensionalRoots) {
  const auto classes = find_root_sets({.dims = {12}, .threads = 0});
  EXPECT_TRUE(contains_pair(classes, fixtures::root1d_a(), fixtures::root1d_b()));
}

TEST(FindRootSets, MatchesNaiveOracleOnSmallGrids) {
  for (const Shape& dims : {Shape{4}, Shape{6}, Shape{8}, Shape{2, 3}, Shape{2, 4}, Shape{3, 3}, Shape{2, 2, 2}, Shape{9}, Shape{2, 6}, Shape{12}}) {
    const auto got = find_root_sets({.dims = dims});
    const auto want = oracle::root_classes(dims, 2);
    ASSERT_EQ(got.size(), want.size()) << to_string(dims);
    for (std::size_t c = 0; c < got.size(); ++c) {
      ASSERT_EQ(got[c].members.size(), want[c].size());
      for (std::size_t m = 0; m < want[c].size(); ++m) EXPECT_EQ(cells_of(got[c].members[m]), want[c][m]);
    }
  }
}

TEST(FindRootSets, PhaseCountStrataAreLossless) {
  const Shape dims{2, 4};
  const auto full = find_root_sets({.dims = dims});
  std::size_t stratified = 0;
  for (std::size_t k = 0; k <= 8; ++k)
    stratified += find_root_sets({.dims = dims, .counts = std::vector<std::size_t>{k, 8 - k}}).size();
  EXPECT_EQ(stratified, full.size());
}

TEST(FindRootSets, ThreadsAndLimit) {
  const auto one = find_root_sets({.dims = {4, 3}});
  const auto many = find_root_sets({.dims = {4, 3}, .threads = 4});
  ASSERT_EQ(one.size(), many.size());
  for (std::size_t i = 0; i < one.size(); ++i) EXPECT_EQ(one[i].members, many[i].members);
  EXPECT_EQ(find_root_sets({.dims = {4, 3}, .limit = 1}).size(), 1u);
}
