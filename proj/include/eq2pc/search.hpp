#ifndef EQ2PC_SEARCH_HPP
#define EQ2PC_SEARCH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eq2pc/structure.hpp"

namespace eq2pc {

inline constexpr std::uint64_t kDefaultEnumerationBudget = std::uint64_t{1} << 24;

struct SearchSpec {
  Shape dims;
  int phases = 2;
  /// Fixed number of cells per phase; enumeration is restricted to it.
  std::optional<std::vector<std::size_t>> counts;
  /// Maximum number of classes returned.
  std::optional<std::size_t> limit;
  std::uint64_t budget = kDefaultEnumerationBudget;
  /// Include axis permutations (between axes of equal period) in relatedness.
  bool axis_permutations = false;
  /// Worker threads for fingerprinting; 0 picks the hardware concurrency.
  unsigned threads = 1;
};

/// Number of candidates the spec enumerates (saturates at UINT64_MAX).
std::uint64_t candidate_count(const SearchSpec& spec);

/// Colexicographic enumeration of all phase assignments (cell 0 varies
/// fastest), optionally restricted to a phase-count vector.
class StructureEnumerator {
 public:
  /// Throws BudgetExceeded when the candidate count exceeds spec.budget.
  explicit StructureEnumerator(const SearchSpec& spec);

  std::uint64_t count() const { return count_; }
  /// Next structure, or nullopt when exhausted.
  std::optional<Structure> next();

 private:
  bool advance();

  Shape dims_;
  int phases_;
  bool fixed_counts_;
  std::vector<std::int64_t> cells_;
  std::uint64_t count_;
  bool started_ = false;
  bool done_ = false;
};

struct RelationOptions {
  bool axis_permutations = false;
};

/// True iff some composition of cyclic shifts, axis reflections and phase
/// permutations maps `a` onto `b`. Mismatched dims or phases are unrelated.
bool related(const Structure& a, const Structure& b, RelationOptions options = {});

/// Default limit on (group size x cells) work for canonical forms.
inline constexpr std::uint64_t kCanonicalBudget = std::uint64_t{1} << 28;

/// Lexicographically smallest cell sequence over the relatedness group;
/// equal exactly for related structures. Throws BudgetExceeded if the group
/// is too large.
std::string canonical_form(const Structure& s, RelationOptions options = {},
                           std::uint64_t budget = kCanonicalBudget);

struct EquivalenceClass {
  std::string fingerprint;
  std::vector<Structure> members;
};

/// Buckets every candidate by the fingerprint of its independent 2PCs,
/// re-verifies exact equality, keeps one representative per relatedness orbit
/// (first in enumeration order) and returns buckets with >= 2 unrelated
/// members, ordered by the enumeration index of their first member.
std::vector<EquivalenceClass> find_root_sets(const SearchSpec& spec);

}  // namespace eq2pc

#endif  // EQ2PC_SEARCH_HPP
