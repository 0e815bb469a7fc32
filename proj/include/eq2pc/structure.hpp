#ifndef EQ2PC_STRUCTURE_HPP
#define EQ2PC_STRUCTURE_HPP

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "eq2pc/periodic_array.hpp"

namespace eq2pc {

class PhaseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// n-phase periodic structure: every cell holds a phase index in 1..n.
class Structure {
 public:
  Structure(IntArray cells, int phases);
  Structure(Shape dims, int phases, std::vector<std::int64_t> cells);

  const Shape& dims() const { return cells_.dims(); }
  std::size_t rank() const { return cells_.rank(); }
  std::size_t size() const { return cells_.size(); }
  int phases() const { return phases_; }
  const IntArray& cells() const { return cells_; }
  int operator[](std::size_t flat) const { return static_cast<int>(cells_[flat]); }

  bool operator==(const Structure&) const = default;

 private:
  IntArray cells_;
  int phases_;
};

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(const std::string& bytes);

/// Binary indicator I_alpha of one phase (1-based).
IntArray indicator(const Structure& s, int phase);

/// All n indicators; they partition the unit cell.
std::vector<IntArray> indicators(const Structure& s);

/// Number of cells of each phase (#alpha), index 0 is phase 1.
std::vector<std::int64_t> phase_counts(const Structure& s);

/// C_{a1 a2} = I_{a1} (*) I_{a2}, exact non-negative integers.
IntArray two_point(const Structure& s, int a1, int a2);

struct PhasePair {
  int first;
  int second;
  auto operator<=>(const PhasePair&) const = default;
};

/// The n(n-1)/2 independent correlations C_{a1 a2}, a1 <= a2 <= n - 1.
class CorrelationSet {
 public:
  CorrelationSet(Shape dims, int phases, std::map<PhasePair, IntArray> entries);

  const Shape& dims() const { return dims_; }
  int phases() const { return phases_; }
  const std::map<PhasePair, IntArray>& entries() const { return entries_; }
  const IntArray& at(int a1, int a2) const { return entries_.at({a1, a2}); }

  /// Canonical little-endian serialization: dims, phases, then entries in
  /// sorted pair order.
  std::string bytes() const;
  /// Hex SHA-256 of bytes().
  std::string fingerprint() const;

  bool operator==(const CorrelationSet&) const = default;

 private:
  Shape dims_;
  int phases_;
  std::map<PhasePair, IntArray> entries_;
};

CorrelationSet independent_set(const Structure& s);

/// Full n x n table of 2PCs, 1-based access.
class CorrelationTable {
 public:
  CorrelationTable(int phases, std::vector<IntArray> entries) : phases_(phases), entries_(std::move(entries)) {}
  int phases() const { return phases_; }
  const IntArray& operator()(int a1, int a2) const { return entries_[index(a1, a2)]; }
  IntArray& operator()(int a1, int a2) { return entries_[index(a1, a2)]; }
  bool operator==(const CorrelationTable&) const = default;

 private:
  std::size_t index(int a1, int a2) const { return static_cast<std::size_t>((a1 - 1) * phases_ + (a2 - 1)); }
  int phases_;
  std::vector<IntArray> entries_;
};

class InconsistentCorrelations : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All n^2 correlations of a structure computed directly.
CorrelationTable all_two_point(const Structure& s);

/// Completes an independent set to all n^2 correlations through index
/// negation and the last-phase relation. Throws InconsistentCorrelations
/// when a completed entry is negative.
CorrelationTable complete_correlations(const CorrelationSet& cs);

/// Exact 2PC-equivalence. Structures of different dims or phase count are
/// never equivalent.
bool equivalent(const Structure& a, const Structure& b);

/// Phase vector of an M-point correlation, M >= 2.
class MpcSpec {
 public:
  explicit MpcSpec(std::vector<int> phases);
  std::size_t order() const { return phases_.size(); }
  const std::vector<int>& phases() const { return phases_; }

 private:
  std::vector<int> phases_;
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Default entry budget for a materialized M-point correlation.
inline constexpr std::size_t kMpcEntryBudget = std::size_t{1} << 24;

/// One slice C_{<M>alpha}(p_1, ..., p_{M-2}, .) for the given leading shifts
/// (flat offsets into dims).
IntArray mpc_slice(const Structure& s, const MpcSpec& spec, std::span<const std::size_t> leading_shifts);

/// Full M-point correlation with dims (P, P, ..., P) repeated M - 1 times.
/// Throws BudgetExceeded above `budget` entries.
IntArray mpc(const Structure& s, const MpcSpec& spec, std::size_t budget = kMpcEntryBudget);

struct MpcDeviation {
  long double norm_first = 0;       ///< ||C(first)||_2
  long double norm_difference = 0; ///< ||C(first) - C(second)||_2
  double relative() const { return norm_first > 0 ? static_cast<double>(norm_difference / norm_first) : 0.0; }
};

/// Streamed ||C(a) - C(b)|| / ||C(a)|| accumulated one slice at a time,
/// never materializing the full array.
MpcDeviation mpc_deviation(const Structure& a, const Structure& b, const MpcSpec& spec);

struct Rational {
  std::int64_t num;
  std::int64_t den;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

/// Reduced fraction; den > 0.
Rational make_rational(std::int64_t num, std::int64_t den);

/// #alpha / (P_1 ... P_D) per phase.
std::vector<Rational> volume_fractions(const Structure& s);

}  // namespace eq2pc

#endif  // EQ2PC_STRUCTURE_HPP
