#ifndef EQ2PC_NIEZGODA_HPP
#define EQ2PC_NIEZGODA_HPP

#include <optional>
#include <string>
#include <vector>

#include "eq2pc/periodic_array.hpp"
#include "eq2pc/structure.hpp"

namespace eq2pc {

using KnownMask = PeriodicArray<unsigned char>;

/// DFTs of the n x n correlations, with a per-frequency known/unknown mask.
/// Unknown entries hold 0 and must never be read as data.
class DftCorrelationMap {
 public:
  DftCorrelationMap(Shape dims, int phases);

  const Shape& dims() const { return dims_; }
  int phases() const { return phases_; }

  const ComplexArray& operator()(int a, int b) const { return values_[index(a, b)]; }
  ComplexArray& operator()(int a, int b) { return values_[index(a, b)]; }
  const KnownMask& known(int a, int b) const { return known_[index(a, b)]; }
  KnownMask& known(int a, int b) { return known_[index(a, b)]; }

  bool is_known(int a, int b, std::size_t freq) const { return known(a, b)[freq] != 0; }
  void set(int a, int b, std::size_t freq, Complex v) {
    (*this)(a, b)[freq] = v;
    known(a, b)[freq] = 1;
  }
  bool complete() const;

 private:
  std::size_t index(int a, int b) const { return static_cast<std::size_t>((a - 1) * phases_ + (b - 1)); }

  Shape dims_;
  int phases_;
  std::vector<ComplexArray> values_;
  std::vector<KnownMask> known_;
};

/// Fully known map of the DFTs of all 2PCs of a structure.
DftCorrelationMap dft_correlations(const Structure& s);

struct PropertyCheck {
  std::string name;
  double max_violation = 0;  ///< relative to (P_1 ... P_D)^2
  bool passed = true;
};

struct PropertyReport {
  std::vector<PropertyCheck> checks;
  bool all_passed() const;
  const PropertyCheck& operator[](const std::string& name) const;
};

inline constexpr double kPropertyTolerance = 1e-9;

/// Checks, over all phases and frequencies, DFT symmetry, conjugate
/// transposition, the key product relation, the row-sum and inverse-sum
/// relations, both (P_1...P_D)^2 bounds and |C_ab,p| <= #a #b = C_ab,0.
/// Violations are measured relative to (P_1 ... P_D)^2.
PropertyReport check_properties(const DftCorrelationMap& map, double tol = kPropertyTolerance);
PropertyReport check_properties(const Structure& s, double tol = kPropertyTolerance);

/// Default absolute zero tolerance for a spectrum over dims: 1e-9 (P_1...P_D)^2.
double vanishing_tolerance(const Shape& dims);

/// Per phase, the number of frequencies with |C^_aa,p| <= tol.
std::vector<std::size_t> count_vanishing(const Structure& s, std::optional<double> tol = std::nullopt);

struct ResolvedEntry {
  int a;
  int b;
  std::size_t frequency;
  std::string rule;  ///< "symmetry", "inverse-sum", "row-sum" or "transpose"
};

struct RowReconstruction {
  DftCorrelationMap map;
  /// Frequencies (flat) where C^_gg,p vanishes, so the division rule fails.
  std::vector<std::size_t> undetermined_frequencies;
  /// Entries filled after the division stage, with the rule that filled them.
  std::vector<ResolvedEntry> resolved;
  /// Entries still unknown at the end.
  std::size_t unknown_entries = 0;
};

struct ReconstructionOptions {
  bool use_symmetry = false;
  bool use_inverse_sum = false;
  std::optional<double> tol;
};

class InconsistentRow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Completes all n^2 DFTs from the row {C^_g1, ..., C^_g(n-1)}. C^_gn follows
/// from the row-sum relation (for g = n the phase count #n is recovered from
/// the zero frequency; an ambiguous or non-integral count throws
/// InconsistentRow). Division by C^_gg,p fills every frequency where it does
/// not vanish; transposition and row sums propagate further. The optional
/// constraints (DFT symmetry, inverse sum) may resolve what is left.
RowReconstruction reconstruct_from_row(const Shape& dims, int phases, int gamma, const std::vector<ComplexArray>& row,
                                       ReconstructionOptions options = {});

/// The row a reconstruction takes as input, extracted from a structure.
std::vector<ComplexArray> correlation_row(const Structure& s, int gamma);

/// Perturbation added to the DFT map; absent pairs are zero.
class PerturbationDelta {
 public:
  PerturbationDelta(Shape dims, int phases);
  const Shape& dims() const { return dims_; }
  int phases() const { return phases_; }
  const ComplexArray& operator()(int a, int b) const { return values_[index(a, b)]; }
  ComplexArray& operator()(int a, int b) { return values_[index(a, b)]; }

 private:
  std::size_t index(int a, int b) const { return static_cast<std::size_t>((a - 1) * phases_ + (b - 1)); }
  Shape dims_;
  int phases_;
  std::vector<ComplexArray> values_;
};

/// Builds C^' = C^ + delta and checks row gamma is unchanged, every equality
/// property holds and the tight bound holds. One check per condition.
PropertyReport verify_ambiguity(const Structure& s, int gamma, const PerturbationDelta& delta,
                                double tol = kPropertyTolerance);

}  // namespace eq2pc

#endif  // EQ2PC_NIEZGODA_HPP
