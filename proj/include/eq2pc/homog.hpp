#ifndef EQ2PC_HOMOG_HPP
#define EQ2PC_HOMOG_HPP

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "eq2pc/structure.hpp"

namespace eq2pc {

template <typename Scalar>
struct FirstOrderBounds {
  Scalar voigt;
  Scalar reuss;
};

template <typename Scalar>
struct HashinShtrikmanBounds {
  Scalar upper;
  Scalar lower;
};

template <typename Scalar>
struct BoundsResult {
  Scalar voigt;
  Scalar reuss;
  Scalar hs_upper;
  Scalar hs_lower;
};

namespace detail {
template <typename Scalar>
void check_bound_inputs(Scalar v1, Scalar k1, Scalar k2) {
  if (!(v1 >= Scalar(0) && v1 <= Scalar(1))) throw std::invalid_argument("volume fraction outside [0, 1]");
  if (!(k1 > Scalar(0) && k2 > Scalar(0))) throw std::invalid_argument("conductivities must be positive");
}
}  // namespace detail

/// Arithmetic and harmonic means of (k1, k2) weighted by (v1, 1 - v1).
template <typename Scalar>
FirstOrderBounds<Scalar> voigt_reuss(Scalar v1, Scalar k1, Scalar k2) {
  detail::check_bound_inputs(v1, k1, k2);
  const Scalar v2 = Scalar(1) - v1;
  return {v1 * k1 + v2 * k2, Scalar(1) / (v1 / k1 + v2 / k2)};
}

/// Two-dimensional Hashin-Shtrikman bounds; the reference medium is k_max for
/// the upper and k_min for the lower bound.
template <typename Scalar>
HashinShtrikmanBounds<Scalar> hashin_shtrikman(Scalar v1, Scalar k1, Scalar k2) {
  detail::check_bound_inputs(v1, k1, k2);
  const Scalar v2 = Scalar(1) - v1;
  auto with_reference = [&](Scalar ref) { return Scalar(1) / (v1 / (ref + k1) + v2 / (ref + k2)) - ref; };
  const Scalar kmax = k1 > k2 ? k1 : k2;
  const Scalar kmin = k1 > k2 ? k2 : k1;
  return {with_reference(kmax), with_reference(kmin)};
}

template <typename Scalar>
BoundsResult<Scalar> bounds(Scalar v1, Scalar k1, Scalar k2) {
  const auto first = voigt_reuss(v1, k1, k2);
  const auto hs = hashin_shtrikman(v1, k1, k2);
  return {first.voigt, first.reuss, hs.upper, hs.lower};
}

struct BoundsSample {
  double v1;
  BoundsResult<double> values;
};

/// Bounds on a uniform grid of `samples` volume fractions spanning [0, 1].
std::vector<BoundsSample> bounds_curve(double k1, double k2, std::size_t samples);

/// Two-phase 2D structure with an isotropic conductivity per phase.
class ConductivityProblem {
 public:
  ConductivityProblem(Structure structure, double k1, double k2);

  const Structure& structure() const { return structure_; }
  double k1() const { return k1_; }
  double k2() const { return k2_; }
  double volume_fraction() const;

 private:
  Structure structure_;
  double k1_;
  double k2_;
};

struct SolverOptions {
  double tolerance = 1e-10;
  long max_iterations = 0;  ///< 0: ten times the number of unknowns
  bool parallel = true;     ///< solve both loadings concurrently
};

struct EffectiveTensor {
  Eigen::Matrix2d K;           ///< symmetrized
  double asymmetry = 0;        ///< |K12 - K21| / |K|_F before symmetrization
  std::array<long, 2> iterations{};
  bool asymmetric() const { return asymmetry > 1e-8; }
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kHomogCellBudget = std::size_t{1} << 24;

/// Upsamples by `refinement`, assembles bilinear elements on the periodic
/// pixel grid (one element per pixel, unit pixels, 2x2 Gauss) and solves for
/// the fluctuation under the loadings (1,0) and (0,1). Column j of K is the
/// average flux of loading j.
EffectiveTensor effective_conductivity(const ConductivityProblem& problem, std::size_t refinement = 1,
                                       const SolverOptions& options = {});

/// |K1 - K2|_F / |K1|_F.
double relative_deviation(const Eigen::Matrix2d& K1, const Eigen::Matrix2d& K2);

}  // namespace eq2pc

#endif  // EQ2PC_HOMOG_HPP
