// Structures, kernels and reference values shared by unit and acceptance tests.
#ifndef EQ2PC_TESTS_FIXTURES_HPP
#define EQ2PC_TESTS_FIXTURES_HPP

#include <Eigen/Core>
#include <vector>

#include "eq2pc/derive.hpp"
#include "eq2pc/niezgoda.hpp"
#include "eq2pc/structure.hpp"

namespace fixtures {

using eq2pc::IntArray;
using eq2pc::Structure;

inline Structure root1d_a() { return Structure({12}, 2, {1, 1, 1, 2, 1, 2, 2, 1, 2, 2, 2, 2}); }
inline Structure root1d_b() { return Structure({12}, 2, {1, 1, 2, 1, 2, 1, 1, 2, 2, 2, 2, 2}); }

inline Structure root2d_a() { return Structure({4, 3}, 2, {1, 2, 2, 2, 2, 1, 2, 1, 1, 2, 2, 1}); }
inline Structure root2d_b() { return Structure({4, 3}, 2, {1, 2, 2, 2, 1, 1, 1, 2, 2, 1, 2, 2}); }

/// root2d_a mirrored along axis 1; shares every 2PC with root2d_a.
inline Structure root2d_a_mirrored() { return Structure({4, 3}, 2, {2, 2, 1, 1, 2, 2, 1, 1, 2, 1, 2, 2}); }

inline eq2pc::KernelList kernels2d() {
  return eq2pc::KernelList({IntArray({2, 3}, {1, 1, 1, 0, 1, 0}), IntArray({2, 3}, {1, 0, 0, 1, 1, 0})});
}

inline eq2pc::KernelList kernels3d() {
  return eq2pc::KernelList({IntArray({2, 2, 3}, {1, 1, 1, 1, 0, 0, 1, 0, 0, 1, 0, 0}),
                            IntArray({2, 2, 3}, {1, 1, 0, 1, 0, 1, 1, 1, 1, 0, 0, 1})});
}

/// Kernel extension followed by merging phases {1,2}.
inline Structure coalesced_kernel_extension(const Structure& s) {
  return eq2pc::coalesce(eq2pc::kernel_extend(s, kernels2d()), eq2pc::CoalescencePlan({1, 1, 2}));
}

inline Structure ambiguity1d() { return Structure({6}, 3, {1, 1, 1, 2, 2, 3}); }
inline Structure vanishing_a() { return Structure({4, 3}, 3, {2, 3, 1, 2, 2, 1, 2, 3, 3, 2, 2, 3}); }
inline Structure vanishing_b() { return Structure({4, 3}, 3, {1, 1, 3, 1, 2, 3, 1, 1, 3, 3, 1, 2}); }
inline Structure vanishing_n4() {
  return Structure({4, 5}, 4, {1, 2, 3, 4, 2, 1, 4, 4, 4, 4, 2, 4, 3, 1, 4, 4, 4, 1, 4, 4});
}

/// Flip of root2d_a at (0,0) and (0,2): phase 1 forms a percolating band.
inline Structure flipped_root() { return Structure({4, 3}, 2, {2, 2, 1, 2, 2, 1, 2, 1, 1, 2, 2, 1}); }

/// Perturbation of the DFT correlations of vanishing_a() leaving row 1
/// untouched; nonzero only in frequency row 2.
inline eq2pc::PerturbationDelta ambiguity_delta() {
  eq2pc::PerturbationDelta delta({4, 3}, 3);
  const double row[3] = {-2, 1, 1};
  for (std::size_t j = 0; j < 3; ++j) {
    delta(2, 2)[2 * 3 + j] = row[j];
    delta(3, 3)[2 * 3 + j] = row[j];
    delta(2, 3)[2 * 3 + j] = -row[j];
    delta(3, 2)[2 * 3 + j] = -row[j];
  }
  return delta;
}

struct Tensor {
  double k11, k12, k22;
  Eigen::Matrix2d matrix() const {
    Eigen::Matrix2d m;
    m << k11, k12, k12, k22;
    return m;
  }
};

}  // namespace fixtures

#endif  // EQ2PC_TESTS_FIXTURES_HPP
