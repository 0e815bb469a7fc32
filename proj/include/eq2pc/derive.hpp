#ifndef EQ2PC_DERIVE_HPP
#define EQ2PC_DERIVE_HPP

#include <stdexcept>
#include <vector>

#include "eq2pc/periodic_array.hpp"
#include "eq2pc/structure.hpp"

namespace eq2pc {

/// A derived phase would claim a cell twice, or two phases would share one.
class OverlapError : public std::runtime_error {
 public:
  OverlapError(const std::string& what, std::vector<std::size_t> cell)
      : std::runtime_error(what), cell_(std::move(cell)) {}
  const std::vector<std::size_t>& cell() const { return cell_; }

 private:
  std::vector<std::size_t> cell_;
};

/// One binary kernel per phase, all sharing the kernel shape z.
class KernelList {
 public:
  explicit KernelList(std::vector<IntArray> kernels);

  std::size_t size() const { return kernels_.size(); }
  const Shape& shape() const { return kernels_.front().dims(); }
  const IntArray& operator[](int phase) const { return kernels_.at(static_cast<std::size_t>(phase - 1)); }
  const std::vector<IntArray>& kernels() const { return kernels_; }
  Factors factors() const { return Factors(shape()); }

 private:
  std::vector<IntArray> kernels_;
};

/// Surjective relabeling of phases 1..n onto 1..m.
class CoalescencePlan {
 public:
  /// mapping[a - 1] is the new phase of old phase a.
  explicit CoalescencePlan(std::vector<int> mapping);

  static CoalescencePlan identity(int phases);

  int old_phases() const { return static_cast<int>(mapping_.size()); }
  int new_phases() const { return new_phases_; }
  int operator()(int old_phase) const { return mapping_.at(static_cast<std::size_t>(old_phase - 1)); }
  const std::vector<int>& mapping() const { return mapping_; }

 private:
  std::vector<int> mapping_;
  int new_phases_;
};

/// Kernel zero-padded ("appended trivial embedding") into the dims `target`:
/// kernel values in the leading corner, trailing indices beyond the kernel
/// rank fixed at 0.
IntArray pad_kernel(const IntArray& kernel, const Shape& target);

/// Trivially embeds the structure by z; old phases keep their cells at the
/// stride positions and the new phase n + 1 fills the rest. A factor of all
/// ones gives an empty new phase and logs a warning.
Structure phase_extend(const Structure& s, const Factors& z);

/// I'_a = K0_a * I_a^{z} for a = 1..n, phase n + 1 filling the complement.
/// Throws OverlapError naming the first cell claimed twice.
Structure kernel_extend(const Structure& s, const KernelList& kernels);

/// Same with an embedding factor z other than the kernel shape; kernels
/// larger than z along some axis can overlap.
Structure kernel_extend(const Structure& s, const KernelList& kernels, const Factors& z);

/// Relabels cells; the indicator of a new phase is the sum of its preimages.
Structure coalesce(const Structure& s, const CoalescencePlan& plan);

/// Pixel replication by factor_d along every axis d.
Structure upsample(const Structure& s, const Factors& factor);

}  // namespace eq2pc

#endif  // EQ2PC_DERIVE_HPP
