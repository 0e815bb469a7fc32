#include "eq2pc/derive.hpp"

#include <algorithm>
#include <iostream>
#include <set>

namespace eq2pc {

KernelList::KernelList(std::vector<IntArray> kernels) : kernels_(std::move(kernels)) {
  if (kernels_.empty()) throw std::invalid_argument("kernel list is empty");
  for (std::size_t a = 0; a < kernels_.size(); ++a) {
    const IntArray& k = kernels_[a];
    if (k.dims() != kernels_.front().dims())
      throw DimensionError("kernel " + std::to_string(a + 1) + " has dims " + to_string(k.dims()) + ", expected " +
                           to_string(kernels_.front().dims()));
    bool any = false;
    for (auto v : k.values()) {
      if (v != 0 && v != 1) throw std::invalid_argument("kernel " + std::to_string(a + 1) + " is not binary");
      any = any || v == 1;
    }
    if (!any) throw std::invalid_argument("kernel " + std::to_string(a + 1) + " is empty");
  }
}

CoalescencePlan::CoalescencePlan(std::vector<int> mapping) : mapping_(std::move(mapping)), new_phases_(0) {
  if (mapping_.empty()) throw std::invalid_argument("coalescence plan is empty");
  std::set<int> targets(mapping_.begin(), mapping_.end());
  new_phases_ = static_cast<int>(targets.size());
  if (*targets.begin() != 1 || *targets.rbegin() != new_phases_)
    throw std::invalid_argument("coalescence plan must map onto 1..m without gaps");
}

CoalescencePlan CoalescencePlan::identity(int phases) {
  std::vector<int> m(static_cast<std::size_t>(phases));
  for (int a = 0; a < phases; ++a) m[static_cast<std::size_t>(a)] = a + 1;
  return CoalescencePlan(std::move(m));
}

IntArray pad_kernel(const IntArray& kernel, const Shape& target) {
  const Shape& kd = kernel.dims();
  if (kd.size() > target.size()) throw DimensionError("kernel rank exceeds target rank");
  for (std::size_t r = 0; r < kd.size(); ++r)
    if (kd[r] > target[r]) throw DimensionError("kernel does not fit into " + to_string(target));
  IntArray out(target);
  const Shape strides = strides_of(target);
  std::vector<std::size_t> q(kd.size());
  for (std::size_t flat = 0; flat < kernel.size(); ++flat) {
    unravel(flat, kd, q);
    std::size_t t = 0;
    for (std::size_t r = 0; r < kd.size(); ++r) t += q[r] * strides[r];
    out[t] = kernel[flat];
  }
  return out;
}

Structure phase_extend(const Structure& s, const Factors& z) {
  if (z.all_ones())
    std::clog << "warning: phase extension with unit factors leaves phase " << s.phases() + 1 << " empty\n";
  const int fill = s.phases() + 1;
  // Embedded zeros become the new phase.
  IntArray cells = trivial_embed(s.cells(), z);
  for (auto& v : cells.data())
    if (v == 0) v = fill;
  return Structure(std::move(cells), fill);
}

Structure kernel_extend(const Structure& s, const KernelList& kernels) { return kernel_extend(s, kernels, kernels.factors()); }

Structure kernel_extend(const Structure& s, const KernelList& kernels, const Factors& z) {
  if (static_cast<int>(kernels.size()) != s.phases())
    throw std::invalid_argument("kernel list has " + std::to_string(kernels.size()) + " kernels for " +
                                std::to_string(s.phases()) + " phases");
  const Shape target = scaled_shape(s.dims(), z);
  const int fill = s.phases() + 1;
  IntArray cells(target, 0);

  // K0_a * I_a^{z} evaluated as a sparse convolution: every embedded cell
  // stamps its kernel.
  const IntArray embedded = trivial_embed(s.cells(), z);
  std::vector<std::vector<std::size_t>> offsets(kernels.size());
  for (int a = 1; a <= s.phases(); ++a) {
    const IntArray padded = pad_kernel(kernels[a], target);
    for (std::size_t i = 0; i < padded.size(); ++i)
      if (padded[i] != 0) offsets[static_cast<std::size_t>(a - 1)].push_back(i);
  }
  std::vector<std::size_t> p(target.size()), k(target.size());
  for (std::size_t flat = 0; flat < embedded.size(); ++flat) {
    const auto phase = embedded[flat];
    if (phase == 0) continue;
    unravel(flat, target, p);
    for (std::size_t off : offsets[static_cast<std::size_t>(phase - 1)]) {
      unravel(off, target, k);
      for (std::size_t d = 0; d < target.size(); ++d) k[d] = (k[d] + p[d]) % target[d];
      const std::size_t t = cells.offset(std::span<const std::size_t>(k));
      if (cells[t] != 0)
        throw OverlapError("kernel extension claims cell " + to_string(Shape(k.begin(), k.end())) + " for phases " +
                               std::to_string(cells[t]) + " and " + std::to_string(phase),
                           k);
      cells[t] = phase;
    }
  }
  for (auto& v : cells.data())
    if (v == 0) v = fill;
  return Structure(std::move(cells), fill);
}

Structure coalesce(const Structure& s, const CoalescencePlan& plan) {
  if (plan.old_phases() != s.phases())
    throw std::invalid_argument("coalescence plan covers " + std::to_string(plan.old_phases()) + " phases, structure has " +
                                std::to_string(s.phases()));
  IntArray cells = s.cells();
  for (auto& v : cells.data()) v = plan(static_cast<int>(v));
  return Structure(std::move(cells), plan.new_phases());
}

Structure upsample(const Structure& s, const Factors& factor) {
  if (factor.size() != s.rank())
    throw DimensionError("upsampling factor has " + std::to_string(factor.size()) + " entries for a rank " +
                         std::to_string(s.rank()) + " structure");
  const Shape target = scaled_shape(s.dims(), factor);
  IntArray cells(target);
  std::vector<std::size_t> p(target.size());
  for (std::size_t flat = 0; flat < cells.size(); ++flat) {
    unravel(flat, target, p);
    for (std::size_t d = 0; d < p.size(); ++d) p[d] /= factor[d];
    cells[flat] = s.cells()[s.cells().offset(std::span<const std::size_t>(p))];
  }
  return Structure(std::move(cells), s.phases());
}

}  // namespace eq2pc
